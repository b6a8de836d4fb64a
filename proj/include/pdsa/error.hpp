#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pdsa {

// Bad caller input: invalid intrinsics, points behind the camera, malformed options.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Numerical failure: divergence, NaN losses.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed file. `line()` is 1-based; 0 when the failure is not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace pdsa

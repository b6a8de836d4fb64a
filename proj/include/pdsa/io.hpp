#pragma once

// File formats: camera JSON, encodings, scatter/curve CSVs, dataset CSV and
// parameter JSON. All reals are written with 17 significant digits.

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "pdsa/ambiguity.hpp"
#include "pdsa/datagen.hpp"
#include "pdsa/kpe.hpp"
#include "pdsa/mlp.hpp"

namespace pdsa::io {

using nlohmann::json;

inline std::string fmt_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// ---- camera -------------------------------------------------------------

inline PinholeCamera camera_from_json(const json& j) {
  try {
    PinholeCamera cam{j.at("fx").get<double>(), j.at("fy").get<double>(), j.at("px").get<double>(),
                      j.at("py").get<double>(), j.at("width").get<int>(), j.at("height").get<int>()};
    cam.validate();
    return cam;
  } catch (const json::exception& e) {
    throw InputError(std::string("invalid camera JSON: ") + e.what());
  }
}

inline json camera_to_json(const PinholeCamera& cam) {
  return {{"fx", cam.fx}, {"fy", cam.fy}, {"px", cam.px},
          {"py", cam.py}, {"width", cam.width}, {"height", cam.height}};
}

inline PinholeCamera read_camera(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open camera file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InputError("camera file '" + path + "' is not valid JSON: " + e.what());
  }
  return camera_from_json(j);
}

// ---- encodings ----------------------------------------------------------

inline void write_sparse_json(std::ostream& out, const SparseKpe& s) {
  out << '[';
  const auto flat = s.flatten();
  for (std::size_t k = 0; k < flat.size(); ++k) out << (k ? "," : "") << fmt_real(flat[k]);
  out << "]\n";
}

inline void write_dense_csv(std::ostream& out, const DenseKpe& d) {
  out << "row,col,theta_x,theta_y\n";
  for (int i = 0; i < d.rows; ++i)
    for (int j = 0; j < d.cols; ++j)
      out << i << ',' << j << ',' << fmt_real(d.at(i, j).theta_x) << ','
          << fmt_real(d.at(i, j).theta_y) << '\n';
}

// ---- scatter ------------------------------------------------------------

inline constexpr std::string_view kScatterHeader =
    "dx,dy,ex,ey,ez,tx,ty,tz,err2d_centered_px,err3d_rel_m,err3d_abs_m,crop_dist_px";

inline void write_scatter_csv(std::ostream& out, const std::vector<AmbiguityRecord>& records) {
  out << kScatterHeader << '\n';
  for (const auto& r : records) {
    const std::array<double, 12> row{r.dx, r.dy, r.extrusion.x(), r.extrusion.y(),
                                     r.extrusion.z(), r.t.x(), r.t.y(), r.t.z(),
                                     r.err2d_centered, r.err3d_rel, r.err3d_abs, r.crop_dist};
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << fmt_real(row[k]);
    out << '\n';
  }
}

// ---- loss curve ---------------------------------------------------------

inline void write_curve_csv(std::ostream& out, const LossCurve& curve) {
  out << "epoch,train_mse,val_mse\n";
  for (std::size_t e = 0; e < curve.size(); ++e)
    out << e << ',' << fmt_real(curve[e].train_mse) << ',' << fmt_real(curve[e].val_mse) << '\n';
}

// ---- parameters ---------------------------------------------------------

// {"layers": [16, H, ..., 24], "params": [W0 row-major, b0, W1, b1, ...]}
template <class Scalar>
json params_to_json(MlpParams<Scalar> p) {
  json values = json::array();
  p.for_each([&](Scalar& v) { values.push_back(static_cast<double>(v)); });
  return {{"layers", p.sizes()}, {"params", std::move(values)}};
}

template <class Scalar>
MlpParams<Scalar> params_from_json(const json& j) {
  std::vector<int> sizes;
  std::vector<double> values;
  try {
    sizes = j.at("layers").get<std::vector<int>>();
    values = j.at("params").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid parameter JSON: ") + e.what(), 0);
  }
  if (sizes.size() < 2) throw ParseError("parameter JSON needs at least two layer sizes", 0);
  for (int s : sizes)
    if (s < 1) throw ParseError("layer sizes must be positive", 0);
  auto p = MlpParams<Scalar>::zeros(sizes);
  if (values.size() != p.parameter_count())
    throw ParseError("parameter count does not match the layer sizes", 0);
  std::size_t k = 0;
  p.for_each([&](Scalar& v) { v = static_cast<Scalar>(values[k++]); });
  return p;
}

// ---- dataset ------------------------------------------------------------

inline std::string dataset_header() {
  std::string h = "idx";
  for (const char* prefix : {"u", "v", "cu", "cv", "X", "Y", "Z"})
    for (int c = 1; c <= 8; ++c) h += "," + std::string(prefix) + std::to_string(c);
  h += ",ex,ey,ez,tx,ty,tz,pair_id";
  return h;
}

inline constexpr std::size_t kDatasetColumns = 1 + 7 * kCorners + 6 + 1;

inline void write_dataset_csv(std::ostream& out, const Dataset& ds) {
  out << dataset_header() << '\n';
  for (const auto& s : ds.samples) {
    out << s.idx;
    for (const auto& q : s.kp2d) out << ',' << fmt_real(q.u);
    for (const auto& q : s.kp2d) out << ',' << fmt_real(q.v);
    for (const auto& q : s.kp2d_centered) out << ',' << fmt_real(q.u);
    for (const auto& q : s.kp2d_centered) out << ',' << fmt_real(q.v);
    for (int axis = 0; axis < 3; ++axis)
      for (const auto& p : s.kp3d) out << ',' << fmt_real(p[axis]);
    for (int axis = 0; axis < 3; ++axis) out << ',' << fmt_real(s.extrusion[axis]);
    for (int axis = 0; axis < 3; ++axis) out << ',' << fmt_real(s.t[axis]);
    out << ',' << s.pair_id << '\n';
  }
}

namespace detail {

template <class T>
T parse_field(std::string_view field, std::size_t line) {
  T value{};
  const char* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end)
    throw ParseError("malformed field '" + std::string(field) + "'", line);
  return value;
}

inline std::vector<std::string_view> split_fields(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = s.find(',', start);
    out.push_back(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace detail

inline Dataset read_dataset_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError("missing header", line_no);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != dataset_header()) throw ParseError("unexpected header", line_no);

  Dataset ds;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = detail::split_fields(line);
    if (f.size() != kDatasetColumns)
      throw ParseError("expected " + std::to_string(kDatasetColumns) + " fields, found " +
                           std::to_string(f.size()),
                       line_no);
    Sample s;
    std::size_t k = 0;
    s.idx = detail::parse_field<std::size_t>(f[k++], line_no);
    auto real = [&] { return detail::parse_field<double>(f[k++], line_no); };
    for (auto& q : s.kp2d) q.u = real();
    for (auto& q : s.kp2d) q.v = real();
    for (auto& q : s.kp2d_centered) q.u = real();
    for (auto& q : s.kp2d_centered) q.v = real();
    for (int axis = 0; axis < 3; ++axis)
      for (auto& p : s.kp3d) p[axis] = real();
    for (int axis = 0; axis < 3; ++axis) s.extrusion[axis] = real();
    for (int axis = 0; axis < 3; ++axis) s.t[axis] = real();
    s.pair_id = detail::parse_field<long>(f[k++], line_no);
    ds.samples.push_back(s);
  }
  return ds;
}

inline void save_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  write_dataset_csv(out, ds);
}

inline Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return read_dataset_csv(in);
}

}  // namespace pdsa::io

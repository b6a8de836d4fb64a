#pragma once

// Intrinsics-aware positional encoding: the angle each pixel's viewing ray
// makes with the optical axis, carried through crops and resizes.

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "pdsa/geometry.hpp"

namespace pdsa {

struct FieldAngles {
  double theta_x = 0.0;
  double theta_y = 0.0;

  friend bool operator==(const FieldAngles&, const FieldAngles&) = default;
};

inline FieldAngles field_angles(const PinholeCamera& cam, const Pixel& q) {
  return {std::atan((q.u - cam.px) / cam.fx), std::atan((q.v - cam.py) / cam.fy)};
}

/// Crop center followed by the corners (u0,v0), (u1,v0), (u0,v1), (u1,v1).
struct SparseKpe {
  static constexpr std::size_t kPoints = 5;
  static constexpr std::size_t kChannels = 2 * kPoints;

  std::array<FieldAngles, kPoints> points{};

  const FieldAngles& center() const { return points[0]; }

  // [cx, cy, c00x, c00y, c10x, c10y, c01x, c01y, c11x, c11y]
  std::array<double, kChannels> flatten() const {
    std::array<double, kChannels> out{};
    for (std::size_t k = 0; k < kPoints; ++k) {
      out[2 * k] = points[k].theta_x;
      out[2 * k + 1] = points[k].theta_y;
    }
    return out;
  }
};

inline SparseKpe sparse_encoding(const PinholeCamera& cam, const CropRegion& crop) {
  crop.validate();
  return {{field_angles(cam, crop.center()), field_angles(cam, {crop.u0, crop.v0}),
           field_angles(cam, {crop.u1, crop.v0}), field_angles(cam, {crop.u0, crop.v1}),
           field_angles(cam, {crop.u1, crop.v1})}};
}

/// Per-cell field angles of a crop resampled to out_h x out_w, row-major.
struct DenseKpe {
  int rows = 0;
  int cols = 0;
  CropRegion crop;
  PinholeCamera camera;
  std::vector<FieldAngles> cells;

  const FieldAngles& at(int row, int col) const {
    return cells[static_cast<std::size_t>(row) * cols + col];
  }
};

inline DenseKpe dense_encoding(const PinholeCamera& cam, const CropRegion& crop, int out_h,
                               int out_w) {
  crop.validate();
  if (out_h < 1 || out_w < 1) throw InputError("output size must be at least 1x1");
  DenseKpe grid{out_h, out_w, crop, cam, {}};
  grid.cells.reserve(static_cast<std::size_t>(out_h) * out_w);
  for (int i = 0; i < out_h; ++i)
    for (int j = 0; j < out_w; ++j)
      grid.cells.push_back(
          field_angles(cam, crop_pixel_to_original(crop, {j + 0.5, i + 0.5}, out_w, out_h)));
  return grid;
}

/**
 * Channel-major (C x H x W) feature tensor, the layout a network feature map
 * would be concatenated with.
 */
struct FeatureGrid {
  int channels = 0;
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  FeatureGrid() = default;
  FeatureGrid(int c, int h, int w)
      : channels(c), rows(h), cols(w), data(static_cast<std::size_t>(c) * h * w, 0.0) {}

  double& at(int c, int i, int j) { return data[index(c, i, j)]; }
  double at(int c, int i, int j) const { return data[index(c, i, j)]; }

 private:
  std::size_t index(int c, int i, int j) const {
    return (static_cast<std::size_t>(c) * rows + i) * cols + j;
  }
};

// Tiles the 10 sparse values over every spatial location.
inline FeatureGrid broadcast_sparse(const SparseKpe& s, int out_h, int out_w) {
  if (out_h < 1 || out_w < 1) throw InputError("output size must be at least 1x1");
  const auto flat = s.flatten();
  FeatureGrid grid(static_cast<int>(flat.size()), out_h, out_w);
  for (int c = 0; c < grid.channels; ++c)
    for (int i = 0; i < out_h; ++i)
      for (int j = 0; j < out_w; ++j) grid.at(c, i, j) = flat[c];
  return grid;
}

// Two channels: theta_x then theta_y.
inline FeatureGrid dense_to_channels(const DenseKpe& d) {
  FeatureGrid grid(2, d.rows, d.cols);
  for (int i = 0; i < d.rows; ++i)
    for (int j = 0; j < d.cols; ++j) {
      grid.at(0, i, j) = d.at(i, j).theta_x;
      grid.at(1, i, j) = d.at(i, j).theta_y;
    }
  return grid;
}

/**
 * Bilinear sample of a dense encoding at a continuous grid position, using the
 * cell-center convention: cell (i, j) sits at (row, col) = (i + 0.5, j + 0.5).
 * Positions outside the outermost centers are clamped to the border.
 */
inline FieldAngles bilinear_sample(const DenseKpe& d, double row, double col) {
  auto locate = [](double x, int n, int& lo, double& w) {
    double g = x - 0.5;
    if (g <= 0.0) {
      lo = 0;
      w = 0.0;
    } else if (g >= n - 1) {
      lo = n > 1 ? n - 2 : 0;
      w = n > 1 ? 1.0 : 0.0;
    } else {
      lo = static_cast<int>(std::floor(g));
      w = g - lo;
    }
  };
  int i0, j0;
  double wi, wj;
  locate(row, d.rows, i0, wi);
  locate(col, d.cols, j0, wj);
  const int i1 = d.rows > 1 ? i0 + 1 : i0;
  const int j1 = d.cols > 1 ? j0 + 1 : j0;
  auto lerp = [](const FieldAngles& a, const FieldAngles& b, double w) {
    return FieldAngles{a.theta_x + w * (b.theta_x - a.theta_x),
                       a.theta_y + w * (b.theta_y - a.theta_y)};
  };
  return lerp(lerp(d.at(i0, j0), d.at(i0, j1), wj), lerp(d.at(i1, j0), d.at(i1, j1), wj), wi);
}

// Resamples a dense encoding to another feature resolution by bilinear
// interpolation over the same crop.
inline DenseKpe resample_dense(const DenseKpe& d, int out_h, int out_w) {
  if (out_h < 1 || out_w < 1) throw InputError("output size must be at least 1x1");
  DenseKpe out{out_h, out_w, d.crop, d.camera, {}};
  out.cells.reserve(static_cast<std::size_t>(out_h) * out_w);
  const double sr = static_cast<double>(d.rows) / out_h;
  const double sc = static_cast<double>(d.cols) / out_w;
  for (int i = 0; i < out_h; ++i)
    for (int j = 0; j < out_w; ++j)
      out.cells.push_back(bilinear_sample(d, (i + 0.5) * sr, (j + 0.5) * sc));
  return out;
}

}  // namespace pdsa

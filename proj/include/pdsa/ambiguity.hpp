#pragma once

// Square-faced parallelepipeds under a pinhole camera: construction, projection,
// exact ambiguous counterparts and the 2D/3D keypoint error metrics.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "pdsa/geometry.hpp"
#include "pdsa/rng.hpp"

namespace pdsa {

inline constexpr double kFaceWidth = 0.2;

/// A fronto-parallel square face of side face_width extruded along `extrusion`.
struct Parallelepiped {
  double face_width = kFaceWidth;
  Vec3 extrusion = Vec3(0.0, 0.0, 0.2);

  bool valid() const { return face_width > 0.0 && extrusion.z() > 0.0; }
};

/// Camera-frame translation of the front-face center.
struct Placement {
  Vec3 t = Vec3(0.0, 0.0, 0.5);
};

struct Instance {
  Parallelepiped shape;
  Placement placement;
};

// Reference cuboid: 0.2 m cube straight ahead at 0.5 m.
inline Instance reference_instance() { return {Parallelepiped{}, Placement{}}; }

inline constexpr std::size_t kCorners = 8;

// Corner order: front face (-,-), (+,-), (-,+), (+,+) in local x,y, then the
// back face in the same order. Correspondence is by index.
using Keypoints3 = std::array<Point3, kCorners>;
using Keypoints2 = std::array<Pixel, kCorners>;

inline Keypoints3 corners_3d(const Parallelepiped& pp, const Placement& pl) {
  const double h = 0.5 * pp.face_width;
  Keypoints3 k;
  const std::array<double, 2> sign{-1.0, 1.0};
  for (std::size_t c = 0; c < 4; ++c) {
    k[c] = pl.t + Vec3(sign[c % 2] * h, sign[c / 2] * h, 0.0);
    k[c + 4] = k[c] + pp.extrusion;
  }
  return k;
}

inline Keypoints3 corners_3d(const Instance& inst) {
  return corners_3d(inst.shape, inst.placement);
}

inline Keypoints2 project_corners(const PinholeCamera& cam, const Keypoints3& k3) {
  Keypoints2 k2;
  for (std::size_t c = 0; c < kCorners; ++c) k2[c] = project(cam, k3[c]);
  return k2;
}

inline Pixel mean_pixel(const Keypoints2& k) {
  Pixel m;
  for (const auto& q : k) {
    m.u += q.u;
    m.v += q.v;
  }
  m.u /= kCorners;
  m.v /= kCorners;
  return m;
}

inline Point3 mean_point(const Keypoints3& k) {
  Point3 m = Point3::Zero();
  for (const auto& p : k) m += p;
  return m / static_cast<double>(kCorners);
}

inline Keypoints2 centered(const Keypoints2& k) {
  const Pixel m = mean_pixel(k);
  Keypoints2 out;
  for (std::size_t c = 0; c < kCorners; ++c) out[c] = {k[c].u - m.u, k[c].v - m.v};
  return out;
}

inline Keypoints3 centered(const Keypoints3& k) {
  const Point3 m = mean_point(k);
  Keypoints3 out;
  for (std::size_t c = 0; c < kCorners; ++c) out[c] = k[c] - m;
  return out;
}

/// RMS per-corner distance after subtracting each set's mean, in pixels.
inline double centered_error_2d(const Keypoints2& a, const Keypoints2& b) {
  const Keypoints2 ca = centered(a);
  const Keypoints2 cb = centered(b);
  double sum = 0.0;
  for (std::size_t c = 0; c < kCorners; ++c) {
    const double du = ca[c].u - cb[c].u;
    const double dv = ca[c].v - cb[c].v;
    sum += du * du + dv * dv;
  }
  return std::sqrt(sum / kCorners);
}

enum class ErrorMode { RootRelative, Absolute };

/// RMS per-corner distance in meters; RootRelative centers both sets first.
inline double error_3d(const Keypoints3& a, const Keypoints3& b, ErrorMode mode) {
  const Keypoints3 ca = mode == ErrorMode::RootRelative ? centered(a) : a;
  const Keypoints3 cb = mode == ErrorMode::RootRelative ? centered(b) : b;
  double sum = 0.0;
  for (std::size_t c = 0; c < kCorners; ++c) sum += (ca[c] - cb[c]).squaredNorm();
  return std::sqrt(sum / kCorners);
}

/**
 * The exactly ambiguous counterpart of `reference` moved by (dx, dy) in its
 * depth plane.
 *
 * The front face slides with the placement; the extrusion gains
 * (dx, dy) * ez / tz so the back face slides along the same image shift
 * fx * dx / tz. Every projected corner therefore moves by one constant image
 * vector and the centered 2D keypoints are unchanged, while the root-relative
 * 3D shape differs by ez * hypot(dx, dy) / (2 tz).
 */
inline Instance construct_ambiguous(const Instance& reference, double dx, double dy) {
  const Vec3& e = reference.shape.extrusion;
  const Vec3& t = reference.placement.t;
  if (!(t.z() > 0.0)) throw InputError("reference placement must be in front of the camera");
  const double k = e.z() / t.z();
  Instance out = reference;
  out.shape.extrusion = Vec3(e.x() + dx * k, e.y() + dy * k, e.z());
  out.placement.t = Vec3(t.x() + dx, t.y() + dy, t.z());
  return out;
}

// Closed-form root-relative 3D error of construct_ambiguous(reference, dx, dy).
inline double ambiguous_root_relative_error(const Instance& reference, double dx, double dy) {
  return reference.shape.extrusion.z() / (2.0 * reference.placement.t.z()) * std::hypot(dx, dy);
}

/// One scatter point: an instance compared against the reference.
struct AmbiguityRecord {
  double dx = 0.0;
  double dy = 0.0;
  Vec3 extrusion = Vec3::Zero();
  Vec3 t = Vec3::Zero();
  double err2d_centered = 0.0;  // px
  double err3d_rel = 0.0;       // m
  double err3d_abs = 0.0;       // m
  double crop_dist = 0.0;       // px, between projected front-face centers
  bool constructed = true;      // false for randomly perturbed context points
};

inline AmbiguityRecord compare_to_reference(const PinholeCamera& cam, const Instance& reference,
                                            const Instance& inst, double dx, double dy) {
  const Keypoints3 ref3 = corners_3d(reference);
  const Keypoints3 k3 = corners_3d(inst);
  const Pixel c_ref = project(cam, reference.placement.t);
  const Pixel c_inst = project(cam, inst.placement.t);
  AmbiguityRecord rec;
  rec.dx = dx;
  rec.dy = dy;
  rec.extrusion = inst.shape.extrusion;
  rec.t = inst.placement.t;
  rec.err2d_centered = centered_error_2d(project_corners(cam, ref3), project_corners(cam, k3));
  rec.err3d_rel = error_3d(ref3, k3, ErrorMode::RootRelative);
  rec.err3d_abs = error_3d(ref3, k3, ErrorMode::Absolute);
  rec.crop_dist = std::hypot(c_inst.u - c_ref.u, c_inst.v - c_ref.v);
  return rec;
}

struct Offset {
  double dx = 0.0;
  double dy = 0.0;
};

// n x n grid over [-max_abs, max_abs]^2, dy-major. n == 1 gives the origin.
inline std::vector<Offset> offset_grid(int n, double max_abs) {
  if (n < 1) throw InputError("grid size must be at least 1");
  std::vector<Offset> out;
  out.reserve(static_cast<std::size_t>(n) * n);
  auto coord = [&](int i) { return n == 1 ? 0.0 : -max_abs + 2.0 * max_abs * i / (n - 1); };
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) out.push_back({coord(ix), coord(iy)});
  return out;
}

struct ScatterConfig {
  int perturbed_per_offset = 0;  // extra non-ambiguous context points per offset
  double perturb_sigma = 0.02;   // m, per extrusion component
  std::uint64_t seed = 0;
};

/**
 * One constructed record per offset, in offset order, each optionally followed
 * by `perturbed_per_offset` records whose extrusion is jittered away from the
 * exact ambiguous one.
 */
inline std::vector<AmbiguityRecord> sweep_scatter(const PinholeCamera& cam,
                                                  const Instance& reference,
                                                  const std::vector<Offset>& offsets,
                                                  const ScatterConfig& cfg = {}) {
  std::vector<AmbiguityRecord> out;
  out.reserve(offsets.size() * (1 + static_cast<std::size_t>(std::max(0, cfg.perturbed_per_offset))));
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    const auto [dx, dy] = offsets[i];
    const Instance amb = construct_ambiguous(reference, dx, dy);
    out.push_back(compare_to_reference(cam, reference, amb, dx, dy));
    if (cfg.perturbed_per_offset <= 0) continue;
    auto rng = substream(cfg.seed, "scatter.perturb", i);
    std::normal_distribution<double> noise(0.0, cfg.perturb_sigma);
    for (int k = 0; k < cfg.perturbed_per_offset; ++k) {
      Instance p = amb;
      do {
        p.shape.extrusion = amb.shape.extrusion + Vec3(noise(rng), noise(rng), noise(rng));
      } while (p.shape.extrusion.z() <= 0.01);
      AmbiguityRecord rec = compare_to_reference(cam, reference, p, dx, dy);
      rec.constructed = false;
      out.push_back(rec);
    }
  }
  return out;
}

/**
 * Euclidean distance at which a sphere of radius r, centered `offset_angle`
 * radians off-axis, has a silhouette exactly `crop_width` wide on an image
 * plane at distance f. Solved by bisection to 1e-9.
 *
 * The width diverges as d approaches r / cos(angle) and falls to zero as d
 * grows, so the root is unique; `max_distance` (default 1e6 r) bounds the
 * search and widths below width(max_distance) are reported infeasible.
 */
inline double circle_distance_for_crop(double f, double r, double crop_width, double offset_angle,
                                       double max_distance = 0.0) {
  if (!(std::isfinite(f) && f > 0.0)) throw InputError("focal length must be positive");
  if (!(std::isfinite(r) && r > 0.0)) throw InputError("radius must be positive");
  if (!(std::isfinite(crop_width) && crop_width > 0.0))
    throw InputError("crop width must be positive");
  if (!(std::abs(offset_angle) < M_PI / 2)) throw InputError("offset angle must be within (-pi/2, pi/2)");
  if (max_distance <= 0.0) max_distance = 1e6 * r;

  const double theta = std::abs(offset_angle);
  auto width = [&](double d) {
    const double alpha = std::asin(r / d);
    if (theta + alpha >= M_PI / 2) return std::numeric_limits<double>::infinity();
    return f * (std::tan(theta + alpha) - std::tan(theta - alpha));
  };

  double lo = r / std::cos(theta);
  double hi = max_distance;
  if (!(hi > lo) || width(hi) > crop_width)
    throw InputError("crop width not reachable within the search distance");
  while (hi - lo > 1e-9 * std::max(1.0, lo)) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (width(mid) > crop_width ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace pdsa

#pragma once

#include <cmath>
#include <utility>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "pdsa/error.hpp"

namespace pdsa {

using Point3 = Eigen::Vector3d;
using Vec3 = Eigen::Vector3d;

// Continuous image coordinates in the original image frame. Integer index i
// covers [i, i+1) and has its center at i + 0.5.
struct Pixel {
  double u = 0.0;
  double v = 0.0;

  friend bool operator==(const Pixel&, const Pixel&) = default;
};

/**
 * Pinhole intrinsics. No distortion, no skew.
 *
 * Use make() to get a validated instance; aggregate initialization is kept
 * for constants such as the test camera.
 */
struct PinholeCamera {
  double fx = 0.0;
  double fy = 0.0;
  double px = 0.0;
  double py = 0.0;
  int width = 0;
  int height = 0;

  void validate() const {
    if (!(std::isfinite(fx) && std::isfinite(fy) && fx > 0.0 && fy > 0.0))
      throw InputError("focal lengths must be finite and positive");
    if (width <= 0 || height <= 0) throw InputError("image size must be positive");
    if (!(px >= 0.0 && px < width && py >= 0.0 && py < height))
      throw InputError("principal point must lie inside the image");
  }

  static PinholeCamera make(double fx, double fy, double px, double py, int width, int height) {
    PinholeCamera cam{fx, fy, px, py, width, height};
    cam.validate();
    return cam;
  }

  bool contains(const Pixel& q) const {
    return q.u >= 0.0 && q.u < width && q.v >= 0.0 && q.v < height;
  }

  friend bool operator==(const PinholeCamera&, const PinholeCamera&) = default;
};

// 640x480 reference camera used by the experiments and tests.
inline constexpr PinholeCamera kReferenceCamera{500.0, 500.0, 320.0, 240.0, 640, 480};

struct CropRegion {
  double u0 = 0.0;
  double v0 = 0.0;
  double u1 = 0.0;
  double v1 = 0.0;

  void validate() const {
    if (!(std::isfinite(u0) && std::isfinite(v0) && std::isfinite(u1) && std::isfinite(v1)))
      throw InputError("crop bounds must be finite");
    if (!(u0 < u1 && v0 < v1)) throw InputError("crop must satisfy u0 < u1 and v0 < v1");
  }

  double width() const { return u1 - u0; }
  double height() const { return v1 - v0; }
  Pixel center() const { return {0.5 * (u0 + u1), 0.5 * (v0 + v1)}; }
};

struct Sphere {
  Point3 center = Point3::Zero();
  double radius = 1.0;
};

inline Pixel project(const PinholeCamera& cam, const Point3& p) {
  if (!(p.z() > 0.0)) throw InputError("point behind camera");
  return {cam.fx * p.x() / p.z() + cam.px, cam.fy * p.y() / p.z() + cam.py};
}

// Unit direction of the viewing ray through q; always has positive z.
inline Vec3 backproject_ray(const PinholeCamera& cam, const Pixel& q) {
  return Vec3((q.u - cam.px) / cam.fx, (q.v - cam.py) / cam.fy, 1.0).normalized();
}

/**
 * Horizontal silhouette extent of a sphere on an image plane at distance f
 * from a camera at the origin, in image-plane units.
 *
 * The sphere center must lie in the x-z plane. The extent is bounded by the
 * two tangent rays at angles theta +- asin(r/d), where theta is the center's
 * angle off the optical axis and d its Euclidean distance from the camera.
 */
inline std::pair<double, double> sphere_silhouette_extent(double f, const Sphere& s) {
  if (!(f > 0.0)) throw InputError("focal length must be positive");
  if (!(s.radius > 0.0)) throw InputError("sphere radius must be positive");
  if (s.center.y() != 0.0) throw InputError("sphere center must lie in the x-z plane");
  const double d = s.center.norm();
  if (!(d > s.radius)) throw InputError("camera inside sphere");
  const double theta = std::atan2(s.center.x(), s.center.z());
  const double alpha = std::asin(s.radius / d);
  if (std::abs(theta) + alpha >= M_PI / 2)
    throw InputError("silhouette is not bounded on the image plane");
  return {f * std::tan(theta - alpha), f * std::tan(theta + alpha)};
}

// Maps a pixel of a crop resized to out_w x out_h back to the original image.
// Resized (0,0) lands on (u0,v0) and (out_w,out_h) on (u1,v1).
inline Pixel crop_pixel_to_original(const CropRegion& crop, const Pixel& resized, int out_w,
                                    int out_h) {
  if (out_w < 1 || out_h < 1) throw InputError("output size must be at least 1x1");
  return {crop.u0 + resized.u * (crop.width() / out_w),
          crop.v0 + resized.v * (crop.height() / out_h)};
}

inline Pixel original_to_crop_pixel(const CropRegion& crop, const Pixel& original, int out_w,
                                    int out_h) {
  if (out_w < 1 || out_h < 1) throw InputError("output size must be at least 1x1");
  return {(original.u - crop.u0) * (out_w / crop.width()),
          (original.v - crop.v0) * (out_h / crop.height())};
}

}  // namespace pdsa

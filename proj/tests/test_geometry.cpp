#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "pdsa/geometry.hpp"

namespace pdsa {
namespace {

constexpr PinholeCamera K0 = kReferenceCamera;

TEST(Project, OpticalAxisHitsPrincipalPoint) {
  const Pixel q = project(K0, Point3(0, 0, 0.5));
  EXPECT_EQ(q.u, 320.0);
  EXPECT_EQ(q.v, 240.0);
}

TEST(Project, LateralOffset) {
  const Pixel q = project(K0, Point3(0.1, 0, 0.5));
  EXPECT_DOUBLE_EQ(q.u, 420.0);
  EXPECT_DOUBLE_EQ(q.v, 240.0);
}

TEST(Project, BehindCameraThrows) {
  EXPECT_THROW(project(K0, Point3(0, 0, -1)), InputError);
  EXPECT_THROW(project(K0, Point3(0, 0, 0)), InputError);
}

TEST(Project, ScaleDepthAmbiguity) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> xy(-2, 2), z(0.1, 10), s(0.01, 100);
  for (int i = 0; i < 1000; ++i) {
    const Point3 p(xy(rng), xy(rng), z(rng));
    const double k = s(rng);
    const Pixel a = project(K0, p), b = project(K0, k * p);
    EXPECT_NEAR(a.u, b.u, 1e-9 * std::max(1.0, std::abs(a.u)));
    EXPECT_NEAR(a.v, b.v, 1e-9 * std::max(1.0, std::abs(a.v)));
  }
}

TEST(BackprojectRay, PrincipalPointIsOpticalAxis) {
  const Vec3 d = backproject_ray(K0, {320, 240});
  EXPECT_EQ(d, Vec3(0, 0, 1));
}

TEST(BackprojectRay, FortyFiveDegrees) {
  const Vec3 d = backproject_ray(K0, {820, 240});
  EXPECT_NEAR(d.x(), 1 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(d.y(), 0.0, 1e-15);
  EXPECT_NEAR(d.z(), 1 / std::sqrt(2.0), 1e-15);
}

TEST(BackprojectRay, RoundTripThroughProjection) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-500, 1100), v(-500, 900);
  for (int i = 0; i < 1000; ++i) {
    const Pixel q{u(rng), v(rng)};
    const Vec3 d = backproject_ray(K0, q);
    ASSERT_GT(d.z(), 0.0);
    EXPECT_NEAR(d.norm(), 1.0, 1e-14);
    const Pixel r = project(K0, 2.0 * d);
    EXPECT_NEAR(r.u, q.u, 1e-9);
    EXPECT_NEAR(r.v, q.v, 1e-9);
  }
}

TEST(BackprojectRay, ParallelToProjectedPoint) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> xy(-3, 3), z(0.1, 10);
  for (int i = 0; i < 1000; ++i) {
    const Point3 p(xy(rng), xy(rng), z(rng));
    const Vec3 d = backproject_ray(K0, project(K0, p));
    EXPECT_LT(d.cross(p.normalized()).norm(), 1e-10);
    EXPECT_GT(d.dot(p), 0.0);
  }
}

TEST(Camera, Validation) {
  EXPECT_NO_THROW(K0.validate());
  EXPECT_THROW(PinholeCamera::make(0, 500, 320, 240, 640, 480), InputError);
  EXPECT_THROW(PinholeCamera::make(500, -1, 320, 240, 640, 480), InputError);
  EXPECT_THROW(PinholeCamera::make(500, 500, 640, 240, 640, 480), InputError);
  EXPECT_THROW(PinholeCamera::make(500, 500, 320, -1, 640, 480), InputError);
  EXPECT_THROW(PinholeCamera::make(500, 500, 0, 0, 0, 480), InputError);
}

// Width of the silhouette: 2 f tan(asin(r/d)) on axis.
TEST(SphereSilhouette, ReferenceCircleHalfUnitWide) {
  const auto [lo, hi] = sphere_silhouette_extent(1.0, {Point3(0, 0, 2), 0.485});
  EXPECT_NEAR(hi - lo, 0.5, 1e-3);
  EXPECT_NEAR(hi - lo, 2 * std::tan(std::asin(0.485 / 2)), 1e-15);
  EXPECT_NEAR(lo, -hi, 1e-15);
}

TEST(SphereSilhouette, TenTimesLargerTenTimesFarther) {
  const auto [lo, hi] = sphere_silhouette_extent(1.0, {Point3(0, 0, 20), 4.85});
  EXPECT_NEAR(hi - lo, 0.5, 1e-3);
}

// On-axis width is 2 f r / sqrt(d^2 - r^2), so the ratio only tends to 1/2
// as r / d shrinks: 0.4887 for r = 0.485, within 1% once r is small.
TEST(SphereSilhouette, DoublingDistanceRoughlyHalvesWidth) {
  const auto [a0, a1] = sphere_silhouette_extent(1.0, {Point3(0, 0, 2), 0.485});
  const auto [b0, b1] = sphere_silhouette_extent(1.0, {Point3(0, 0, 4), 0.485});
  const double r2 = 0.485 * 0.485;
  EXPECT_NEAR((b1 - b0) / (a1 - a0), std::sqrt((4 - r2) / (16 - r2)), 1e-12);
  const auto [c0, c1] = sphere_silhouette_extent(1.0, {Point3(0, 0, 2), 0.1});
  const auto [d0, d1] = sphere_silhouette_extent(1.0, {Point3(0, 0, 4), 0.1});
  EXPECT_NEAR((d1 - d0) / (c1 - c0), 0.5, 0.005);
}

TEST(SphereSilhouette, CameraInsideThrows) {
  EXPECT_THROW(sphere_silhouette_extent(1.0, {Point3(0, 0, 0.4), 0.485}), InputError);
  EXPECT_THROW(sphere_silhouette_extent(1.0, {Point3(0, 0, 0.485), 0.485}), InputError);
}

TEST(SphereSilhouette, MonotoneInDistanceAndAngle) {
  const double r = 0.485;
  auto width = [&](double d, double theta) {
    const auto [lo, hi] =
        sphere_silhouette_extent(1.0, {Point3(d * std::sin(theta), 0, d * std::cos(theta)), r});
    return hi - lo;
  };
  for (double theta = -1.0; theta <= 1.0; theta += 0.1) {
    double prev = width(1.5, theta);
    for (double d = 1.6; d <= 10.0; d += 0.1) {
      const double w = width(d, theta);
      EXPECT_LT(w, prev) << "d=" << d << " theta=" << theta;
      prev = w;
    }
  }
  for (double d = 1.5; d <= 10.0; d += 0.5) {
    double prev = width(d, 0.0);
    for (double theta = 0.05; theta <= 1.0; theta += 0.05) {
      const double w_pos = width(d, theta), w_neg = width(d, -theta);
      EXPECT_GT(w_pos, prev) << "d=" << d << " theta=" << theta;
      EXPECT_NEAR(w_pos, w_neg, 1e-12);
      prev = w_pos;
    }
  }
}

TEST(CropPixel, CornerAndMidpoint) {
  const CropRegion crop{100, 100, 200, 200};
  EXPECT_EQ(crop_pixel_to_original(crop, {0, 0}, 100, 100), (Pixel{100, 100}));
  EXPECT_EQ(crop_pixel_to_original(crop, {50, 50}, 100, 100), (Pixel{150, 150}));
  EXPECT_EQ(crop_pixel_to_original(crop, {100, 100}, 100, 100), (Pixel{200, 200}));
}

TEST(CropPixel, HalfResolutionMidpoint) {
  const Pixel q = crop_pixel_to_original({0, 0, 640, 480}, {16, 12}, 32, 24);
  EXPECT_DOUBLE_EQ(q.u, 320.0);
  EXPECT_DOUBLE_EQ(q.v, 240.0);
}

TEST(CropPixel, ExtrapolatesBeyondCrop) {
  const Pixel q = crop_pixel_to_original({100, 100, 200, 200}, {-10, 150}, 100, 100);
  EXPECT_DOUBLE_EQ(q.u, 90.0);
  EXPECT_DOUBLE_EQ(q.v, 250.0);
}

TEST(CropPixel, RejectsEmptyOutput) {
  EXPECT_THROW(crop_pixel_to_original({0, 0, 1, 1}, {0, 0}, 0, 1), InputError);
}

TEST(CropPixel, InverseIsIdentity) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> pos(0, 600), span(1, 400), px(-50, 450);
  std::uniform_int_distribution<int> dim(1, 512);
  for (int i = 0; i < 10000; ++i) {
    const double u0 = pos(rng), v0 = pos(rng);
    const CropRegion crop{u0, v0, u0 + span(rng), v0 + span(rng)};
    const int w = dim(rng), h = dim(rng);
    const Pixel r{px(rng), px(rng)};
    const Pixel back = original_to_crop_pixel(crop, crop_pixel_to_original(crop, r, w, h), w, h);
    // Rounding happens in original-image pixels; measure it there.
    EXPECT_NEAR((back.u - r.u) * crop.width() / w, 0.0, 1e-12 * std::max(1.0, u0 + std::abs(r.u) * crop.width() / w));
    EXPECT_NEAR((back.v - r.v) * crop.height() / h, 0.0, 1e-12 * std::max(1.0, v0 + std::abs(r.v) * crop.height() / h));
    const Pixel o{pos(rng), pos(rng)};
    const Pixel fwd = crop_pixel_to_original(crop, original_to_crop_pixel(crop, o, w, h), w, h);
    EXPECT_NEAR(fwd.u, o.u, 1e-12 * std::max(1.0, o.u));
    EXPECT_NEAR(fwd.v, o.v, 1e-12 * std::max(1.0, o.v));
  }
}

}  // namespace
}  // namespace pdsa

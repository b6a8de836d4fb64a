#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "pdsa/ambiguity.hpp"

namespace pdsa {
namespace {

constexpr PinholeCamera K0 = kReferenceCamera;

// Independent reprojection oracle: projects every corner by hand and returns
// the RMS distance after removing each set's mean.
double oracle_centered_rms(const Keypoints3& a, const Keypoints3& b) {
  double au[8], av[8], bu[8], bv[8], ma[2] = {0, 0}, mb[2] = {0, 0};
  for (int c = 0; c < 8; ++c) {
    au[c] = 500.0 * a[c].x() / a[c].z() + 320.0;
    av[c] = 500.0 * a[c].y() / a[c].z() + 240.0;
    bu[c] = 500.0 * b[c].x() / b[c].z() + 320.0;
    bv[c] = 500.0 * b[c].y() / b[c].z() + 240.0;
    ma[0] += au[c] / 8;
    ma[1] += av[c] / 8;
    mb[0] += bu[c] / 8;
    mb[1] += bv[c] / 8;
  }
  double s = 0.0;
  for (int c = 0; c < 8; ++c) {
    const double du = (au[c] - ma[0]) - (bu[c] - mb[0]);
    const double dv = (av[c] - ma[1]) - (bv[c] - mb[1]);
    s += du * du + dv * dv;
  }
  return std::sqrt(s / 8);
}

TEST(Corners3d, ReferenceCuboid) {
  const Keypoints3 k = corners_3d(reference_instance());
  for (int c = 0; c < 4; ++c) {
    EXPECT_DOUBLE_EQ(k[c].z(), 0.5);
    EXPECT_DOUBLE_EQ(k[c + 4].z(), 0.7);
    EXPECT_DOUBLE_EQ(std::abs(k[c].x()), 0.1);
    EXPECT_DOUBLE_EQ(std::abs(k[c].y()), 0.1);
  }
  // (-,-), (+,-), (-,+), (+,+)
  EXPECT_LT(k[0].x(), 0);
  EXPECT_LT(k[0].y(), 0);
  EXPECT_GT(k[1].x(), 0);
  EXPECT_LT(k[1].y(), 0);
  EXPECT_LT(k[2].x(), 0);
  EXPECT_GT(k[2].y(), 0);
  EXPECT_GT(k[3].x(), 0);
  EXPECT_GT(k[3].y(), 0);
}

TEST(Corners3d, PointSymmetricWhenCentered) {
  const Keypoints3 k = corners_3d({0.2, Vec3(0, 0, 0.33)}, {Vec3(0, 0, 0.9)});
  for (int c = 0; c < 4; ++c) {
    EXPECT_DOUBLE_EQ(k[c].x(), -k[3 - c].x());
    EXPECT_DOUBLE_EQ(k[c].y(), -k[3 - c].y());
  }
}

TEST(Corners3d, TranslationShiftsEveryCorner) {
  const Parallelepiped pp{0.2, Vec3(0.05, -0.1, 0.3)};
  const Keypoints3 a = corners_3d(pp, {Vec3(0, 0, 0.5)});
  const Keypoints3 b = corners_3d(pp, {Vec3(0.1, 0, 0.5)});
  for (int c = 0; c < 8; ++c) EXPECT_TRUE((b[c] - a[c]).isApprox(Vec3(0.1, 0, 0), 1e-15));
}

TEST(ProjectCorners, ReferenceFaces) {
  const Keypoints2 k = project_corners(K0, corners_3d(reference_instance()));
  for (int c = 0; c < 4; ++c) {
    EXPECT_NEAR(std::abs(k[c].u - 320), 100.0, 1e-12);
    EXPECT_NEAR(std::abs(k[c].v - 240), 100.0, 1e-12);
    EXPECT_NEAR(std::abs(k[c + 4].u - 320), 50.0 / 0.7, 1e-12);
    EXPECT_NEAR(std::abs(k[c + 4].v - 240), 50.0 / 0.7, 1e-12);
  }
}

TEST(ProjectCorners, DepthScalingInvariant) {
  const Keypoints3 k = corners_3d({0.2, Vec3(0.1, 0.04, 0.25)}, {Vec3(-0.05, 0.07, 0.6)});
  Keypoints3 k2;
  for (int c = 0; c < 8; ++c) k2[c] = 2.0 * k[c];
  const Keypoints2 a = project_corners(K0, k), b = project_corners(K0, k2);
  for (int c = 0; c < 8; ++c) {
    EXPECT_NEAR(a[c].u, b[c].u, 1e-12);
    EXPECT_NEAR(a[c].v, b[c].v, 1e-12);
  }
}

TEST(ProjectCorners, BehindCameraPropagates) {
  EXPECT_THROW(project_corners(K0, corners_3d({0.2, Vec3(0, 0, 0.2)}, {Vec3(0, 0, -0.1)})),
               InputError);
}

TEST(CenteredError2d, ZeroForIdenticalAndShifted) {
  const Keypoints2 k = project_corners(K0, corners_3d(reference_instance()));
  EXPECT_EQ(centered_error_2d(k, k), 0.0);
  Keypoints2 s = k;
  for (auto& q : s) {
    q.u += 37.25;
    q.v -= 12.5;
  }
  EXPECT_NEAR(centered_error_2d(k, s), 0.0, 1e-12);
}

// Moving one corner by (8, 0) moves the mean by (1, 0): centered residuals
// are 7 for that corner and -1 for the other seven, so RMS = sqrt(56 / 8).
TEST(CenteredError2d, SingleCornerPerturbation) {
  const Keypoints2 k = project_corners(K0, corners_3d(reference_instance()));
  Keypoints2 p = k;
  p[5].u += 8.0;
  EXPECT_NEAR(centered_error_2d(k, p), std::sqrt(7.0), 1e-12);
}

TEST(Error3d, IdenticalAndTranslated) {
  const Keypoints3 a = corners_3d({0.2, Vec3(0.1, 0.0, 0.3)}, {Vec3(0.02, 0.1, 0.6)});
  EXPECT_EQ(error_3d(a, a, ErrorMode::Absolute), 0.0);
  EXPECT_EQ(error_3d(a, a, ErrorMode::RootRelative), 0.0);
  Keypoints3 b = a;
  for (auto& p : b) p += Vec3(1, 0, 0);
  EXPECT_NEAR(error_3d(a, b, ErrorMode::Absolute), 1.0, 1e-12);
  EXPECT_NEAR(error_3d(a, b, ErrorMode::RootRelative), 0.0, 1e-12);
}

TEST(ConstructAmbiguous, ZeroOffsetIsIdentity) {
  const Instance ref = reference_instance();
  const Instance out = construct_ambiguous(ref, 0, 0);
  EXPECT_EQ(out.shape.extrusion, ref.shape.extrusion);
  EXPECT_EQ(out.placement.t, ref.placement.t);
}

TEST(ConstructAmbiguous, LateralTenCentimeters) {
  const Instance ref = reference_instance();
  const Instance out = construct_ambiguous(ref, 0.1, 0.0);
  EXPECT_TRUE(out.shape.extrusion.isApprox(Vec3(0.04, 0, 0.2), 1e-15));
  EXPECT_TRUE(out.placement.t.isApprox(Vec3(0.1, 0, 0.5), 1e-15));
  const Keypoints3 a = corners_3d(ref), b = corners_3d(out);
  EXPECT_LT(oracle_centered_rms(a, b), 1e-9);
  EXPECT_LT(centered_error_2d(project_corners(K0, a), project_corners(K0, b)), 1e-9);
  EXPECT_NEAR(error_3d(a, b, ErrorMode::RootRelative), 0.02, 1e-12);
}

TEST(ConstructAmbiguous, DiagonalOffset) {
  const Instance ref = reference_instance();
  const Instance out = construct_ambiguous(ref, 0.2, 0.15);
  const Keypoints3 a = corners_3d(ref), b = corners_3d(out);
  EXPECT_LT(oracle_centered_rms(a, b), 1e-9);
  EXPECT_NEAR(error_3d(a, b, ErrorMode::RootRelative), 0.05, 1e-12);
}

TEST(ConstructAmbiguous, UncenteredKeypointsShiftUniformly) {
  const Instance ref = reference_instance();
  const Instance out = construct_ambiguous(ref, -0.12, 0.07);
  const Keypoints2 a = project_corners(K0, corners_3d(ref));
  const Keypoints2 b = project_corners(K0, corners_3d(out));
  for (int c = 0; c < 8; ++c) {
    EXPECT_NEAR(b[c].u - a[c].u, 500 * -0.12 / 0.5, 1e-9);
    EXPECT_NEAR(b[c].v - a[c].v, 500 * 0.07 / 0.5, 1e-9);
  }
}

TEST(ConstructAmbiguous, WorksForGeneralReference) {
  const Instance ref{{0.2, Vec3(0.08, -0.05, 0.35)}, {Vec3(-0.1, 0.05, 0.7)}};
  const Instance out = construct_ambiguous(ref, 0.15, -0.2);
  EXPECT_LT(oracle_centered_rms(corners_3d(ref), corners_3d(out)), 1e-9);
  EXPECT_NEAR(error_3d(corners_3d(ref), corners_3d(out), ErrorMode::RootRelative),
              ambiguous_root_relative_error(ref, 0.15, -0.2), 1e-12);
}

// Grid property: exactness, closed form, absolute >= root-relative, and
// distinguishability once the uncentered location is kept.
TEST(ConstructAmbiguous, GridProperties) {
  const Instance ref = reference_instance();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> off(-0.4, 0.4);
  for (int i = 0; i < 2000; ++i) {
    const double dx = off(rng), dy = off(rng);
    const Instance out = construct_ambiguous(ref, dx, dy);
    const Keypoints3 a = corners_3d(ref), b = corners_3d(out);
    const Keypoints2 pa = project_corners(K0, a), pb = project_corners(K0, b);
    EXPECT_LT(centered_error_2d(pa, pb), 1e-9);
    EXPECT_LT(oracle_centered_rms(a, b), 1e-9);
    const double rel = error_3d(a, b, ErrorMode::RootRelative);
    EXPECT_NEAR(rel, 0.2 / (2 * 0.5) * std::hypot(dx, dy), 1e-9);
    EXPECT_GE(error_3d(a, b, ErrorMode::Absolute), rel);
    const Pixel ma = mean_pixel(pa), mb = mean_pixel(pb);
    EXPECT_GE(std::abs(mb.u - ma.u), 500 * std::abs(dx) / 0.5 - 1e-9);
  }
}

TEST(OffsetGrid, LayoutAndOrigin) {
  const auto g = offset_grid(21, 0.3);
  ASSERT_EQ(g.size(), 441u);
  EXPECT_DOUBLE_EQ(g.front().dx, -0.3);
  EXPECT_DOUBLE_EQ(g.front().dy, -0.3);
  EXPECT_DOUBLE_EQ(g.back().dx, 0.3);
  EXPECT_NEAR(g[220].dx, 0.0, 1e-15);
  EXPECT_NEAR(g[220].dy, 0.0, 1e-15);
  EXPECT_NEAR(g[1].dx - g[0].dx, 0.03, 1e-15);
  EXPECT_EQ(offset_grid(1, 0.3).size(), 1u);
  EXPECT_THROW(offset_grid(0, 0.3), InputError);
}

TEST(SweepScatter, OriginOnly) {
  const auto recs = sweep_scatter(K0, reference_instance(), {{0, 0}});
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].err2d_centered, 0.0);
  EXPECT_EQ(recs[0].err3d_rel, 0.0);
  EXPECT_EQ(recs[0].err3d_abs, 0.0);
  EXPECT_EQ(recs[0].crop_dist, 0.0);
}

TEST(SweepScatter, MonotoneAlongRays) {
  for (double angle = 0; angle < 2 * M_PI; angle += M_PI / 7) {
    std::vector<Offset> ray;
    for (int k = 0; k <= 30; ++k)
      ray.push_back({0.01 * k * std::cos(angle), 0.01 * k * std::sin(angle)});
    const auto recs = sweep_scatter(K0, reference_instance(), ray);
    for (std::size_t k = 1; k < recs.size(); ++k) {
      EXPECT_GT(recs[k].crop_dist, recs[k - 1].crop_dist);
      EXPECT_GE(recs[k].err3d_rel, recs[k - 1].err3d_rel);
    }
  }
}

TEST(SweepScatter, FarOffsetsLookIdenticalButDifferIn3d) {
  const auto recs = sweep_scatter(K0, reference_instance(), offset_grid(21, 0.3));
  int red = 0;
  for (const auto& r : recs) {
    EXPECT_LT(r.err2d_centered, 1e-9);
    if (r.crop_dist > 200 && r.err3d_rel > 0.05) ++red;
    EXPECT_NEAR(r.crop_dist, 500 * std::hypot(r.dx, r.dy) / 0.5, 1e-9);
  }
  EXPECT_GT(red, 0);
}

TEST(SweepScatter, PerturbedPointsAreDeterministicAndOrdered) {
  ScatterConfig cfg{3, 0.02, 42};
  const auto offsets = offset_grid(5, 0.2);
  const auto a = sweep_scatter(K0, reference_instance(), offsets, cfg);
  const auto b = sweep_scatter(K0, reference_instance(), offsets, cfg);
  ASSERT_EQ(a.size(), offsets.size() * 4);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].extrusion, b[i].extrusion);
    EXPECT_EQ(a[i].constructed, i % 4 == 0);
    EXPECT_EQ(a[i].dx, offsets[i / 4].dx);
    if (!a[i].constructed) {
      EXPECT_GT(a[i].err2d_centered, 0.0);
    }
  }
}

TEST(CircleDistance, OnAxisReference) {
  EXPECT_NEAR(circle_distance_for_crop(1, 0.485, 0.5, 0), 2.0, 0.005);
}

TEST(CircleDistance, TenTimesScaled) {
  EXPECT_NEAR(circle_distance_for_crop(1, 4.85, 0.5, 0), 20.0, 0.05);
}

// Angle found by root-finding d(theta) = 2.43 with an external solver.
TEST(CircleDistance, OffAxisCircleIsFarther) {
  constexpr double kTheta = 0.43537516102570795;
  EXPECT_NEAR(circle_distance_for_crop(1, 0.485, 0.5, kTheta), 2.43, 0.02);
  EXPECT_NEAR(circle_distance_for_crop(1, 0.485, 0.5, kTheta), 2.43, 1e-6);
  EXPECT_NEAR(circle_distance_for_crop(1, 0.485, 0.5, 0.4363), 2.43, 0.02);
  EXPECT_NEAR(circle_distance_for_crop(1, 0.485, 0.5, -kTheta), 2.43, 1e-6);
}

TEST(CircleDistance, AgreesWithSilhouetteOracle) {
  for (double theta : {0.0, 0.1, 0.3, 0.7, 1.1})
    for (double width : {0.05, 0.3, 0.5, 2.0}) {
      const double d = circle_distance_for_crop(1, 0.485, width, theta);
      const auto [lo, hi] = sphere_silhouette_extent(
          1.0, {Point3(d * std::sin(theta), 0, d * std::cos(theta)), 0.485});
      EXPECT_NEAR(hi - lo, width, 1e-7 * std::max(1.0, width)) << theta << " " << width;
    }
}

TEST(CircleDistance, InfeasibleInputs) {
  EXPECT_THROW(circle_distance_for_crop(1, 0.485, 0.0, 0), InputError);
  EXPECT_THROW(circle_distance_for_crop(1, 0.485, -1.0, 0), InputError);
  EXPECT_THROW(circle_distance_for_crop(1, 0.0, 0.5, 0), InputError);
  EXPECT_THROW(circle_distance_for_crop(1, 0.485, 0.5, M_PI / 2), InputError);
  EXPECT_THROW(circle_distance_for_crop(1, 0.485, 0.5, 0, 1.5), InputError);
  EXPECT_THROW(circle_distance_for_crop(1, 0.485, 1e-9, 0), InputError);
}

}  // namespace
}  // namespace pdsa

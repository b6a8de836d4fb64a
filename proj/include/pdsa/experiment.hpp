#pragma once

// Keypoint-to-3D regression experiment: the same network trained on centered
// crop keypoints versus absolute image keypoints.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "pdsa/datagen.hpp"
#include "pdsa/mlp.hpp"

namespace pdsa {

enum class InputVariant { Centered, Absolute };
enum class TargetKind { RootRelative, Absolute3D };

inline std::string_view to_string(InputVariant v) {
  return v == InputVariant::Centered ? "centered" : "absolute";
}
inline std::string_view to_string(TargetKind t) {
  return t == TargetKind::RootRelative ? "root_relative" : "absolute";
}

struct TrainConfig {
  InputVariant variant = InputVariant::Absolute;
  TargetKind target = TargetKind::RootRelative;
  OptimizerConfig optimizer;
};

/**
 * Pixel scale applied to network inputs. Absolute keypoints are divided by
 * the image width. Centered keypoints are divided by one crop span shared by
 * the whole dataset: the mean keypoint bounding-box extent of the reference set.
 */
struct InputScale {
  double pixels = 1.0;
};

inline double mean_crop_span(const Dataset& ds) {
  if (ds.empty()) return 1.0;
  double sum = 0.0;
  for (const auto& s : ds.samples) {
    double u_lo = s.kp2d[0].u, u_hi = u_lo, v_lo = s.kp2d[0].v, v_hi = v_lo;
    for (const auto& q : s.kp2d) {
      u_lo = std::min(u_lo, q.u);
      u_hi = std::max(u_hi, q.u);
      v_lo = std::min(v_lo, q.v);
      v_hi = std::max(v_hi, q.v);
    }
    sum += std::max(u_hi - u_lo, v_hi - v_lo);
  }
  return sum / static_cast<double>(ds.size());
}

inline InputScale input_scale(InputVariant variant, const PinholeCamera& cam, const Dataset& reference) {
  return {variant == InputVariant::Absolute ? static_cast<double>(cam.width) : mean_crop_span(reference)};
}

// Root-relative or absolute 3D corners, flattened x,y,z per corner.
inline VectorX<double> target_vector(const Sample& s, TargetKind target) {
  const Keypoints3 k = target == TargetKind::RootRelative ? centered(s.kp3d) : s.kp3d;
  VectorX<double> y(kMlpOutputDim);
  for (std::size_t c = 0; c < kCorners; ++c) y.segment<3>(3 * static_cast<Eigen::Index>(c)) = k[c];
  return y;
}

// Flattened u,v per corner.
template <class Scalar>
Matrices<Scalar> to_matrices(const Dataset& ds, InputVariant variant, TargetKind target,
                             InputScale scale) {
  Matrices<Scalar> m{MatrixX<Scalar>(kMlpInputDim, static_cast<Eigen::Index>(ds.size())),
                     MatrixX<Scalar>(kMlpOutputDim, static_cast<Eigen::Index>(ds.size()))};
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const Sample& s = ds.samples[i];
    const Keypoints2& k = variant == InputVariant::Centered ? s.kp2d_centered : s.kp2d;
    if (variant == InputVariant::Centered) {
      const Pixel mean = mean_pixel(k);
      if (std::abs(mean.u) > 1e-9 || std::abs(mean.v) > 1e-9)
        throw InputError("centered keypoints of sample " + std::to_string(s.idx) +
                         " do not have zero mean");
    }
    const auto col = static_cast<Eigen::Index>(i);
    for (std::size_t c = 0; c < kCorners; ++c) {
      m.x(2 * c, col) = static_cast<Scalar>(k[c].u / scale.pixels);
      m.x(2 * c + 1, col) = static_cast<Scalar>(k[c].v / scale.pixels);
    }
    m.y.col(col) = target_vector(s, target).cast<Scalar>();
  }
  return m;
}

/**
 * Lowest mean squared error any function of the centered keypoints can reach
 * on `ds`: members of an ambiguous pair share their centered input, so the
 * best shared prediction is the pair mean and each pair contributes
 * |a - b|^2 / 2. Normalized like the training loss (samples x 24 outputs).
 */
inline double collision_floor(const Dataset& ds, TargetKind target) {
  if (ds.empty()) return 0.0;
  std::vector<const Sample*> first;
  double sum = 0.0;
  for (const auto& s : ds.samples) {
    if (s.pair_id < 0) continue;
    const auto pid = static_cast<std::size_t>(s.pair_id);
    if (pid >= first.size()) first.resize(pid + 1, nullptr);
    if (!first[pid]) {
      first[pid] = &s;
    } else {
      sum += 0.5 * (target_vector(*first[pid], target) - target_vector(s, target)).squaredNorm();
    }
  }
  return sum / (static_cast<double>(ds.size()) * kMlpOutputDim);
}

struct VariantOutcome {
  LossCurve curve;
  double final_train_mse = 0.0;  // full pass with the final parameters
  double final_val_mse = 0.0;
};

template <class Scalar>
struct VariantRun {
  VariantOutcome outcome;
  MlpParams<Scalar> params;
};

template <class Scalar>
VariantRun<Scalar> run_variant(const PinholeCamera& cam, const TrainConfig& cfg,
                               const Dataset& train_set, const Dataset& val_set) {
  const InputScale scale = input_scale(cfg.variant, cam, train_set);
  const auto train = to_matrices<Scalar>(train_set, cfg.variant, cfg.target, scale);
  const auto val = to_matrices<Scalar>(val_set, cfg.variant, cfg.target, scale);
  auto result = train_mlp<Scalar>(cfg.optimizer, train, val);
  VariantRun<Scalar> run;
  run.outcome.curve = std::move(result.curve);
  run.outcome.final_train_mse = evaluate_mse(result.params, train);
  run.outcome.final_val_mse = evaluate_mse(result.params, val);
  run.params = std::move(result.params);
  return run;
}

}  // namespace pdsa

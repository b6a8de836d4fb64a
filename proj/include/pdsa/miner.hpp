#pragma once

#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Core>

#include "pdsa/ambiguity.hpp"
#include "pdsa/lm.hpp"

namespace pdsa {

struct MinerConfig {
  bool freeze_txy = true;
  bool freeze_tz = true;
  double tol = 0.1;  // px; a solution below this looks the same
  int max_iters = 200;
  double fd_step = 1e-7;
  double initial_damping = 1e-3;
};

struct MinerResult {
  Instance instance;
  double residual = 0.0;  // centered RMS reprojection error against the reference, px
  int iterations = 0;
  bool converged = false;  // residual < cfg.tol
};

/**
 * Searches for the parallelepiped whose centered projection matches the
 * reference, starting from the reference shape at `init`.
 *
 * Free parameters are the extrusion and whichever translation components
 * the config leaves unfrozen. Non-convergence is reported through the
 * result, never thrown.
 */
inline MinerResult mine_ambiguous(const PinholeCamera& cam, const Instance& reference,
                                  const Placement& init, const MinerConfig& cfg = {}) {
  if (!(init.t.z() > 0.0)) throw InputError("initial placement must be in front of the camera");

  const Keypoints2 target = centered(project_corners(cam, corners_3d(reference)));
  const double face_width = reference.shape.face_width;

  // Parameter layout: e (3), then t components that are free.
  std::vector<int> free_t;
  if (!cfg.freeze_txy) free_t = {0, 1};
  if (!cfg.freeze_tz) free_t.push_back(2);

  Eigen::VectorXd x0(3 + free_t.size());
  x0.head<3>() = reference.shape.extrusion;
  for (std::size_t k = 0; k < free_t.size(); ++k) x0[3 + k] = init.t[free_t[k]];

  auto unpack = [&](const Eigen::VectorXd& x) {
    Instance inst{Parallelepiped{face_width, x.head<3>()}, init};
    for (std::size_t k = 0; k < free_t.size(); ++k) inst.placement.t[free_t[k]] = x[3 + k];
    return inst;
  };

  // 16 residuals scaled so that |r| equals the centered RMS error.
  const double scale = 1.0 / std::sqrt(static_cast<double>(kCorners));
  auto residual = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    const Instance inst = unpack(x);
    if (!inst.shape.valid()) return false;
    const Keypoints3 k3 = corners_3d(inst);
    for (const auto& p : k3)
      if (!(p.z() > 0.0)) return false;
    const Keypoints2 k2 = centered(project_corners(cam, k3));
    r.resize(2 * kCorners);
    for (std::size_t c = 0; c < kCorners; ++c) {
      r[2 * c] = scale * (k2[c].u - target[c].u);
      r[2 * c + 1] = scale * (k2[c].v - target[c].v);
    }
    return true;
  };

  LmOptions opt;
  opt.max_iters = cfg.max_iters;
  opt.fd_step = cfg.fd_step;
  opt.initial_damping = cfg.initial_damping;
  const LmResult lm = levenberg_marquardt(residual, x0, opt);
  if (!std::isfinite(lm.cost)) throw InputError("initial placement puts corners behind the camera");

  MinerResult out;
  out.instance = unpack(lm.x);
  out.residual = std::sqrt(2.0 * lm.cost);
  out.iterations = lm.iterations;
  out.converged = out.residual < cfg.tol;
  return out;
}

}  // namespace pdsa

#pragma once

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace pdsa {

struct LmOptions {
  int max_iters = 200;
  double initial_damping = 1e-3;
  double fd_step = 1e-7;    // central-difference step for the Jacobian
  double step_tol = 1e-13;  // relative step size that counts as converged
  double cost_tol = 1e-30;  // 0.5 * |r|^2 below this is an exact fit
};

struct LmResult {
  Eigen::VectorXd x;
  double cost = std::numeric_limits<double>::infinity();  // 0.5 * |r|^2
  int iterations = 0;
  bool converged = false;  // stopped on a tolerance rather than max_iters
};

/**
 * Gauss-Newton with Levenberg damping: solves (J^T J + lambda I) dx = -J^T r,
 * halving lambda after an accepted step and doubling it after a rejected one.
 *
 * `residual(x, r)` fills r and returns false when x is outside the feasible
 * domain; such trial steps are rejected like any cost increase. The Jacobian
 * is formed by central differences.
 */
template <class Residual>
LmResult levenberg_marquardt(Residual&& residual, Eigen::VectorXd x, const LmOptions& opt = {}) {
  const Eigen::Index n = x.size();
  Eigen::VectorXd r;
  LmResult result;
  if (!residual(x, r)) {
    result.x = x;
    return result;
  }
  const Eigen::Index m = r.size();
  double cost = 0.5 * r.squaredNorm();
  double lambda = opt.initial_damping;

  Eigen::MatrixXd jac(m, n);
  Eigen::VectorXd rp(m), rm(m), r_trial(m);
  bool need_jacobian = true;

  auto numeric_jacobian = [&]() -> bool {
    Eigen::VectorXd xp = x;
    for (Eigen::Index k = 0; k < n; ++k) {
      const double xk = x[k];
      xp[k] = xk + opt.fd_step;
      if (!residual(xp, rp)) return false;
      xp[k] = xk - opt.fd_step;
      if (!residual(xp, rm)) return false;
      xp[k] = xk;
      jac.col(k) = (rp - rm) / (2.0 * opt.fd_step);
    }
    return true;
  };

  int it = 0;
  for (; it < opt.max_iters; ++it) {
    if (cost <= opt.cost_tol) {
      result.converged = true;
      break;
    }
    if (need_jacobian) {
      if (!numeric_jacobian()) break;
      need_jacobian = false;
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd grad = jac.transpose() * r;
    if (grad.lpNorm<Eigen::Infinity>() == 0.0) {
      result.converged = true;
      break;
    }
    Eigen::MatrixXd lhs = jtj;
    lhs.diagonal().array() += lambda;
    const Eigen::VectorXd dx = lhs.ldlt().solve(-grad);
    const Eigen::VectorXd x_trial = x + dx;
    if (residual(x_trial, r_trial) && 0.5 * r_trial.squaredNorm() < cost) {
      const bool tiny = dx.norm() <= opt.step_tol * (x.norm() + opt.step_tol);
      x = x_trial;
      r = r_trial;
      cost = 0.5 * r.squaredNorm();
      lambda = std::max(lambda * 0.5, 1e-300);
      need_jacobian = true;
      if (tiny) {
        result.converged = true;
        ++it;
        break;
      }
    } else {
      if (dx.norm() <= opt.step_tol * (x.norm() + opt.step_tol) || lambda > 1e32) {
        // No representable descent step remains.
        result.converged = true;
        break;
      }
      lambda *= 2.0;
    }
  }
  result.x = x;
  result.cost = cost;
  result.iterations = it;
  return result;
}

}  // namespace pdsa

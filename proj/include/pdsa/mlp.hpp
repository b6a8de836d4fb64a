#pragma once

// Six-layer fully connected regressor (16 -> 5 x H ReLU -> 24) with
// hand-written backpropagation and an Adam trainer. Templated on the scalar
// so gradient checks run in double while long training runs may use float.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pdsa/error.hpp"
#include "pdsa/rng.hpp"

namespace pdsa {

inline constexpr int kMlpInputDim = 16;
inline constexpr int kMlpOutputDim = 24;
inline constexpr int kMlpLayers = 6;

template <class Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <class Scalar>
struct MlpParams {
  std::vector<MatrixX<Scalar>> weights;  // layer l: out x in
  std::vector<VectorX<Scalar>> biases;

  std::size_t layers() const { return weights.size(); }

  // Input width followed by every layer's output width.
  std::vector<int> sizes() const {
    std::vector<int> s;
    if (weights.empty()) return s;
    s.push_back(static_cast<int>(weights.front().cols()));
    for (const auto& w : weights) s.push_back(static_cast<int>(w.rows()));
    return s;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < layers(); ++l) n += weights[l].size() + biases[l].size();
    return n;
  }

  static MlpParams zeros(const std::vector<int>& sizes) {
    MlpParams p;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
      p.weights.push_back(MatrixX<Scalar>::Zero(sizes[l + 1], sizes[l]));
      p.biases.push_back(VectorX<Scalar>::Zero(sizes[l + 1]));
    }
    return p;
  }

  // Visits every scalar in serialization order: W_l row-major, then b_l.
  template <class F>
  void for_each(F&& f) {
    for (std::size_t l = 0; l < layers(); ++l) {
      for (Eigen::Index i = 0; i < weights[l].rows(); ++i)
        for (Eigen::Index j = 0; j < weights[l].cols(); ++j) f(weights[l](i, j));
      for (Eigen::Index i = 0; i < biases[l].size(); ++i) f(biases[l][i]);
    }
  }

  bool operator==(const MlpParams& o) const {
    if (layers() != o.layers()) return false;
    for (std::size_t l = 0; l < layers(); ++l)
      if (weights[l] != o.weights[l] || biases[l] != o.biases[l]) return false;
    return true;
  }
};

inline std::vector<int> mlp_layer_sizes(int hidden) {
  std::vector<int> s(kMlpLayers + 1, hidden);
  s.front() = kMlpInputDim;
  s.back() = kMlpOutputDim;
  return s;
}

/// Weights ~ N(0, 1) / sqrt(fan_in), biases zero. Deterministic in seed.
template <class Scalar>
MlpParams<Scalar> init_mlp(std::uint64_t seed, int hidden) {
  if (hidden < 1) throw InputError("hidden width must be at least 1");
  const std::vector<int> sizes = mlp_layer_sizes(hidden);
  auto p = MlpParams<Scalar>::zeros(sizes);
  for (std::size_t l = 0; l < p.layers(); ++l) {
    auto rng = substream(seed, "mlp.init", l);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double scale = 1.0 / std::sqrt(static_cast<double>(sizes[l]));
    auto& w = p.weights[l];
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = static_cast<Scalar>(normal(rng) * scale);
  }
  return p;
}

/// Activations kept for the backward pass. Reused across batches.
template <class Scalar>
struct MlpWorkspace {
  std::vector<MatrixX<Scalar>> pre;   // affine outputs per layer
  std::vector<MatrixX<Scalar>> post;  // post[0] = input, post[l+1] = relu(pre[l]) (last: identity)
  MatrixX<Scalar> delta;
  MatrixX<Scalar> delta_prev;
};

// Batch forward pass; columns of x are samples.
template <class Scalar>
const MatrixX<Scalar>& forward(const MlpParams<Scalar>& p, const MatrixX<Scalar>& x,
                               MlpWorkspace<Scalar>& ws) {
  const std::size_t n = p.layers();
  ws.pre.resize(n);
  ws.post.resize(n + 1);
  ws.post[0] = x;
  for (std::size_t l = 0; l < n; ++l) {
    ws.pre[l].noalias() = p.weights[l] * ws.post[l];
    ws.pre[l].colwise() += p.biases[l];
    if (l + 1 < n)
      ws.post[l + 1] = ws.pre[l].cwiseMax(Scalar(0));
    else
      ws.post[l + 1] = ws.pre[l];
  }
  return ws.post[n];
}

template <class Scalar>
MatrixX<Scalar> forward(const MlpParams<Scalar>& p, const MatrixX<Scalar>& x) {
  MlpWorkspace<Scalar> ws;
  return forward(p, x, ws);
}

template <class Scalar>
VectorX<Scalar> forward(const MlpParams<Scalar>& p, const VectorX<Scalar>& x) {
  MatrixX<Scalar> in = x;
  return forward(p, in).col(0);
}

// Mean squared error over all samples and outputs.
template <class Scalar>
double mse(const MatrixX<Scalar>& prediction, const MatrixX<Scalar>& target) {
  return (prediction.template cast<double>() - target.template cast<double>()).squaredNorm() /
         static_cast<double>(target.size());
}

template <class Scalar>
struct BackwardResult {
  MlpParams<Scalar> grad;
  double loss = 0.0;
};

/**
 * Gradient of mse(forward(p, x), y) with respect to every parameter.
 * `grad` must already have the parameter shapes; it is overwritten.
 */
template <class Scalar>
double backward(const MlpParams<Scalar>& p, const MatrixX<Scalar>& x, const MatrixX<Scalar>& y,
                MlpParams<Scalar>& grad, MlpWorkspace<Scalar>& ws) {
  if (x.cols() == 0) throw InputError("empty batch");
  const std::size_t n = p.layers();
  const MatrixX<Scalar>& out = forward(p, x, ws);
  ws.delta = out - y;
  const double loss = static_cast<double>(ws.delta.template cast<double>().squaredNorm()) /
                      static_cast<double>(y.size());
  ws.delta *= Scalar(2.0 / static_cast<double>(y.size()));
  for (std::size_t l = n; l-- > 0;) {
    grad.weights[l].noalias() = ws.delta * ws.post[l].transpose();
    grad.biases[l] = ws.delta.rowwise().sum();
    if (l == 0) break;
    ws.delta_prev.noalias() = p.weights[l].transpose() * ws.delta;
    ws.delta = ws.delta_prev.cwiseProduct(
        (ws.pre[l - 1].array() > Scalar(0)).template cast<Scalar>().matrix());
  }
  return loss;
}

template <class Scalar>
BackwardResult<Scalar> backward(const MlpParams<Scalar>& p, const MatrixX<Scalar>& x,
                                const MatrixX<Scalar>& y) {
  BackwardResult<Scalar> r{MlpParams<Scalar>::zeros(p.sizes()), 0.0};
  MlpWorkspace<Scalar> ws;
  r.loss = backward(p, x, y, r.grad, ws);
  return r;
}

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <class Scalar>
class Adam {
 public:
  Adam(const MlpParams<Scalar>& like, AdamConfig cfg)
      : cfg_(cfg), m_(MlpParams<Scalar>::zeros(like.sizes())), v_(m_) {}

  void step(MlpParams<Scalar>& p, const MlpParams<Scalar>& g) {
    ++t_;
    const Scalar b1 = Scalar(cfg_.beta1), b2 = Scalar(cfg_.beta2);
    const Scalar c1 = Scalar(1.0 / (1.0 - std::pow(cfg_.beta1, t_)));
    const Scalar c2 = Scalar(1.0 / (1.0 - std::pow(cfg_.beta2, t_)));
    const Scalar lr = Scalar(cfg_.learning_rate), eps = Scalar(cfg_.epsilon);
    auto update = [&](auto& param, auto& m, auto& v, const auto& grad) {
      m.array() = b1 * m.array() + (Scalar(1) - b1) * grad.array();
      v.array() = b2 * v.array() + (Scalar(1) - b2) * grad.array().square();
      param.array() -= lr * (m.array() * c1) / ((v.array() * c2).sqrt() + eps);
    };
    for (std::size_t l = 0; l < p.layers(); ++l) {
      update(p.weights[l], m_.weights[l], v_.weights[l], g.weights[l]);
      update(p.biases[l], m_.biases[l], v_.biases[l], g.biases[l]);
    }
  }

 private:
  AdamConfig cfg_;
  MlpParams<Scalar> m_, v_;
  long t_ = 0;
};

struct EpochLoss {
  double train_mse = 0.0;  // sample-weighted mean of the minibatch losses seen during the epoch
  double val_mse = 0.0;    // full pass over the validation set after the epoch
};

using LossCurve = std::vector<EpochLoss>;

struct OptimizerConfig {
  int hidden = 256;
  double learning_rate = 1e-3;
  int batch_size = 256;
  int epochs = 200;
  std::uint64_t seed = 0;
};

template <class Scalar>
struct TrainResult {
  MlpParams<Scalar> params;
  LossCurve curve;
};

// Columns are samples: x is 16 x N, y is 24 x N.
template <class Scalar>
struct Matrices {
  MatrixX<Scalar> x;
  MatrixX<Scalar> y;

  Eigen::Index size() const { return x.cols(); }
};

template <class Scalar>
double evaluate_mse(const MlpParams<Scalar>& p, const Matrices<Scalar>& data,
                    Eigen::Index chunk = 4096) {
  if (data.size() == 0) return 0.0;
  MlpWorkspace<Scalar> ws;
  double sum = 0.0;
  for (Eigen::Index s = 0; s < data.size(); s += chunk) {
    const Eigen::Index w = std::min(chunk, data.size() - s);
    const MatrixX<Scalar> xb = data.x.middleCols(s, w);
    const auto& out = forward(p, xb, ws);
    sum += (out.template cast<double>() - data.y.middleCols(s, w).template cast<double>())
               .squaredNorm();
  }
  return sum / static_cast<double>(data.y.size());
}

/**
 * Minibatch Adam on the mean squared error. Each epoch visits the training set
 * in a fresh permutation drawn from (seed, epoch). Throws NumericalError on a
 * non-finite loss.
 */
template <class Scalar>
TrainResult<Scalar> train_mlp(const OptimizerConfig& cfg, const Matrices<Scalar>& train,
                              const Matrices<Scalar>& val) {
  if (cfg.batch_size < 1 || cfg.epochs < 0 || !(cfg.learning_rate > 0.0))
    throw InputError("training hyperparameters must be positive");
  if (train.size() == 0) throw InputError("empty training set");
  if (train.x.rows() != kMlpInputDim || train.y.rows() != kMlpOutputDim)
    throw InputError("training matrices must be 16 x N inputs and 24 x N targets");

  TrainResult<Scalar> result{init_mlp<Scalar>(cfg.seed, cfg.hidden), {}};
  auto& params = result.params;
  Adam<Scalar> adam(params, AdamConfig{cfg.learning_rate});
  auto grad = MlpParams<Scalar>::zeros(params.sizes());
  MlpWorkspace<Scalar> ws;

  const Eigen::Index n = train.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  MatrixX<Scalar> xb, yb;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    auto rng = substream(cfg.seed, "mlp.shuffle", static_cast<std::uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), rng);

    double loss_sum = 0.0;
    for (Eigen::Index s = 0; s < n; s += cfg.batch_size) {
      const Eigen::Index w = std::min<Eigen::Index>(cfg.batch_size, n - s);
      xb.resize(train.x.rows(), w);
      yb.resize(train.y.rows(), w);
      for (Eigen::Index k = 0; k < w; ++k) {
        xb.col(k) = train.x.col(order[s + k]);
        yb.col(k) = train.y.col(order[s + k]);
      }
      const double loss = backward(params, xb, yb, grad, ws);
      if (!std::isfinite(loss))
        throw NumericalError("training diverged at epoch " + std::to_string(epoch) +
                             " (non-finite loss)");
      loss_sum += loss * static_cast<double>(w);
      adam.step(params, grad);
    }
    const double val_mse = evaluate_mse(params, val);
    if (!std::isfinite(val_mse))
      throw NumericalError("training diverged at epoch " + std::to_string(epoch) +
                           " (non-finite validation loss)");
    result.curve.push_back({loss_sum / static_cast<double>(n), val_mse});
  }
  return result;
}

}  // namespace pdsa

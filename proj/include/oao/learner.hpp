// Copyright 2026 The OAO Explorer Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file learner.hpp
 *
 * @brief Per-region predictive models and learning progress.
 *
 * A forward model maps [i_enc, action_norm] to the normalized outcome; an
 * inverse model maps [i_enc, outcome_norm] to action_norm. Both are
 * 13 -> 512 -> 5 networks trained with Adam on the MSE.
 *
 * Learning progress of a region with error history e(0..t) and window theta:
 *
 *   gamma(s) = mean(e(s - theta) .. e(s))
 *   LP       = gamma(t - theta) - gamma(t)
 *
 * so a falling error gives a positive LP. Until the history holds
 * 2*theta + 1 entries LP is a large optimistic constant; an exhausted region
 * has LP = -inf.
 */

#ifndef OAO_LEARNER_HPP
#define OAO_LEARNER_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oao/latent.hpp"
#include "oao/nn.hpp"
#include "oao/world.hpp"

namespace oao::learner {

using nn::MatrixXd;
using nn::VectorXd;

inline constexpr int kInputDim = 13;
inline constexpr int kOutputDim = 5;

enum class ModelKind : std::uint8_t { forward = 0, inverse = 1 };

inline const char* to_string(ModelKind k) { return k == ModelKind::forward ? "forward" : "inverse"; }

struct ModelConfig {
  ModelKind kind = ModelKind::forward;
  int hidden = 512;
  nn::Activation hidden_activation = nn::Activation::relu;
  int epochs = 5;
  int batch_size = 32;
  nn::AdamParams optimizer = {};
};

/// 13 -> hidden -> 5. The inverse model has linear (r_hat, phi_hat) heads
/// and sigmoid gripper heads; the forward model is linear on all outputs.
inline nn::DenseNetwork make_model(const ModelConfig& cfg, Rng& rng) {
  nn::LayerSpec out{kOutputDim, nn::Activation::linear, {}};
  if (cfg.kind == ModelKind::inverse) {
    out.unit_activations = {nn::Activation::linear, nn::Activation::linear, nn::Activation::sigmoid,
                            nn::Activation::sigmoid, nn::Activation::sigmoid};
  }
  return nn::DenseNetwork(kInputDim, {{cfg.hidden, cfg.hidden_activation, {}}, out}, rng);
}

/// Inputs (13 x n) and targets (5 x n) of a set of interactions for one
/// model kind. Requires object encodings.
struct Samples {
  MatrixXd inputs;
  MatrixXd targets;

  Eigen::Index size() const { return inputs.cols(); }
};

inline Samples make_samples(std::span<const world::Interaction> data, const latent::OutcomeNormalizer& norm,
                            ModelKind kind) {
  Samples s{MatrixXd(kInputDim, static_cast<Eigen::Index>(data.size())),
            MatrixXd(kOutputDim, static_cast<Eigen::Index>(data.size()))};
  for (std::size_t j = 0; j < data.size(); ++j) {
    const auto& x = data[j];
    if (!x.i_enc) throw nn::ContractError("interaction has no object encoding");
    const auto col = static_cast<Eigen::Index>(j);
    for (int i = 0; i < latent::kObjectDim; ++i) s.inputs(i, col) = (*x.i_enc)[static_cast<std::size_t>(i)];
    const auto a = latent::normalize_action(x.action);
    const auto o = norm.apply(x.outcome);
    const auto& in_tail = kind == ModelKind::forward ? a : o;
    const auto& target = kind == ModelKind::forward ? o : a;
    for (int i = 0; i < kOutputDim; ++i) {
      s.inputs(latent::kObjectDim + i, col) = in_tail[static_cast<std::size_t>(i)];
      s.targets(i, col) = target[static_cast<std::size_t>(i)];
    }
  }
  return s;
}

/// Deterministic forward pass for one input.
inline VectorXd predict(const nn::DenseNetwork& model, const VectorXd& input) { return model.forward(input); }

/// Forward-model prediction from its two input parts.
inline latent::OutcomeVector predict(const nn::DenseNetwork& fm, const std::array<double, 8>& i_enc,
                                     const latent::ActionVector& action) {
  VectorXd in(kInputDim);
  for (int i = 0; i < 8; ++i) in[i] = i_enc[static_cast<std::size_t>(i)];
  for (int i = 0; i < kOutputDim; ++i) in[8 + i] = action[static_cast<std::size_t>(i)];
  const VectorXd out = fm.forward(in);
  latent::OutcomeVector o{};
  for (int i = 0; i < kOutputDim; ++i) o[static_cast<std::size_t>(i)] = out[i];
  return o;
}

/// Mean squared error over the 5 components, one value per column.
inline VectorXd per_item_mse(const MatrixXd& prediction, const MatrixXd& target) {
  return (prediction - target).array().square().colwise().mean().transpose();
}

/// MSE between a predicted and the true normalized action.
inline double inverse_error(const latent::ActionVector& predicted, const latent::ActionVector& truth) {
  double s = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) s += (predicted[i] - truth[i]) * (predicted[i] - truth[i]);
  return s / static_cast<double>(predicted.size());
}

inline double inverse_error(const nn::DenseNetwork& im, const world::Interaction& x,
                            const latent::OutcomeNormalizer& norm) {
  const auto s = make_samples(std::span(&x, 1), norm, ModelKind::inverse);
  return per_item_mse(im.forward_batch(s.inputs), s.targets)[0];
}

// ---------------------------------------------------------------------------
// Learning progress

struct LpConfig {
  int theta = 16;
  double optimistic_lp = 1e6;
};

/// Mean of the theta + 1 entries ending at index t; nullopt when the
/// history does not reach back to t - theta.
inline std::optional<double> mean_error(std::span<const double> history, std::size_t t, int theta) {
  if (theta < 0 || t >= history.size() || t < static_cast<std::size_t>(theta)) return std::nullopt;
  double s = 0.0;
  for (std::size_t i = t - static_cast<std::size_t>(theta); i <= t; ++i) s += history[i];
  return s / static_cast<double>(theta + 1);
}

inline double learning_progress(std::span<const double> history, bool exhausted, const LpConfig& cfg) {
  if (cfg.theta < 1) throw nn::ContractError("theta must be >= 1");
  if (exhausted) return -std::numeric_limits<double>::infinity();
  const auto theta = static_cast<std::size_t>(cfg.theta);
  if (history.size() < 2 * theta + 1) return cfg.optimistic_lp;
  const std::size_t t = history.size() - 1;
  return *mean_error(history, t - theta, cfg.theta) - *mean_error(history, t, cfg.theta);
}

// ---------------------------------------------------------------------------
// Region state

/// One region: its candidate pool and accumulated training set (indices into
/// a shared candidate set), its model and its error history.
struct RegionState {
  int id = 0;
  std::vector<std::size_t> pool;
  std::vector<std::size_t> train;
  nn::DenseNetwork model;
  nn::Optimizer optimizer = nn::Optimizer::adam(nn::DenseNetwork{});
  std::vector<double> error_history;
  bool exhausted = false;

  RegionState() = default;
  RegionState(int region, const ModelConfig& cfg, Rng& rng)
      : id(region), model(make_model(cfg, rng)), optimizer(nn::Optimizer::adam(model, cfg.optimizer)) {}

  double learning_progress(const LpConfig& cfg) const {
    return learner::learning_progress(error_history, exhausted, cfg);
  }

  /// Moves up to `count` uniformly drawn pool entries into the training
  /// set; marks the region exhausted when the pool empties. Returns the
  /// number moved.
  std::size_t draw(std::size_t count, Rng& rng) {
    const std::size_t take = std::min(count, pool.size());
    for (std::size_t i = 0; i < take; ++i) {
      const std::size_t j = i + uniform_index(rng, pool.size() - i);
      std::swap(pool[i], pool[j]);
    }
    train.insert(train.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take));
    pool.erase(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take));
    if (pool.empty()) exhausted = true;
    return take;
  }
};

/// Trains the region's model for `cfg.epochs` shuffled passes over its
/// training set in mini-batches, then appends and returns the mean MSE over
/// the training set.
inline double train_region(RegionState& rs, const Samples& samples, const ModelConfig& cfg, Rng& rng) {
  if (rs.train.empty()) throw nn::ContractError("region " + std::to_string(rs.id) + " has an empty training set");
  const auto n = static_cast<Eigen::Index>(rs.train.size());
  MatrixXd x(kInputDim, n), y(kOutputDim, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    x.col(j) = samples.inputs.col(static_cast<Eigen::Index>(rs.train[static_cast<std::size_t>(j)]));
    y.col(j) = samples.targets.col(static_cast<Eigen::Index>(rs.train[static_cast<std::size_t>(j)]));
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  MatrixXd bx, by;
  try {
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng);
      for (Eigen::Index start = 0; start < n; start += cfg.batch_size) {
        const Eigen::Index len = std::min<Eigen::Index>(cfg.batch_size, n - start);
        bx.resize(kInputDim, len);
        by.resize(kOutputDim, len);
        for (Eigen::Index j = 0; j < len; ++j) {
          bx.col(j) = x.col(order[static_cast<std::size_t>(start + j)]);
          by.col(j) = y.col(order[static_cast<std::size_t>(start + j)]);
        }
        nn::train_batch(rs.model, rs.optimizer, bx, by, nn::LossKind::mse);
      }
    }
  } catch (const nn::NumericError& e) {
    throw nn::NumericError("region " + std::to_string(rs.id) + ": " + e.what(), e.layer());
  }
  const double e_n = nn::loss_value(rs.model.forward_batch(x), y, nn::LossKind::mse);
  if (!std::isfinite(e_n)) throw nn::NumericError("region " + std::to_string(rs.id) + ": non-finite error", 1);
  rs.error_history.push_back(e_n);
  return e_n;
}

}  // namespace oao::learner

#endif  // OAO_LEARNER_HPP

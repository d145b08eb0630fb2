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
 * @file nn.hpp
 *
 * @brief Small dense feed-forward network engine.
 *
 * Networks are stacks of affine layers, each followed by an element-wise
 * activation. Batches are column-major: every column of an input matrix is
 * one sample. Backpropagation is written out by hand for the four
 * supported activations; derivatives are evaluated from the post-activation
 * values stored on the tape.
 *
 * All arithmetic is double precision.
 */

#ifndef OAO_NN_HPP
#define OAO_NN_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "oao/io.hpp"
#include "oao/rng.hpp"

namespace oao::nn {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class Activation : std::uint8_t { relu = 0, sigmoid = 1, tanh = 2, linear = 3 };

enum class LossKind { mse, bce };

inline const char* to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
    case Activation::tanh: return "tanh";
    case Activation::linear: return "linear";
  }
  return "?";
}

/// Violated precondition (shape mismatch, out-of-domain target, ...).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A loss, gradient or parameter became non-finite.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, int layer)
      : std::runtime_error(what + " (layer " + std::to_string(layer) + ")"), layer_(layer) {}
  int layer() const { return layer_; }

 private:
  int layer_;
};

inline constexpr double kBceClamp = 1e-7;

// ---------------------------------------------------------------------------
// Layers

/// Construction-time description of one layer. `unit_activations`, when
/// non-empty, overrides `activation` per output unit (mixed output heads).
struct LayerSpec {
  int units = 0;
  Activation activation = Activation::linear;
  std::vector<Activation> unit_activations = {};
};

struct DenseLayer {
  MatrixXd weight;  // out x in
  VectorXd bias;    // out
  /// Either one entry (applies to every unit) or one entry per unit.
  std::vector<Activation> activations{Activation::linear};

  int in_dim() const { return static_cast<int>(weight.cols()); }
  int out_dim() const { return static_cast<int>(weight.rows()); }
  bool uniform() const { return activations.size() == 1; }
  Activation activation(int unit) const { return uniform() ? activations[0] : activations[unit]; }
};

struct LayerGradient {
  MatrixXd weight;
  VectorXd bias;
};

struct Gradients {
  std::vector<LayerGradient> layers;
  MatrixXd input;  // d loss / d input, one column per sample
};

namespace detail {

template <typename Matrix>
void apply_activation(Activation a, Matrix& z) {
  using S = typename Matrix::Scalar;
  switch (a) {
    case Activation::relu: z = z.cwiseMax(S(0)); break;
    case Activation::sigmoid: z = (S(1) + (-z.array()).exp()).inverse().matrix(); break;
    case Activation::tanh: z = z.array().tanh().matrix(); break;
    case Activation::linear: break;
  }
}

/// Multiplies `grad` in place by the activation derivative, expressed in
/// terms of the activation output `a`.
inline void apply_derivative(Activation act, const MatrixXd& a, MatrixXd& grad) {
  switch (act) {
    case Activation::relu: grad = (a.array() > 0.0).select(grad, 0.0); break;
    case Activation::sigmoid: grad.array() *= a.array() * (1.0 - a.array()); break;
    case Activation::tanh: grad.array() *= 1.0 - a.array().square(); break;
    case Activation::linear: break;
  }
}

template <typename Matrix>
void activate(const DenseLayer& layer, Matrix& z) {
  if (layer.uniform()) {
    apply_activation(layer.activations[0], z);
    return;
  }
  for (int r = 0; r < z.rows(); ++r) {
    Matrix row = z.row(r);
    apply_activation(layer.activations[r], row);
    z.row(r) = row;
  }
}

inline void derivative(const DenseLayer& layer, const MatrixXd& a, MatrixXd& grad) {
  if (layer.uniform()) {
    apply_derivative(layer.activations[0], a, grad);
    return;
  }
  for (int r = 0; r < a.rows(); ++r) {
    MatrixXd ar = a.row(r);
    MatrixXd gr = grad.row(r);
    apply_derivative(layer.activations[r], ar, gr);
    grad.row(r) = gr;
  }
}

}  // namespace detail

/// Values retained by a forward pass for the backward pass.
struct Tape {
  /// outputs[0] is the input batch; outputs[i] is the post-activation output of layer i-1.
  std::vector<MatrixXd> outputs;
};

// ---------------------------------------------------------------------------
// Network

class DenseNetwork {
 public:
  DenseNetwork() = default;

  /// Scaled-uniform initialization: W ~ U[-sqrt(6/(in+out)), +sqrt(6/(in+out))], b = 0.
  DenseNetwork(int input_dim, const std::vector<LayerSpec>& specs, Rng& rng) {
    if (input_dim <= 0 || specs.empty()) throw ContractError("network needs input_dim > 0 and at least one layer");
    int in = input_dim;
    for (const auto& spec : specs) {
      if (spec.units <= 0) throw ContractError("layer with non-positive width");
      DenseLayer layer;
      const double limit = std::sqrt(6.0 / static_cast<double>(in + spec.units));
      layer.weight.resize(spec.units, in);
      std::uniform_real_distribution<double> dist(-limit, limit);
      // Row-major fill order so the draw sequence does not depend on storage order.
      for (int r = 0; r < spec.units; ++r)
        for (int c = 0; c < in; ++c) layer.weight(r, c) = dist(rng);
      layer.bias = VectorXd::Zero(spec.units);
      if (spec.unit_activations.empty()) {
        layer.activations = {spec.activation};
      } else {
        if (static_cast<int>(spec.unit_activations.size()) != spec.units)
          throw ContractError("per-unit activation list does not match layer width");
        layer.activations = spec.unit_activations;
      }
      layers_.push_back(std::move(layer));
      in = spec.units;
    }
  }

  explicit DenseNetwork(std::vector<DenseLayer> layers) : layers_(std::move(layers)) { validate(); }

  int input_dim() const { return layers_.empty() ? 0 : layers_.front().in_dim(); }
  int output_dim() const { return layers_.empty() ? 0 : layers_.back().out_dim(); }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
    return n;
  }

  /// Index of the first layer holding a non-finite parameter, if any.
  std::optional<int> first_non_finite_layer() const {
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      if (!layers_[i].weight.allFinite() || !layers_[i].bias.allFinite()) return static_cast<int>(i);
    }
    return std::nullopt;
  }

  VectorXd forward(const VectorXd& input) const {
    if (input.size() != input_dim()) {
      throw ContractError("input length " + std::to_string(input.size()) + " != network input_dim " +
                          std::to_string(input_dim()));
    }
    MatrixXd x = input;
    return forward_batch(x).col(0);
  }

  MatrixXd forward_batch(const MatrixXd& inputs) const {
    check_input(inputs);
    MatrixXd a = inputs;
    for (const auto& layer : layers_) {
      MatrixXd z = layer.weight * a;
      z.colwise() += layer.bias;
      detail::activate(layer, z);
      a = std::move(z);
    }
    return a;
  }

  /// Forward pass evaluated in another scalar type. Used with long double
  /// for finite-difference reference losses in gradient checks.
  template <typename Scalar>
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> forward_as(
      const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& inputs) const {
    if (layers_.empty()) throw ContractError("empty network");
    if (inputs.rows() != input_dim()) throw ContractError("input rows do not match network input_dim");
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> a = inputs;
    for (const auto& layer : layers_) {
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> z = layer.weight.cast<Scalar>() * a;
      z.colwise() += layer.bias.cast<Scalar>();
      detail::activate(layer, z);
      a = std::move(z);
    }
    return a;
  }

  const MatrixXd& forward_batch(const MatrixXd& inputs, Tape& tape) const {
    check_input(inputs);
    tape.outputs.resize(layers_.size() + 1);
    tape.outputs[0] = inputs;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      const auto& layer = layers_[i];
      MatrixXd& z = tape.outputs[i + 1];
      z.noalias() = layer.weight * tape.outputs[i];
      z.colwise() += layer.bias;
      detail::activate(layer, z);
    }
    return tape.outputs.back();
  }

  /// Backpropagates `output_grad` (d loss / d network output, per column)
  /// through the tape of the most recent forward pass.
  Gradients backward(const Tape& tape, const MatrixXd& output_grad) const {
    if (tape.outputs.size() != layers_.size() + 1) throw ContractError("tape does not belong to this network");
    if (output_grad.rows() != output_dim() || output_grad.cols() != tape.outputs.back().cols()) {
      throw ContractError("output gradient shape mismatch");
    }
    Gradients g;
    g.layers.resize(layers_.size());
    MatrixXd delta = output_grad;
    for (int i = static_cast<int>(layers_.size()) - 1; i >= 0; --i) {
      const auto& layer = layers_[i];
      detail::derivative(layer, tape.outputs[i + 1], delta);
      g.layers[i].weight.noalias() = delta * tape.outputs[i].transpose();
      g.layers[i].bias = delta.rowwise().sum();
      MatrixXd prev = layer.weight.transpose() * delta;
      delta = std::move(prev);
    }
    g.input = std::move(delta);
    return g;
  }

 private:
  void validate() const {
    if (layers_.empty()) throw ContractError("network has no layers");
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      const auto& l = layers_[i];
      if (l.bias.size() != l.out_dim()) throw ContractError("bias length mismatch in layer " + std::to_string(i));
      if (!(l.activations.size() == 1 || static_cast<int>(l.activations.size()) == l.out_dim()))
        throw ContractError("activation list mismatch in layer " + std::to_string(i));
      if (i > 0 && layers_[i - 1].out_dim() != l.in_dim())
        throw ContractError("layer " + std::to_string(i) + " input does not chain with previous output");
    }
  }

  void check_input(const MatrixXd& inputs) const {
    if (layers_.empty()) throw ContractError("empty network");
    if (inputs.rows() != input_dim()) {
      throw ContractError("input rows " + std::to_string(inputs.rows()) + " != network input_dim " +
                          std::to_string(input_dim()));
    }
  }

  std::vector<DenseLayer> layers_;
};

// ---------------------------------------------------------------------------
// Losses. Both are means over every element of the batch (components and
// samples), so learning rates do not depend on the batch size.

inline void check_bce_domain(const MatrixXd& prediction, const MatrixXd& target) {
  if ((target.array() < 0.0).any() || (target.array() > 1.0).any() || !target.allFinite())
    throw ContractError("bce target outside [0,1]");
  if ((prediction.array() < 0.0).any() || (prediction.array() > 1.0).any())
    throw ContractError("bce prediction outside [0,1]; a sigmoid output layer is required");
}

inline double loss_value(const MatrixXd& prediction, const MatrixXd& target, LossKind kind) {
  if (prediction.rows() != target.rows() || prediction.cols() != target.cols())
    throw ContractError("prediction/target shape mismatch");
  const double n = static_cast<double>(prediction.size());
  if (kind == LossKind::mse) return (prediction - target).squaredNorm() / n;
  check_bce_domain(prediction, target);
  const auto p = prediction.array().max(kBceClamp).min(1.0 - kBceClamp);
  const auto t = target.array();
  return -(t * p.log() + (1.0 - t) * (1.0 - p).log()).sum() / n;
}

/// `loss_value` in another scalar type; no domain checks.
template <typename Scalar>
Scalar loss_value_as(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& prediction,
                     const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& target, LossKind kind) {
  const auto n = static_cast<Scalar>(prediction.size());
  if (kind == LossKind::mse) return (prediction - target).squaredNorm() / n;
  const Scalar lo = static_cast<Scalar>(kBceClamp);
  const auto p = prediction.array().max(lo).min(Scalar(1) - lo);
  const auto t = target.array();
  return -(t * p.log() + (Scalar(1) - t) * (Scalar(1) - p).log()).sum() / n;
}

/// d loss / d prediction. Clamped BCE predictions get zero gradient.
inline MatrixXd loss_gradient(const MatrixXd& prediction, const MatrixXd& target, LossKind kind) {
  const double n = static_cast<double>(prediction.size());
  if (kind == LossKind::mse) return 2.0 * (prediction - target) / n;
  check_bce_domain(prediction, target);
  MatrixXd g(prediction.rows(), prediction.cols());
  for (Eigen::Index j = 0; j < prediction.cols(); ++j) {
    for (Eigen::Index i = 0; i < prediction.rows(); ++i) {
      const double p = prediction(i, j);
      if (p < kBceClamp || p > 1.0 - kBceClamp) {
        g(i, j) = 0.0;
      } else {
        g(i, j) = (p - target(i, j)) / (p * (1.0 - p)) / n;
      }
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Optimizers

enum class OptimizerKind { adam, adadelta, sgd };

struct AdamParams {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdadeltaParams {
  double rho = 0.95;
  double epsilon = 1e-6;
  double learning_rate = 1.0;
};

struct SgdParams {
  double learning_rate = 0.01;
};

class Optimizer {
 public:
  static Optimizer adam(const DenseNetwork& net, AdamParams p = {}) {
    Optimizer o(OptimizerKind::adam, net);
    o.adam_ = p;
    return o;
  }
  static Optimizer adadelta(const DenseNetwork& net, AdadeltaParams p = {}) {
    Optimizer o(OptimizerKind::adadelta, net);
    o.adadelta_ = p;
    return o;
  }
  static Optimizer sgd(const DenseNetwork& net, SgdParams p = {}) {
    Optimizer o(OptimizerKind::sgd, net);
    o.sgd_ = p;
    return o;
  }

  OptimizerKind kind() const { return kind_; }
  std::uint64_t step_count() const { return steps_; }
  const AdamParams& adam_params() const { return adam_; }

  /// Applies one update. Throws NumericError if a parameter of some layer
  /// becomes non-finite.
  void step(DenseNetwork& net, const Gradients& grads) {
    auto& layers = net.layers();
    if (grads.layers.size() != layers.size() || first_.size() != layers.size())
      throw ContractError("gradient/optimizer shape does not match network");
    ++steps_;
    for (std::size_t i = 0; i < layers.size(); ++i) {
      update(layers[i].weight, grads.layers[i].weight, first_[i].weight, second_[i].weight);
      update(layers[i].bias, grads.layers[i].bias, first_[i].bias, second_[i].bias);
    }
    if (auto bad = net.first_non_finite_layer()) throw NumericError("non-finite parameter after update", *bad);
  }

 private:
  Optimizer(OptimizerKind kind, const DenseNetwork& net) : kind_(kind) {
    for (const auto& l : net.layers()) {
      LayerGradient z{MatrixXd::Zero(l.weight.rows(), l.weight.cols()), VectorXd::Zero(l.bias.size())};
      first_.push_back(z);
      second_.push_back(z);
    }
  }

  template <typename P, typename G>
  void update(P& param, const G& grad, P& acc1, P& acc2) {
    switch (kind_) {
      case OptimizerKind::sgd:
        param -= sgd_.learning_rate * grad;
        break;
      case OptimizerKind::adam: {
        const double t = static_cast<double>(steps_);
        acc1 = adam_.beta1 * acc1 + (1.0 - adam_.beta1) * grad;
        acc2 = adam_.beta2 * acc2 + (1.0 - adam_.beta2) * grad.cwiseAbs2();
        const double c1 = 1.0 - std::pow(adam_.beta1, t);
        const double c2 = 1.0 - std::pow(adam_.beta2, t);
        param.array() -= adam_.learning_rate * (acc1.array() / c1) / ((acc2.array() / c2).sqrt() + adam_.epsilon);
        break;
      }
      case OptimizerKind::adadelta: {
        // acc1: running E[g^2]; acc2: running E[dx^2].
        const double rho = adadelta_.rho, eps = adadelta_.epsilon;
        acc1 = rho * acc1 + (1.0 - rho) * grad.cwiseAbs2();
        P dx = (-((acc2.array() + eps).sqrt() / (acc1.array() + eps).sqrt()) * grad.array()).matrix();
        acc2 = rho * acc2 + (1.0 - rho) * dx.cwiseAbs2();
        param += adadelta_.learning_rate * dx;
        break;
      }
    }
  }

  OptimizerKind kind_;
  std::uint64_t steps_ = 0;
  AdamParams adam_{};
  AdadeltaParams adadelta_{};
  SgdParams sgd_{};
  std::vector<LayerGradient> first_;
  std::vector<LayerGradient> second_;
};

// ---------------------------------------------------------------------------
// Training

namespace detail {

inline void check_gradients(const Gradients& g) {
  for (std::size_t i = 0; i < g.layers.size(); ++i) {
    if (!g.layers[i].weight.allFinite() || !g.layers[i].bias.allFinite())
      throw NumericError("non-finite gradient", static_cast<int>(i));
  }
}

}  // namespace detail

/// One optimizer step on the mean gradient of the batch. Returns the
/// pre-update mean loss.
inline double train_batch(DenseNetwork& net, Optimizer& opt, const MatrixXd& inputs, const MatrixXd& targets,
                          LossKind loss) {
  if (inputs.cols() == 0) throw ContractError("empty batch");
  if (inputs.cols() != targets.cols() || targets.rows() != net.output_dim())
    throw ContractError("inputs/targets shape mismatch");
  Tape tape;
  const MatrixXd& out = net.forward_batch(inputs, tape);
  const double value = loss_value(out, targets, loss);
  const int last = static_cast<int>(net.layers().size()) - 1;
  if (!std::isfinite(value)) throw NumericError("non-finite loss", last);
  Gradients g = net.backward(tape, loss_gradient(out, targets, loss));
  detail::check_gradients(g);
  opt.step(net, g);
  return value;
}

inline double train_batch(DenseNetwork& net, Optimizer& opt, std::span<const VectorXd> inputs,
                          std::span<const VectorXd> targets, LossKind loss) {
  if (inputs.empty() || inputs.size() != targets.size()) throw ContractError("batch size mismatch");
  MatrixXd x(inputs.front().size(), static_cast<Eigen::Index>(inputs.size()));
  MatrixXd y(targets.front().size(), static_cast<Eigen::Index>(targets.size()));
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].size() != x.rows() || targets[i].size() != y.rows()) throw ContractError("ragged batch");
    x.col(static_cast<Eigen::Index>(i)) = inputs[i];
    y.col(static_cast<Eigen::Index>(i)) = targets[i];
  }
  return train_batch(net, opt, x, y, loss);
}

// ---------------------------------------------------------------------------
// Gradient checking

/// Mutable view of every parameter of a set of networks, in a fixed order.
class ParameterView {
 public:
  explicit ParameterView(std::vector<DenseNetwork*> nets) {
    for (std::size_t n = 0; n < nets.size(); ++n) {
      for (auto& layer : nets[n]->layers()) {
        for (Eigen::Index i = 0; i < layer.weight.size(); ++i) params_.push_back(layer.weight.data() + i);
        for (Eigen::Index i = 0; i < layer.bias.size(); ++i) params_.push_back(layer.bias.data() + i);
      }
    }
  }

  std::size_t size() const { return params_.size(); }
  double& operator[](std::size_t i) { return *params_[i]; }

  static std::vector<double> flatten(const std::vector<Gradients>& grads) {
    std::vector<double> out;
    for (const auto& g : grads) {
      for (const auto& l : g.layers) {
        out.insert(out.end(), l.weight.data(), l.weight.data() + l.weight.size());
        out.insert(out.end(), l.bias.data(), l.bias.data() + l.bias.size());
      }
    }
    return out;
  }

 private:
  std::vector<double*> params_;
};

struct GradCheckOptions {
  double step = 1e-5;
  /// 0 checks every parameter; otherwise at most this many, sampled
  /// uniformly (used for the 1024-pixel autoencoder).
  std::size_t max_parameters = 0;
  std::uint64_t seed = 0;
};

inline double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1e-8, std::abs(analytic) + std::abs(numeric));
}

/// Compares `analytic` (flattened in ParameterView order) with central
/// differences of `loss`. Returns the maximum relative error. `loss` is
/// evaluated in extended precision: in double, one ulp of an O(10) loss over
/// 2 * step is ~1e-10, which swamps gradients near 1e-7.
inline double grad_check_generic(ParameterView params, const std::function<long double()>& loss,
                                 const std::vector<double>& analytic, const GradCheckOptions& opts = {}) {
  if (analytic.size() != params.size()) throw ContractError("analytic gradient size mismatch");
  std::vector<std::size_t> indices(params.size());
  for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
  if (opts.max_parameters != 0 && opts.max_parameters < indices.size()) {
    Rng rng(opts.seed);
    std::shuffle(indices.begin(), indices.end(), rng);
    indices.resize(opts.max_parameters);
    std::sort(indices.begin(), indices.end());
  }
  double worst = 0.0;
  for (std::size_t i : indices) {
    double& p = params[i];
    const double saved = p;
    p = saved + opts.step;
    const long double up = loss();
    p = saved - opts.step;
    const long double down = loss();
    p = saved;
    const double numeric = static_cast<double>((up - down) / (2.0L * opts.step));
    worst = std::max(worst, relative_error(analytic[i], numeric));
  }
  return worst;
}

/// Smallest |pre-activation| over the relu units of `net` on a batch of
/// inputs. A central difference with step h straddles a relu kink, and so
/// measures no derivative, when this falls below about h * max|input|.
inline double min_relu_margin(const DenseNetwork& net, const MatrixXd& inputs) {
  double margin = std::numeric_limits<double>::infinity();
  MatrixXd a = inputs;
  for (const auto& layer : net.layers()) {
    MatrixXd z = layer.weight * a;
    z.colwise() += layer.bias;
    for (int r = 0; r < z.rows(); ++r)
      if (layer.activation(r) == Activation::relu) margin = std::min(margin, z.row(r).cwiseAbs().minCoeff());
    detail::activate(layer, z);
    a = std::move(z);
  }
  return margin;
}

/// Gradient check of a single network on one (input, target) pair.
inline double grad_check(DenseNetwork& net, const VectorXd& input, const VectorXd& target, LossKind loss,
                         const GradCheckOptions& opts = {}) {
  const MatrixXd x = input;
  const MatrixXd y = target;
  Tape tape;
  const MatrixXd& out = net.forward_batch(x, tape);
  Gradients g = net.backward(tape, loss_gradient(out, y, loss));
  auto analytic = ParameterView::flatten({g});
  using MatrixXe = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  const MatrixXe xe = x.cast<long double>();
  const MatrixXe ye = y.cast<long double>();
  auto f = [&] { return loss_value_as<long double>(net.forward_as<long double>(xe), ye, loss); };
  return grad_check_generic(ParameterView({&net}), f, analytic, opts);
}

// ---------------------------------------------------------------------------

/// Reparameterized draw mu + exp(logvar / 2) * noise.
inline VectorXd sample_gaussian(const VectorXd& mu, const VectorXd& logvar, const VectorXd& noise) {
  if (mu.size() != logvar.size() || mu.size() != noise.size())
    throw ContractError("sample_gaussian: length mismatch");
  return mu.array() + (0.5 * logvar.array()).exp() * noise.array();
}

// ---------------------------------------------------------------------------
// Model file format "OAO1" (all integers and floats little-endian):
//   magic "OAO1", u32 layer_count, then per layer:
//     u32 in_dim, u32 out_dim, u32 activation_count (1 or out_dim),
//     activation_count x u8 activation code (relu 0, sigmoid 1, tanh 2, linear 3),
//     out_dim*in_dim x f64 weights (row-major), out_dim x f64 bias.

inline void save(std::ostream& out, const DenseNetwork& net) {
  io::write_magic(out, "OAO1");
  io::write_u32(out, static_cast<std::uint32_t>(net.layers().size()));
  for (const auto& l : net.layers()) {
    io::write_u32(out, static_cast<std::uint32_t>(l.in_dim()));
    io::write_u32(out, static_cast<std::uint32_t>(l.out_dim()));
    io::write_u32(out, static_cast<std::uint32_t>(l.activations.size()));
    for (auto a : l.activations) io::write_u8(out, static_cast<std::uint8_t>(a));
    for (int r = 0; r < l.out_dim(); ++r)
      for (int c = 0; c < l.in_dim(); ++c) io::write_f64(out, l.weight(r, c));
    for (int r = 0; r < l.out_dim(); ++r) io::write_f64(out, l.bias(r));
  }
}

inline DenseNetwork load(std::istream& in) {
  io::expect_magic(in, "OAO1");
  const auto count = io::read_u32(in);
  std::vector<DenseLayer> layers(count);
  for (auto& l : layers) {
    const auto in_dim = io::read_u32(in);
    const auto out_dim = io::read_u32(in);
    const auto acts = io::read_u32(in);
    if (acts != 1 && acts != out_dim) throw io::FormatError("bad activation count");
    l.activations.resize(acts);
    for (auto& a : l.activations) {
      auto code = io::read_u8(in);
      if (code > 3) throw io::FormatError("bad activation code");
      a = static_cast<Activation>(code);
    }
    l.weight.resize(out_dim, in_dim);
    l.bias.resize(out_dim);
    for (std::uint32_t r = 0; r < out_dim; ++r)
      for (std::uint32_t c = 0; c < in_dim; ++c) l.weight(r, c) = io::read_f64(in);
    for (std::uint32_t r = 0; r < out_dim; ++r) l.bias(r) = io::read_f64(in);
  }
  return DenseNetwork(std::move(layers));
}

}  // namespace oao::nn

#endif  // OAO_NN_HPP

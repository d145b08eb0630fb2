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
 * @file latent.hpp
 *
 * @brief Blended object/action/outcome features and their 3-D embeddings.
 *
 * A blended feature concatenates the 8-D object code, the normalized 5-D
 * action and the min-max scaled 5-D outcome; every component lies in
 * [0,1]. The variational autoencoder (18 -> 9 -> 2x3, decoder 3 -> 9 -> 18)
 * embeds it by the posterior mean. A deterministic tanh autoencoder with the
 * same 3-D code is provided as an alternative embedding.
 */

#ifndef OAO_LATENT_HPP
#define OAO_LATENT_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "oao/io.hpp"
#include "oao/nn.hpp"
#include "oao/perception.hpp"
#include "oao/world.hpp"

namespace oao::latent {

using nn::MatrixXd;
using nn::VectorXd;

inline constexpr int kObjectDim = 8;
inline constexpr int kActionDim = 5;
inline constexpr int kOutcomeDim = 5;
inline constexpr int kBlendedDim = kObjectDim + kActionDim + kOutcomeDim;
inline constexpr int kLatentDim = 3;

using ActionVector = std::array<double, kActionDim>;
using OutcomeVector = std::array<double, kOutcomeDim>;
using BlendedFeature = std::array<double, kBlendedDim>;

/// (r_hat, phi_hat, closed, half_open, open) with r_hat = (r - 26) / 5 and
/// phi_hat = phi / 2pi.
inline ActionVector normalize_action(const world::ActionSpec& a) {
  const auto g = a.gripper_one_hot();
  return {(a.r_path - world::ActionSpec::kRadiusMin) / (world::ActionSpec::kRadiusMax - world::ActionSpec::kRadiusMin),
          a.phi_path / world::kTwoPi, g[0], g[1], g[2]};
}

/// Per-component min-max scaling of outcomes, fitted on one set and
/// clamped to [0,1] when applied elsewhere.
class OutcomeNormalizer {
 public:
  OutcomeNormalizer() {
    min_.fill(0.0);
    max_.fill(1.0);
  }
  OutcomeNormalizer(OutcomeVector min, OutcomeVector max) : min_(min), max_(max) {}

  static OutcomeNormalizer fit(std::span<const world::Interaction> data) {
    if (data.empty()) throw nn::ContractError("cannot fit outcome normalizer on an empty set");
    OutcomeVector lo, hi;
    lo.fill(INFINITY);
    hi.fill(-INFINITY);
    for (const auto& x : data) {
      const auto o = x.outcome.as_array();
      for (int i = 0; i < kOutcomeDim; ++i) {
        lo[i] = std::min(lo[i], o[i]);
        hi[i] = std::max(hi[i], o[i]);
      }
    }
    return {lo, hi};
  }

  /// True when some component had max <= min on the fitting set; such a
  /// component always maps to 0.5.
  bool degenerate(int component) const { return !(max_[component] > min_[component]); }
  bool any_degenerate() const {
    for (int i = 0; i < kOutcomeDim; ++i)
      if (degenerate(i)) return true;
    return false;
  }

  OutcomeVector apply(const world::Outcome& o) const {
    const auto v = o.as_array();
    OutcomeVector out{};
    for (int i = 0; i < kOutcomeDim; ++i) {
      out[i] = degenerate(i) ? 0.5 : std::clamp((v[i] - min_[i]) / (max_[i] - min_[i]), 0.0, 1.0);
    }
    return out;
  }

  /// Maps a normalized outcome back to physical units.
  OutcomeVector invert(const OutcomeVector& n) const {
    OutcomeVector out{};
    for (int i = 0; i < kOutcomeDim; ++i) out[i] = min_[i] + n[i] * (max_[i] - min_[i]);
    return out;
  }

  const OutcomeVector& min() const { return min_; }
  const OutcomeVector& max() const { return max_; }

  /// Plain key-value text: min_<i> and max_<i> for i in 0..4, shortest
  /// round-trip decimal form.
  void save(std::ostream& out) const {
    io::KeyValues kv;
    for (int i = 0; i < kOutcomeDim; ++i) {
      kv["min_" + std::to_string(i)] = io::format_double(min_[i]);
      kv["max_" + std::to_string(i)] = io::format_double(max_[i]);
    }
    io::write_key_values(out, kv);
  }

  static OutcomeNormalizer load(std::istream& in) {
    auto kv = io::parse_key_values(in);
    OutcomeVector lo{}, hi{};
    for (int i = 0; i < kOutcomeDim; ++i) {
      auto a = kv.find("min_" + std::to_string(i));
      auto b = kv.find("max_" + std::to_string(i));
      if (a == kv.end() || b == kv.end()) throw io::FormatError("normalizer file misses component " + std::to_string(i));
      lo[i] = io::parse_double(a->second);
      hi[i] = io::parse_double(b->second);
    }
    return {lo, hi};
  }

 private:
  OutcomeVector min_{};
  OutcomeVector max_{};
};

inline OutcomeVector normalize_outcome(const world::Outcome& o, const OutcomeNormalizer& norm) {
  return norm.apply(o);
}

/// concat(i_enc, action_norm, outcome_norm). Requires `x.i_enc`.
inline BlendedFeature build_feature(const world::Interaction& x, const OutcomeNormalizer& norm) {
  if (!x.i_enc) throw nn::ContractError("interaction has no object encoding");
  BlendedFeature f{};
  std::copy(x.i_enc->begin(), x.i_enc->end(), f.begin());
  const auto a = normalize_action(x.action);
  std::copy(a.begin(), a.end(), f.begin() + kObjectDim);
  const auto o = norm.apply(x.outcome);
  std::copy(o.begin(), o.end(), f.begin() + kObjectDim + kActionDim);
  for (auto& v : f) v = std::clamp(v, 0.0, 1.0);
  return f;
}

/// Encodes the object when `x.i_enc` is unset.
inline BlendedFeature build_feature(const world::Interaction& x, const perception::ObjectEncoder& enc,
                                    const OutcomeNormalizer& norm) {
  if (x.i_enc) return build_feature(x, norm);
  world::Interaction copy = x;
  copy.i_enc = perception::encode(enc, x.depth);
  return build_feature(copy, norm);
}

inline std::vector<BlendedFeature> build_features(std::span<const world::Interaction> data,
                                                  const OutcomeNormalizer& norm) {
  std::vector<BlendedFeature> out;
  out.reserve(data.size());
  for (const auto& x : data) out.push_back(build_feature(x, norm));
  return out;
}

inline MatrixXd to_matrix(std::span<const BlendedFeature> features) {
  MatrixXd m(kBlendedDim, static_cast<Eigen::Index>(features.size()));
  for (std::size_t j = 0; j < features.size(); ++j)
    for (int i = 0; i < kBlendedDim; ++i) m(i, static_cast<Eigen::Index>(j)) = features[j][static_cast<std::size_t>(i)];
  return m;
}

// ---------------------------------------------------------------------------
// Variational autoencoder

struct VaeConfig {
  int epochs = 1000;
  int restarts = 4;
  int batch_size = 100;
  int hidden = 9;
  double beta_kl = 1.0;
  nn::AdamParams optimizer = {};
};

struct VaeLossLog {
  std::vector<double> total;
  std::vector<double> reconstruction;
  std::vector<double> kl;
};

struct VaeModel {
  nn::DenseNetwork encoder;  // 18 -> 9 relu -> 6 linear (mu, logvar)
  nn::DenseNetwork decoder;  // 3 -> 9 relu -> 18 sigmoid
  double beta_kl = 1.0;
  VaeLossLog log;
};

inline VaeModel make_vae(const VaeConfig& cfg, Rng& rng) {
  VaeModel m;
  m.encoder = nn::DenseNetwork(kBlendedDim, {{cfg.hidden, nn::Activation::relu}, {2 * kLatentDim, nn::Activation::linear}}, rng);
  m.decoder = nn::DenseNetwork(kLatentDim, {{cfg.hidden, nn::Activation::relu}, {kBlendedDim, nn::Activation::sigmoid}}, rng);
  m.beta_kl = cfg.beta_kl;
  return m;
}

/// KL(N(mu, exp(logvar)) || N(0, I)) = -1/2 sum(1 + logvar - mu^2 - exp(logvar)).
inline double kl_divergence(const VectorXd& mu, const VectorXd& logvar) {
  return -0.5 * (1.0 + logvar.array() - mu.array().square() - logvar.array().exp()).sum();
}

struct VaeLoss {
  double total = 0.0;
  double reconstruction = 0.0;
  double kl = 0.0;
};

/// Per-sample reconstruction BCE summed over the 18 components, plus
/// beta * KL, averaged over the batch. `noise` is 3 x n.
inline VaeLoss vae_loss(const VaeModel& m, const MatrixXd& x, const MatrixXd& noise) {
  const MatrixXd h = m.encoder.forward_batch(x);
  const MatrixXd mu = h.topRows(kLatentDim);
  const MatrixXd lv = h.bottomRows(kLatentDim);
  const MatrixXd z = (mu.array() + (0.5 * lv.array()).exp() * noise.array()).matrix();
  const MatrixXd p = m.decoder.forward_batch(z);
  const double n = static_cast<double>(x.cols());
  VaeLoss out;
  out.reconstruction = nn::loss_value(p, x, nn::LossKind::bce) * kBlendedDim;
  out.kl = -0.5 * (1.0 + lv.array() - mu.array().square() - lv.array().exp()).sum() / n;
  out.total = out.reconstruction + m.beta_kl * out.kl;
  return out;
}

struct VaeGradients {
  nn::Gradients encoder;
  nn::Gradients decoder;
  VaeLoss loss;
};

/// Analytic gradient of `vae_loss` with the reparameterization noise held
/// fixed.
inline VaeGradients vae_gradients(const VaeModel& m, const MatrixXd& x, const MatrixXd& noise) {
  nn::Tape enc_tape, dec_tape;
  const MatrixXd& h = m.encoder.forward_batch(x, enc_tape);
  const MatrixXd mu = h.topRows(kLatentDim);
  const MatrixXd lv = h.bottomRows(kLatentDim);
  const MatrixXd sd = (0.5 * lv.array()).exp().matrix();
  const MatrixXd z = (mu.array() + sd.array() * noise.array()).matrix();
  const MatrixXd& p = m.decoder.forward_batch(z, dec_tape);
  const double n = static_cast<double>(x.cols());

  VaeGradients g;
  g.loss.reconstruction = nn::loss_value(p, x, nn::LossKind::bce) * kBlendedDim;
  g.loss.kl = -0.5 * (1.0 + lv.array() - mu.array().square() - lv.array().exp()).sum() / n;
  g.loss.total = g.loss.reconstruction + m.beta_kl * g.loss.kl;

  const MatrixXd dp = nn::loss_gradient(p, x, nn::LossKind::bce) * kBlendedDim;
  g.decoder = m.decoder.backward(dec_tape, dp);
  const MatrixXd& dz = g.decoder.input;
  MatrixXd dh(2 * kLatentDim, x.cols());
  dh.topRows(kLatentDim) = dz + (m.beta_kl / n) * mu;
  dh.bottomRows(kLatentDim) = (dz.array() * noise.array() * 0.5 * sd.array() +
                               (m.beta_kl / n) * 0.5 * (lv.array().exp() - 1.0))
                                  .matrix();
  g.encoder = m.encoder.backward(enc_tape, dh);
  return g;
}

/// Max relative error between the analytic VAE gradient and central
/// differences, for fixed noise.
inline double vae_grad_check(VaeModel& m, const MatrixXd& x, const MatrixXd& noise,
                             const nn::GradCheckOptions& opts = {}) {
  auto g = vae_gradients(m, x, noise);
  auto analytic = nn::ParameterView::flatten({g.encoder, g.decoder});
  using MatrixXe = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  const MatrixXe xe = x.cast<long double>();
  const MatrixXe ne = noise.cast<long double>();
  // vae_loss in extended precision.
  auto f = [&] {
    const MatrixXe h = m.encoder.forward_as<long double>(xe);
    const MatrixXe mu = h.topRows(kLatentDim);
    const MatrixXe lv = h.bottomRows(kLatentDim);
    const MatrixXe z = (mu.array() + (0.5L * lv.array()).exp() * ne.array()).matrix();
    const MatrixXe p = m.decoder.forward_as<long double>(z);
    const auto n = static_cast<long double>(x.cols());
    const long double rec = nn::loss_value_as<long double>(p, xe, nn::LossKind::bce) * kBlendedDim;
    const long double kl = -0.5L * (1.0L + lv.array() - mu.array().square() - lv.array().exp()).sum() / n;
    return rec + static_cast<long double>(m.beta_kl) * kl;
  };
  return nn::grad_check_generic(nn::ParameterView({&m.encoder, &m.decoder}), f, analytic, opts);
}

/// Smallest |pre-activation| over the relu units of encoder and decoder for
/// the batch `x` and frozen `noise`; see nn::min_relu_margin.
inline double vae_relu_margin(const VaeModel& m, const MatrixXd& x, const MatrixXd& noise) {
  const MatrixXd h = m.encoder.forward_batch(x);
  const MatrixXd z = (h.topRows(kLatentDim).array() + (0.5 * h.bottomRows(kLatentDim).array()).exp() * noise.array()).matrix();
  return std::min(nn::min_relu_margin(m.encoder, x), nn::min_relu_margin(m.decoder, z));
}

inline MatrixXd draw_noise(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  MatrixXd e(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) e(i, j) = standard_normal(rng);
  return e;
}

namespace detail {

inline VaeModel train_vae_once(const MatrixXd& data, const VaeConfig& cfg, Rng& rng) {
  VaeModel m = make_vae(cfg, rng);
  const auto n = data.cols();
  auto enc_opt = nn::Optimizer::adam(m.encoder, cfg.optimizer);
  auto dec_opt = nn::Optimizer::adam(m.decoder, cfg.optimizer);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  MatrixXd batch;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    VaeLoss sum;
    int batches = 0;
    for (Eigen::Index start = 0; start < n; start += cfg.batch_size) {
      const Eigen::Index len = std::min<Eigen::Index>(cfg.batch_size, n - start);
      batch.resize(kBlendedDim, len);
      for (Eigen::Index j = 0; j < len; ++j) batch.col(j) = data.col(order[static_cast<std::size_t>(start + j)]);
      const MatrixXd noise = draw_noise(kLatentDim, len, rng);
      auto g = vae_gradients(m, batch, noise);
      if (!std::isfinite(g.loss.total)) {
        throw nn::NumericError("VAE loss non-finite at epoch " + std::to_string(epoch),
                               static_cast<int>(m.decoder.layers().size()) - 1);
      }
      nn::detail::check_gradients(g.encoder);
      nn::detail::check_gradients(g.decoder);
      enc_opt.step(m.encoder, g.encoder);
      dec_opt.step(m.decoder, g.decoder);
      sum.total += g.loss.total;
      sum.reconstruction += g.loss.reconstruction;
      sum.kl += g.loss.kl;
      ++batches;
    }
    m.log.total.push_back(sum.total / batches);
    m.log.reconstruction.push_back(sum.reconstruction / batches);
    m.log.kl.push_back(sum.kl / batches);
  }
  return m;
}

}  // namespace detail

/// Adam training with one reparameterized sample per datum per step.
/// Trains `cfg.restarts` independently initialized models and keeps the one
/// with the lowest loss on the full set under one shared noise draw; a
/// restart whose latent collapses to fewer active units loses on that loss.
inline VaeModel train_vae(std::span<const BlendedFeature> features, const VaeConfig& cfg, Rng& rng) {
  if (features.size() < 200) throw nn::ContractError("train_vae needs at least 200 features");
  const MatrixXd data = to_matrix(features);
  const std::uint64_t base = rng();
  Rng noise_rng(derive_seed(base, "vae-select"));
  const MatrixXd noise = draw_noise(kLatentDim, data.cols(), noise_rng);
  std::optional<VaeModel> best;
  double best_loss = 0.0;
  for (int r = 0; r < std::max(1, cfg.restarts); ++r) {
    Rng local(derive_seed(base, "vae-restart", static_cast<std::uint64_t>(r)));
    VaeModel m = detail::train_vae_once(data, cfg, local);
    const double loss = vae_loss(m, data, noise).total;
    if (!best || loss < best_loss) best = std::move(m), best_loss = loss;
  }
  return std::move(*best);
}

/// Posterior means for a batch (3 x n).
inline MatrixXd embed_batch(const VaeModel& m, const MatrixXd& features) {
  return m.encoder.forward_batch(features).topRows(kLatentDim);
}

inline std::array<double, kLatentDim> embed(const VaeModel& m, const BlendedFeature& f) {
  const MatrixXd mu = embed_batch(m, to_matrix(std::span(&f, 1)));
  return {mu(0, 0), mu(1, 0), mu(2, 0)};
}

// ---------------------------------------------------------------------------
// Deterministic autoencoder alternative: 18 -> 32 -> 16 -> 8 -> 4 (tanh) -> 3
// (linear code), mirrored decoder with a sigmoid output and BCE loss.

struct AutoencoderConfig {
  int epochs = 300;
  int batch_size = 100;
  std::vector<int> hidden = {32, 16, 8, 4};
  nn::AdamParams optimizer = {};
};

struct PlainAutoencoder {
  nn::DenseNetwork net;
  int code_layer = 0;
  std::vector<double> loss_log;

  MatrixXd embed_batch(const MatrixXd& features) const {
    MatrixXd a = features;
    for (int i = 0; i <= code_layer; ++i) {
      const auto& l = net.layers()[static_cast<std::size_t>(i)];
      MatrixXd z = l.weight * a;
      z.colwise() += l.bias;
      nn::detail::activate(l, z);
      a = std::move(z);
    }
    return a;
  }
};

inline PlainAutoencoder make_autoencoder(const AutoencoderConfig& cfg, Rng& rng) {
  std::vector<nn::LayerSpec> specs;
  for (int h : cfg.hidden) specs.push_back({h, nn::Activation::tanh});
  specs.push_back({kLatentDim, nn::Activation::linear});
  for (auto it = cfg.hidden.rbegin(); it != cfg.hidden.rend(); ++it) specs.push_back({*it, nn::Activation::tanh});
  specs.push_back({kBlendedDim, nn::Activation::sigmoid});
  return {nn::DenseNetwork(kBlendedDim, specs, rng), static_cast<int>(cfg.hidden.size()), {}};
}

inline PlainAutoencoder train_autoencoder(std::span<const BlendedFeature> features, const AutoencoderConfig& cfg,
                                          Rng& rng) {
  if (features.size() < 200) throw nn::ContractError("train_autoencoder needs at least 200 features");
  PlainAutoencoder ae = make_autoencoder(cfg, rng);
  const MatrixXd data = to_matrix(features);
  const auto n = data.cols();
  auto opt = nn::Optimizer::adam(ae.net, cfg.optimizer);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  MatrixXd batch;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double sum = 0.0;
    int batches = 0;
    for (Eigen::Index start = 0; start < n; start += cfg.batch_size) {
      const Eigen::Index len = std::min<Eigen::Index>(cfg.batch_size, n - start);
      batch.resize(kBlendedDim, len);
      for (Eigen::Index j = 0; j < len; ++j) batch.col(j) = data.col(order[static_cast<std::size_t>(start + j)]);
      sum += nn::train_batch(ae.net, opt, batch, batch, nn::LossKind::bce);
      ++batches;
    }
    ae.loss_log.push_back(sum / batches);
  }
  return ae;
}

}  // namespace oao::latent

#endif  // OAO_LATENT_HPP

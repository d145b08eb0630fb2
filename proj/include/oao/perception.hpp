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
 * @file perception.hpp
 *
 * @brief Object encoder: a dense autoencoder over 32x32 depth rasters whose
 * sigmoid bottleneck provides the 8-D object feature.
 */

#ifndef OAO_PERCEPTION_HPP
#define OAO_PERCEPTION_HPP

#include <algorithm>
#include <cmath>
#include <array>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "oao/nn.hpp"
#include "oao/world.hpp"

namespace oao::perception {

using nn::MatrixXd;
using nn::VectorXd;

inline constexpr int kFeatureDim = 8;
using ObjectFeature = std::array<double, kFeatureDim>;

struct EncoderConfig {
  int epochs = 200;
  int batch_size = 64;
  std::vector<int> hidden = {256, 64};
  nn::AdadeltaParams optimizer = {};
};

/// A fitted autoencoder. Layers [0, bottleneck_layer] form the encoder,
/// the rest the decoder.
class ObjectEncoder {
 public:
  ObjectEncoder() = default;
  ObjectEncoder(nn::DenseNetwork autoencoder, int bottleneck_layer)
      : net_(std::move(autoencoder)), bottleneck_(bottleneck_layer) {}

  const nn::DenseNetwork& network() const { return net_; }
  nn::DenseNetwork& network() { return net_; }
  int bottleneck_layer() const { return bottleneck_; }
  const std::vector<double>& loss_log() const { return loss_log_; }
  std::vector<double>& loss_log() { return loss_log_; }

  /// Encodes a batch of rasters (one per column) to 8 x n features.
  MatrixXd encode_batch(const MatrixXd& pixels) const {
    MatrixXd a = pixels;
    if (a.rows() != world::kRasterSize) throw nn::ContractError("encoder expects 1024-pixel rasters");
    const auto& layers = net_.layers();
    for (int i = 0; i <= bottleneck_; ++i) {
      MatrixXd z = layers[static_cast<std::size_t>(i)].weight * a;
      z.colwise() += layers[static_cast<std::size_t>(i)].bias;
      nn::detail::activate(layers[static_cast<std::size_t>(i)], z);
      a = std::move(z);
    }
    return a;
  }

  MatrixXd reconstruct_batch(const MatrixXd& pixels) const { return net_.forward_batch(pixels); }

 private:
  nn::DenseNetwork net_;
  int bottleneck_ = 0;
  std::vector<double> loss_log_;
};

inline MatrixXd to_matrix(std::span<const world::DepthImage> images) {
  MatrixXd m(world::kRasterSize, static_cast<Eigen::Index>(images.size()));
  for (std::size_t j = 0; j < images.size(); ++j)
    for (int i = 0; i < world::kRasterSize; ++i) m(i, static_cast<Eigen::Index>(j)) = images[j].pixels[static_cast<std::size_t>(i)];
  return m;
}

/// Fresh, untrained autoencoder 1024 -> hidden... -> 8 -> ...hidden -> 1024.
inline ObjectEncoder make_encoder(const EncoderConfig& cfg, Rng& rng) {
  std::vector<nn::LayerSpec> specs;
  for (int h : cfg.hidden) specs.push_back({h, nn::Activation::relu});
  specs.push_back({kFeatureDim, nn::Activation::sigmoid});
  for (auto it = cfg.hidden.rbegin(); it != cfg.hidden.rend(); ++it) specs.push_back({*it, nn::Activation::relu});
  specs.push_back({world::kRasterSize, nn::Activation::sigmoid});
  return ObjectEncoder(nn::DenseNetwork(world::kRasterSize, specs, rng), static_cast<int>(cfg.hidden.size()));
}

/// Mean per-pixel BCE of the reconstruction.
inline double reconstruction_loss(const ObjectEncoder& enc, const MatrixXd& pixels) {
  return nn::loss_value(enc.reconstruct_batch(pixels), pixels, nn::LossKind::bce);
}

/// Trains the autoencoder with Adadelta on the per-image summed BCE.
/// Records the epoch mean of the per-pixel batch loss.
inline ObjectEncoder train_encoder(std::span<const world::DepthImage> images, const EncoderConfig& cfg, Rng& rng) {
  if (images.size() < 100) throw nn::ContractError("train_encoder needs at least 100 images");
  ObjectEncoder enc = make_encoder(cfg, rng);
  const MatrixXd data = to_matrix(images);
  // Output bias starts at the logit of the mean image. From 0.5 everywhere
  // the first updates are one coherent darkening push that can drive the
  // sigmoid bottleneck into saturation for good.
  const VectorXd mean = data.rowwise().mean().cwiseMax(1e-4).cwiseMin(1.0 - 1e-4);
  enc.network().layers().back().bias = (mean.array() / (1.0 - mean.array())).log().matrix();
  const auto n = static_cast<Eigen::Index>(images.size());
  auto opt = nn::Optimizer::adadelta(enc.network(), cfg.optimizer);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  MatrixXd batch;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double sum = 0.0;
    int batches = 0;
    for (Eigen::Index start = 0; start < n; start += cfg.batch_size) {
      const Eigen::Index len = std::min<Eigen::Index>(cfg.batch_size, n - start);
      batch.resize(data.rows(), len);
      for (Eigen::Index j = 0; j < len; ++j) batch.col(j) = data.col(order[static_cast<std::size_t>(start + j)]);
      try {
        nn::Tape tape;
        const MatrixXd& out = enc.network().forward_batch(batch, tape);
        const double loss = nn::loss_value(out, batch, nn::LossKind::bce);
        if (!std::isfinite(loss)) throw nn::NumericError("non-finite loss", static_cast<int>(enc.network().layers().size()) - 1);
        // Per-image summed BCE keeps gradients well above the Adadelta epsilon.
        auto g = enc.network().backward(tape, nn::loss_gradient(out, batch, nn::LossKind::bce) * world::kRasterSize);
        nn::detail::check_gradients(g);
        opt.step(enc.network(), g);
        sum += loss;
      } catch (const nn::NumericError& e) {
        throw nn::NumericError("object encoder diverged at epoch " + std::to_string(epoch) + ": " + e.what(),
                               e.layer());
      }
      ++batches;
    }
    enc.loss_log().push_back(sum / batches);
  }
  return enc;
}

inline ObjectFeature encode(const ObjectEncoder& enc, const world::DepthImage& image) {
  const MatrixXd f = enc.encode_batch(to_matrix(std::span(&image, 1)));
  ObjectFeature out{};
  for (int i = 0; i < kFeatureDim; ++i) out[static_cast<std::size_t>(i)] = f(i, 0);
  return out;
}

/// Fills `i_enc` of every interaction.
inline void encode_all(const ObjectEncoder& enc, std::span<world::Interaction> data) {
  constexpr std::size_t chunk = 512;
  for (std::size_t start = 0; start < data.size(); start += chunk) {
    const std::size_t len = std::min(chunk, data.size() - start);
    MatrixXd pixels(world::kRasterSize, static_cast<Eigen::Index>(len));
    for (std::size_t j = 0; j < len; ++j)
      for (int i = 0; i < world::kRasterSize; ++i)
        pixels(i, static_cast<Eigen::Index>(j)) = data[start + j].depth.pixels[static_cast<std::size_t>(i)];
    const MatrixXd f = enc.encode_batch(pixels);
    for (std::size_t j = 0; j < len; ++j) {
      ObjectFeature v{};
      for (int i = 0; i < kFeatureDim; ++i) v[static_cast<std::size_t>(i)] = f(i, static_cast<Eigen::Index>(j));
      data[start + j].i_enc = v;
    }
  }
}

}  // namespace oao::perception

#endif  // OAO_PERCEPTION_HPP

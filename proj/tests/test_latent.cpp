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

#include <gtest/gtest.h>

#include <sstream>

#include "oao/latent.hpp"
#include "support.hpp"

namespace oao::latent {
namespace {

TEST(Feature, ActionEndpoints) {
  auto a = normalize_action({26.0, 0.0, world::Gripper::open});
  EXPECT_EQ(a, (ActionVector{0, 0, 0, 0, 1}));
  auto b = normalize_action({31.0, world::kTwoPi, world::Gripper::closed});
  EXPECT_DOUBLE_EQ(b[0], 1.0);
  EXPECT_DOUBLE_EQ(b[1], 1.0);
  EXPECT_EQ(b[2], 1.0);
}

TEST(Feature, OutcomeAtFittingMinimumIsZero) {
  auto data = world::generate_dataset(world::uniform_counts(30), 2);
  auto norm = OutcomeNormalizer::fit(data);
  world::Outcome lo{norm.min()[0], norm.min()[1], norm.min()[2], norm.min()[3], norm.min()[4]};
  EXPECT_EQ(norm.apply(lo), (OutcomeVector{0, 0, 0, 0, 0}));
  world::Outcome hi{norm.max()[0], norm.max()[1], norm.max()[2], norm.max()[3], norm.max()[4]};
  EXPECT_EQ(norm.apply(hi), (OutcomeVector{1, 1, 1, 1, 1}));
  world::Outcome beyond{1e3, -1e3, 1e3, 5.0, -5.0};
  for (double v : norm.apply(beyond)) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Feature, DegenerateComponentMapsToHalf) {
  OutcomeNormalizer norm({0, 0, 0, 0, 0}, {1, 1, 0, 1, 1});
  EXPECT_TRUE(norm.degenerate(2));
  EXPECT_FALSE(norm.degenerate(0));
  EXPECT_TRUE(norm.any_degenerate());
  EXPECT_EQ(norm.apply({0.3, 0.3, 7.0, 0.3, 0.3})[2], 0.5);
}

TEST(Feature, NormalizerTextRoundTrip) {
  auto norm = OutcomeNormalizer::fit(world::generate_dataset(world::uniform_counts(5), 8));
  std::stringstream s;
  norm.save(s);
  auto back = OutcomeNormalizer::load(s);
  EXPECT_EQ(back.min(), norm.min());
  EXPECT_EQ(back.max(), norm.max());
  std::istringstream broken("min_0 = 1\n");
  EXPECT_THROW(OutcomeNormalizer::load(broken), io::FormatError);
}

TEST(Feature, LengthAndRangeOnRandomInteractions) {
  auto fit = world::generate_dataset(world::uniform_counts(20), 1);
  auto norm = OutcomeNormalizer::fit(fit);
  Rng rng(4);
  auto eval = world::generate_dataset(world::uniform_counts(20), 2);
  for (auto& x : eval) {
    x.i_enc.emplace();
    for (auto& v : *x.i_enc) v = uniform01(rng);
    auto f = build_feature(x, norm);
    static_assert(std::tuple_size_v<decltype(f)> == 18);
    for (double v : f) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
  world::Interaction bare;
  EXPECT_THROW(build_feature(bare, norm), nn::ContractError);
}

TEST(Kl, Examples) {
  EXPECT_EQ(kl_divergence(VectorXd::Zero(3), VectorXd::Zero(3)), 0.0);
  VectorXd mu(3);
  mu << 1, 0, 0;
  EXPECT_DOUBLE_EQ(kl_divergence(mu, VectorXd::Zero(3)), 0.5);
}

TEST(Kl, NonNegativeOnSampledEncoderOutputs) {
  Rng rng(6);
  for (int n = 0; n < 2000; ++n) {
    VectorXd mu(3), lv(3);
    for (int i = 0; i < 3; ++i) {
      mu[i] = uniform(rng, -5, 5);
      lv[i] = uniform(rng, -8, 4);
    }
    EXPECT_GE(kl_divergence(mu, lv), 0.0);
  }
}

TEST(Vae, GradientMatchesFiniteDifferencesWithFrozenNoise) {
  Rng rng(9);
  VaeModel m = make_vae({}, rng);
  MatrixXd x(kBlendedDim, 6);
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    for (int i = 0; i < kBlendedDim; ++i) x(i, j) = uniform(rng, 0.05, 0.95);
  const MatrixXd noise = draw_noise(kLatentDim, x.cols(), rng);
  EXPECT_LT(vae_grad_check(m, x, noise), 1e-4);
  m.beta_kl = 2.5;
  EXPECT_LT(vae_grad_check(m, x, noise), 1e-4);
}

TEST(Vae, ShapesAndDecoderRange) {
  Rng rng(1);
  VaeModel m = make_vae({}, rng);
  EXPECT_EQ(m.encoder.input_dim(), 18);
  EXPECT_EQ(m.encoder.output_dim(), 6);
  EXPECT_EQ(m.decoder.input_dim(), 3);
  EXPECT_EQ(m.decoder.output_dim(), 18);
  const MatrixXd out = m.decoder.forward_batch(MatrixXd::Random(3, 50) * 4.0);
  EXPECT_TRUE((out.array() > 0.0).all() && (out.array() < 1.0).all());
  std::vector<BlendedFeature> few(50);
  EXPECT_THROW(train_vae(few, {}, rng), nn::ContractError);
}

// A VAE trained on the blended features of a 700-interaction bootstrap set.
class TrainedVae : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    auto data = world::generate_dataset(world::balanced_counts(700), 31);
    std::vector<world::DepthImage> images;
    for (const auto& x : data) images.push_back(x.depth);
    Rng rng(12);
    perception::EncoderConfig ecfg;
    ecfg.epochs = 40;
    auto enc = perception::train_encoder(images, ecfg, rng);
    perception::encode_all(enc, data);
    norm_ = new OutcomeNormalizer(OutcomeNormalizer::fit(data));
    data_ = new std::vector<world::Interaction>(data);
    features_ = new std::vector<BlendedFeature>(build_features(data, *norm_));
    vae_ = new VaeModel(train_vae(*features_, VaeConfig{}, rng));
  }
  static void TearDownTestSuite() {
    delete vae_;
    delete features_;
    delete data_;
    delete norm_;
  }
  static OutcomeNormalizer* norm_;
  static std::vector<world::Interaction>* data_;
  static std::vector<BlendedFeature>* features_;
  static VaeModel* vae_;
};
OutcomeNormalizer* TrainedVae::norm_ = nullptr;
std::vector<world::Interaction>* TrainedVae::data_ = nullptr;
std::vector<BlendedFeature>* TrainedVae::features_ = nullptr;
VaeModel* TrainedVae::vae_ = nullptr;

TEST_F(TrainedVae, TrainingBeatsUntrainedLoss) {
  Rng rng(12);
  VaeModel untrained = make_vae({}, rng);
  const MatrixXd x = to_matrix(*features_);
  Rng nrng(3);
  const MatrixXd noise = draw_noise(kLatentDim, x.cols(), nrng);
  EXPECT_LT(vae_loss(*vae_, x, noise).total, vae_loss(untrained, x, noise).total);
  EXPECT_EQ(vae_->log.total.size(), 1000u);
  EXPECT_EQ(vae_->log.kl.size(), 1000u);
  for (std::size_t e = 0; e < vae_->log.total.size(); ++e)
    EXPECT_NEAR(vae_->log.total[e], vae_->log.reconstruction[e] + vae_->log.kl[e], 1e-9);
}

TEST(WindowCheck, FlagsARiseAndToleratesPlateauNoise) {
  Rng rng(5);
  std::vector<double> plateau(300), rising(300);
  for (std::size_t e = 0; e < 300; ++e) {
    const double jitter = 0.05 * standard_normal(rng);
    plateau[e] = 8.0 + jitter;
    rising[e] = 8.0 + jitter + (e >= 150 ? 0.002 * static_cast<double>(e - 150) : 0.0);
  }
  EXPECT_FALSE(oao::testing::first_window_violation(plateau, 30).has_value());
  EXPECT_TRUE(oao::testing::first_window_violation(rising, 30).has_value());
  std::vector<double> spike(100, 1.0);
  for (std::size_t e = 0; e < 100; ++e) spike[e] -= 0.001 * static_cast<double>(e);
  spike[70] += 0.02;
  EXPECT_FALSE(oao::testing::first_window_violation(spike, 20).has_value());
}

TEST_F(TrainedVae, TotalLossNonIncreasingOverThirtyEpochWindows) {
  const auto bad = oao::testing::first_window_violation(vae_->log.total, 30);
  EXPECT_FALSE(bad.has_value()) << "epoch " << bad.value_or(0);
}

TEST_F(TrainedVae, EmbeddingIsPure) {
  const auto& f = features_->front();
  EXPECT_EQ(embed(*vae_, f), embed(*vae_, f));
}

TEST_F(TrainedVae, GripperChangesTheEmbedding) {
  BlendedFeature a = features_->front();
  BlendedFeature b = a;
  for (int g = 0; g < 3; ++g) b[kObjectDim + 2 + g] = 0.0;
  const int other = a[kObjectDim + 2] == 1.0 ? 2 : 0;
  b[kObjectDim + 2 + other] = 1.0;
  auto ea = embed(*vae_, a);
  auto eb = embed(*vae_, b);
  double d2 = 0.0;
  for (int i = 0; i < kLatentDim; ++i) d2 += (ea[i] - eb[i]) * (ea[i] - eb[i]);
  EXPECT_GT(std::sqrt(d2), 1e-3);
}

TEST_F(TrainedVae, EmbeddingsAreFiniteAndSpread) {
  const MatrixXd z = embed_batch(*vae_, to_matrix(*features_));
  EXPECT_TRUE(z.allFinite());
  for (int i = 0; i < kLatentDim; ++i) {
    const double mean = z.row(i).mean();
    EXPECT_GT((z.row(i).array() - mean).square().sum(), 0.0);
  }
  const MatrixXd h = vae_->encoder.forward_batch(to_matrix(*features_));
  for (Eigen::Index j = 0; j < h.cols(); ++j)
    EXPECT_GE(kl_divergence(h.col(j).head(3), h.col(j).tail(3)), 0.0);
}

TEST_F(TrainedVae, PlainAutoencoderAlternative) {
  Rng rng(4);
  AutoencoderConfig cfg;
  cfg.epochs = 60;
  auto ae = train_autoencoder(*features_, cfg, rng);
  EXPECT_EQ(ae.net.layers().size(), 10u);
  EXPECT_EQ(ae.net.layers()[4].out_dim(), kLatentDim);
  EXPECT_LT(ae.loss_log.back(), ae.loss_log.front());
  const MatrixXd z = ae.embed_batch(to_matrix(*features_));
  EXPECT_EQ(z.rows(), kLatentDim);
  EXPECT_TRUE(z.allFinite());
}

TEST(Vae, SameSeedSameModel) {
  Rng fr(2);
  std::vector<BlendedFeature> f(240);
  for (auto& v : f)
    for (auto& c : v) c = uniform01(fr);
  VaeConfig cfg;
  cfg.epochs = 3;
  Rng a(5), b(5);
  auto ma = train_vae(f, cfg, a);
  auto mb = train_vae(f, cfg, b);
  EXPECT_EQ(ma.log.total, mb.log.total);
  EXPECT_EQ(ma.encoder.layers()[1].weight, mb.encoder.layers()[1].weight);
}

}  // namespace
}  // namespace oao::latent

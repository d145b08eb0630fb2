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

#include "oao/learner.hpp"

namespace oao::learner {
namespace {

constexpr double kTol = 1e-12;

TEST(MeanError, Examples) {
  const std::vector<double> constant(10, 0.3);
  EXPECT_NEAR(*mean_error(constant, 9, 4), 0.3, kTol);
  EXPECT_NEAR(*mean_error(std::vector<double>{0.4, 0.2}, 1, 1), 0.3, kTol);
  EXPECT_NEAR(*mean_error(std::vector<double>{0.9, 0.6, 0.3}, 2, 2), 0.6, kTol);
  EXPECT_FALSE(mean_error(std::vector<double>{0.9, 0.6}, 1, 2).has_value());
  EXPECT_FALSE(mean_error(std::vector<double>{0.9, 0.6}, 2, 0).has_value());
}

TEST(LearningProgress, Examples) {
  const LpConfig one{.theta = 1};
  EXPECT_NEAR(learning_progress(std::vector<double>{1.0, 0.6, 0.2}, false, one), 0.4, kTol);
  EXPECT_NEAR(learning_progress(std::vector<double>(33, 0.25), false, LpConfig{}), 0.0, kTol);
  EXPECT_EQ(learning_progress(std::vector<double>(16, 0.5), false, LpConfig{}), 1e6);
  EXPECT_EQ(learning_progress(std::vector<double>(32, 0.5), false, LpConfig{}), 1e6);
  EXPECT_EQ(learning_progress(std::vector<double>(40, 0.5), true, LpConfig{}),
            -std::numeric_limits<double>::infinity());
  EXPECT_THROW(learning_progress(std::vector<double>{}, false, LpConfig{.theta = 0}), nn::ContractError);
}

TEST(LearningProgress, SignFollowsTrend) {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const int theta = 1 + static_cast<int>(uniform_index(rng, 20));
    const std::size_t len = 2 * static_cast<std::size_t>(theta) + 1 + uniform_index(rng, 30);
    std::vector<double> down(len), up(len);
    double v = uniform(rng, 1.0, 2.0);
    for (std::size_t i = 0; i < len; ++i) {
      v -= uniform(rng, 1e-4, 1e-2);
      down[i] = v;
      up[len - 1 - i] = v;
    }
    EXPECT_GT(learning_progress(down, false, {.theta = theta}), 0.0);
    EXPECT_LT(learning_progress(up, false, {.theta = theta}), 0.0);
  }
}

TEST(LearningProgress, DependsOnlyOnLastWindowPair) {
  std::vector<double> a{9, 9, 9, 0.5, 0.4, 0.3, 0.2, 0.1};
  std::vector<double> b{1, 2, 3, 0.5, 0.4, 0.3, 0.2, 0.1};
  EXPECT_EQ(learning_progress(a, false, {.theta = 2}), learning_progress(b, false, {.theta = 2}));
}

TEST(InverseError, Examples) {
  EXPECT_EQ(inverse_error(latent::ActionVector{0.2, 0.3, 0, 1, 0}, latent::ActionVector{0.2, 0.3, 0, 1, 0}), 0.0);
  EXPECT_NEAR(inverse_error(latent::ActionVector{1, 0, 0, 0, 0}, latent::ActionVector{0, 0, 0, 0, 0}), 0.2, kTol);
  EXPECT_NEAR(inverse_error(latent::ActionVector{0, 0, 0, 0, 0}, latent::ActionVector{0, 0, 1, 0, 0}), 0.2, kTol);
}

TEST(InverseError, ZeroNetworkPredictsHalfOnGripperHeads) {
  Rng rng(1);
  auto net = make_model({.kind = ModelKind::inverse}, rng);
  for (auto& l : net.layers()) {
    l.weight.setZero();
    l.bias.setZero();
  }
  const VectorXd out = predict(net, VectorXd::Zero(kInputDim));
  EXPECT_EQ(out[0], 0.0);
  EXPECT_EQ(out[1], 0.0);
  for (int i = 2; i < 5; ++i) EXPECT_EQ(out[i], 0.5);
  latent::ActionVector a{};
  for (int i = 0; i < 5; ++i) a[static_cast<std::size_t>(i)] = out[i];
  EXPECT_NEAR(inverse_error(a, latent::ActionVector{0, 0, 1, 0, 0}), 0.15, kTol);
}

TEST(Model, ShapesAndZeroNetwork) {
  Rng rng(2);
  auto fm = make_model({}, rng);
  EXPECT_EQ(fm.input_dim(), 13);
  EXPECT_EQ(fm.output_dim(), 5);
  EXPECT_EQ(fm.layers()[0].out_dim(), 512);
  const VectorXd in = VectorXd::Random(13);
  EXPECT_EQ(predict(fm, in), predict(fm, in));
  for (auto& l : fm.layers()) {
    l.weight.setZero();
    l.bias.setZero();
  }
  EXPECT_EQ(predict(fm, in), VectorXd::Zero(5));

  auto im = make_model({.kind = ModelKind::inverse}, rng);
  const MatrixXd out = im.forward_batch(MatrixXd::Random(13, 200) * 10.0);
  EXPECT_TRUE((out.bottomRows(3).array() >= 0.0).all() && (out.bottomRows(3).array() <= 1.0).all());
}

TEST(Model, GradientCheckForwardAndInverse) {
  for (auto kind : {ModelKind::forward, ModelKind::inverse}) {
    for (int seed = 0; seed < 3; ++seed) {
      Rng rng(static_cast<std::uint64_t>(100 + seed));
      auto net = make_model({.kind = kind}, rng);
      // Redraw inputs that put a relu unit within reach of its kink.
      VectorXd x(13), y(5);
      do {
        for (int i = 0; i < 13; ++i) x[i] = uniform01(rng);
      } while (nn::min_relu_margin(net, x) < 1e-4);
      for (int i = 0; i < 5; ++i) y[i] = uniform01(rng);
      EXPECT_LT(nn::grad_check(net, x, y, nn::LossKind::mse), 1e-4) << to_string(kind) << " seed " << seed;
    }
  }
}

// One-region fixture data: a handful of encoded interactions with made-up
// object codes.
std::vector<world::Interaction> encoded(std::size_t n, std::uint64_t seed) {
  auto data = world::generate_dataset(world::uniform_counts(n), seed);
  Rng rng(seed);
  for (auto& x : data) {
    x.i_enc.emplace();
    for (auto& v : *x.i_enc) v = uniform01(rng);
  }
  return data;
}

TEST(Samples, LayoutPerKind) {
  auto data = encoded(2, 5);
  auto norm = latent::OutcomeNormalizer::fit(data);
  auto f = make_samples(data, norm, ModelKind::forward);
  auto v = make_samples(data, norm, ModelKind::inverse);
  const auto a = latent::normalize_action(data[3].action);
  const auto o = norm.apply(data[3].outcome);
  for (int i = 0; i < 5; ++i) {
    EXPECT_EQ(f.inputs(8 + i, 3), a[static_cast<std::size_t>(i)]);
    EXPECT_EQ(f.targets(i, 3), o[static_cast<std::size_t>(i)]);
    EXPECT_EQ(v.inputs(8 + i, 3), o[static_cast<std::size_t>(i)]);
    EXPECT_EQ(v.targets(i, 3), a[static_cast<std::size_t>(i)]);
  }
  Rng rng(1);
  const auto im = make_model({.kind = ModelKind::inverse}, rng);
  const VectorXd pred = predict(im, VectorXd(v.inputs.col(3)));
  EXPECT_NEAR(inverse_error(im, data[3], norm), (pred - v.targets.col(3)).squaredNorm() / 5.0, kTol);
  world::Interaction bare;
  EXPECT_THROW(make_samples(std::span(&bare, 1), norm, ModelKind::forward), nn::ContractError);
}

TEST(TrainRegion, MemorizesSinglePoint) {
  auto data = encoded(1, 8);
  auto norm = latent::OutcomeNormalizer::fit(data);
  auto s = make_samples(data, norm, ModelKind::forward);
  Rng rng(4);
  ModelConfig cfg;
  RegionState rs(0, cfg, rng);
  rs.train = {0};
  double e = 0.0;
  for (int call = 0; call < 200; ++call) e = train_region(rs, s, cfg, rng);
  EXPECT_LT(e, 1e-4);
  EXPECT_EQ(rs.error_history.size(), 200u);
  const VectorXd pred = predict(rs.model, VectorXd(s.inputs.col(0)));
  EXPECT_LT((pred - s.targets.col(0)).cwiseAbs().maxCoeff(), 1e-2);
}

TEST(TrainRegion, ZeroEpochsRecordsWithoutTraining) {
  auto data = encoded(4, 9);
  auto norm = latent::OutcomeNormalizer::fit(data);
  auto s = make_samples(data, norm, ModelKind::forward);
  Rng rng(4);
  ModelConfig cfg;
  cfg.epochs = 0;
  RegionState rs(1, cfg, rng);
  rs.train = {0, 1, 2};
  const MatrixXd before = rs.model.layers()[0].weight;
  const double e = train_region(rs, s, cfg, rng);
  EXPECT_EQ(rs.model.layers()[0].weight, before);
  ASSERT_EQ(rs.error_history.size(), 1u);
  EXPECT_EQ(rs.error_history[0], e);
  RegionState empty(2, cfg, rng);
  EXPECT_THROW(train_region(empty, s, cfg, rng), nn::ContractError);
}

TEST(TrainRegion, DeterministicGivenSeedAndState) {
  auto data = encoded(10, 10);
  auto norm = latent::OutcomeNormalizer::fit(data);
  auto s = make_samples(data, norm, ModelKind::inverse);
  ModelConfig cfg{.kind = ModelKind::inverse};
  auto run = [&] {
    Rng rng(77);
    RegionState rs(0, cfg, rng);
    rs.pool.resize(static_cast<std::size_t>(s.size()));
    std::iota(rs.pool.begin(), rs.pool.end(), std::size_t{0});
    std::vector<double> out;
    for (int step = 0; step < 4; ++step) {
      rs.draw(9, rng);
      out.push_back(train_region(rs, s, cfg, rng));
    }
    return out;
  };
  EXPECT_EQ(run(), run());
}

TEST(RegionState, DrawKeepsPoolAndTrainDisjoint) {
  Rng rng(6);
  RegionState rs(0, {}, rng);
  rs.pool = {0, 1, 2, 3, 4, 5, 6};
  EXPECT_EQ(rs.draw(4, rng), 4u);
  EXPECT_FALSE(rs.exhausted);
  EXPECT_EQ(rs.draw(16, rng), 3u);
  EXPECT_TRUE(rs.exhausted);
  EXPECT_TRUE(rs.pool.empty());
  std::vector<std::size_t> t = rs.train;
  std::sort(t.begin(), t.end());
  EXPECT_EQ(t, (std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6}));
  EXPECT_EQ(rs.learning_progress({}), -std::numeric_limits<double>::infinity());
}

}  // namespace
}  // namespace oao::learner

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
 * @file explorer.hpp
 *
 * @brief The learning cycle: bootstrap, region formation, model
 * initialization and the epsilon-greedy learning-progress loop.
 *
 * Seed streams. Every stochastic stage draws from its own substream of the
 * master seed, so changing one stage never perturbs another:
 *
 *   derive_seed(master, "world")      bootstrap interactions
 *   derive_seed(master, "pool")       candidate pool
 *   derive_seed(master, "eval")       held-out evaluation set
 *   make_rng(master, "encoder")       object autoencoder
 *   derive_seed(master, "partition")  feature space and clustering
 *   make_rng(master, "model", i)      initial parameters of region i
 *   make_rng(master, "loop")          selection, sampling and shuffles
 *
 * Interaction ids are disjoint across the three sets: bootstrap from 0, pool
 * from bootstrap_n, eval from bootstrap_n + pool_size.
 */

#ifndef OAO_EXPLORER_HPP
#define OAO_EXPLORER_HPP

#include <array>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "oao/io.hpp"
#include "oao/latent.hpp"
#include "oao/learner.hpp"
#include "oao/partition.hpp"
#include "oao/perception.hpp"
#include "oao/world.hpp"

namespace oao::explorer {

using nn::MatrixXd;
using nn::VectorXd;

// ---------------------------------------------------------------------------
// Configuration

inline learner::ModelKind parse_model_kind(std::string_view s) {
  if (s == "forward") return learner::ModelKind::forward;
  if (s == "inverse") return learner::ModelKind::inverse;
  throw io::FormatError("unknown model kind '" + std::string(s) + "'");
}

inline nn::Activation parse_activation(std::string_view s) {
  for (auto a : {nn::Activation::relu, nn::Activation::sigmoid, nn::Activation::tanh, nn::Activation::linear})
    if (s == nn::to_string(a)) return a;
  throw io::FormatError("unknown activation '" + std::string(s) + "'");
}

/// World constants exposed as `world.<name>` config keys.
inline const std::vector<std::pair<const char*, double world::WorldConfig::*>>& world_keys() {
  using W = world::WorldConfig;
  static const std::vector<std::pair<const char*, double W::*>> keys = {
      {"sigma_pos", &W::sigma_pos},
      {"sigma_ang", &W::sigma_ang},
      {"centre_radius", &W::centre_radius},
      {"finger_half_width", &W::finger_half_width},
      {"open_aperture", &W::open_aperture},
      {"half_open_aperture", &W::half_open_aperture},
      {"grasp_tolerance", &W::grasp_tolerance},
      {"handle_pinch_tolerance", &W::handle_pinch_tolerance},
      {"handle_block_angle", &W::handle_block_angle},
      {"handle_pinch_angle", &W::handle_pinch_angle},
      {"handle_push_angle", &W::handle_push_angle},
      {"lift_height", &W::lift_height},
      {"push_gain", &W::push_gain},
      {"sphere_push_gain", &W::sphere_push_gain},
      {"rotation_gain", &W::rotation_gain},
      {"handle_push_rotation", &W::handle_push_rotation},
      {"handle_block_rotation", &W::handle_block_rotation},
      {"handle_block_displacement", &W::handle_block_displacement},
      {"lift_threshold", &W::lift_threshold},
  };
  return keys;
}

struct ExperimentConfig {
  std::uint64_t seed = 1;
  partition::Strategy strategy = partition::Strategy::latent;
  partition::Backend cluster = partition::Backend::gmm;
  partition::DimRed dimred = partition::DimRed::vae;
  int k = 5;
  int bootstrap_n = 700;
  int pool_size = 7200;
  int eval_size = 1000;
  int init_per_region = 128;
  int steps = 400;
  int kappa = 16;
  double epsilon = 0.3;
  int theta = 16;
  double optimistic_lp = 1e6;
  int epochs_per_step = 5;
  int batch_size = 32;
  learner::ModelKind model = learner::ModelKind::forward;
  nn::Activation fm_activation = nn::Activation::relu;
  int hidden_units = 512;
  double learning_rate = 1e-3;
  int encoder_epochs = 200;
  int vae_epochs = 1000;
  int vae_restarts = 4;
  int ae_epochs = 300;
  world::WorldConfig world = {};

  void validate() const {
    auto positive = [](int v, const char* name) {
      if (v < 1) throw nn::ContractError(std::string(name) + " must be positive");
    };
    positive(k, "k");
    positive(bootstrap_n, "bootstrap_n");
    positive(pool_size, "pool_size");
    positive(eval_size, "eval_size");
    positive(init_per_region, "init_per_region");
    positive(kappa, "kappa");
    positive(theta, "theta");
    positive(batch_size, "batch_size");
    positive(hidden_units, "hidden_units");
    positive(vae_restarts, "vae_restarts");
    if (steps < 0) throw nn::ContractError("steps must be >= 0");
    if (epochs_per_step < 0) throw nn::ContractError("epochs_per_step must be >= 0");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw nn::ContractError("epsilon must lie in [0, 1]");
  }

  io::KeyValues to_key_values() const {
    io::KeyValues kv;
    kv["seed"] = std::to_string(seed);
    kv["strategy"] = partition::to_string(strategy);
    kv["cluster"] = partition::to_string(cluster);
    kv["dimred"] = partition::to_string(dimred);
    kv["k"] = std::to_string(k);
    kv["bootstrap_n"] = std::to_string(bootstrap_n);
    kv["pool_size"] = std::to_string(pool_size);
    kv["eval_size"] = std::to_string(eval_size);
    kv["init_per_region"] = std::to_string(init_per_region);
    kv["steps"] = std::to_string(steps);
    kv["kappa"] = std::to_string(kappa);
    kv["epsilon"] = io::format_double(epsilon);
    kv["theta"] = std::to_string(theta);
    kv["optimistic_lp"] = io::format_double(optimistic_lp);
    kv["epochs_per_step"] = std::to_string(epochs_per_step);
    kv["batch_size"] = std::to_string(batch_size);
    kv["model"] = learner::to_string(model);
    kv["fm_activation"] = nn::to_string(fm_activation);
    kv["hidden_units"] = std::to_string(hidden_units);
    kv["learning_rate"] = io::format_double(learning_rate);
    kv["encoder_epochs"] = std::to_string(encoder_epochs);
    kv["vae_epochs"] = std::to_string(vae_epochs);
    kv["vae_restarts"] = std::to_string(vae_restarts);
    kv["ae_epochs"] = std::to_string(ae_epochs);
    for (const auto& [name, member] : world_keys()) kv[std::string("world.") + name] = io::format_double(world.*member);
    return kv;
  }

  /// Overrides the fields named in `kv`; unknown keys are an error.
  void apply(const io::KeyValues& kv) {
    auto as_int = [](const std::string& key, const std::string& v) {
      int out = 0;
      auto res = std::from_chars(v.data(), v.data() + v.size(), out);
      if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        throw io::FormatError("key '" + key + "': not an integer: '" + v + "'");
      return out;
    };
    for (const auto& [key, v] : kv) {
      try {
        if (key == "seed") seed = parse_seed(v);
        else if (key == "strategy") strategy = partition::parse_strategy(v);
        else if (key == "cluster") cluster = partition::parse_backend(v);
        else if (key == "dimred") dimred = partition::parse_dimred(v);
        else if (key == "k") k = as_int(key, v);
        else if (key == "bootstrap_n") bootstrap_n = as_int(key, v);
        else if (key == "pool_size") pool_size = as_int(key, v);
        else if (key == "eval_size") eval_size = as_int(key, v);
        else if (key == "init_per_region") init_per_region = as_int(key, v);
        else if (key == "steps") steps = as_int(key, v);
        else if (key == "kappa") kappa = as_int(key, v);
        else if (key == "epsilon") epsilon = io::parse_double(v);
        else if (key == "theta") theta = as_int(key, v);
        else if (key == "optimistic_lp") optimistic_lp = io::parse_double(v);
        else if (key == "epochs_per_step") epochs_per_step = as_int(key, v);
        else if (key == "batch_size") batch_size = as_int(key, v);
        else if (key == "model") model = parse_model_kind(v);
        else if (key == "fm_activation") fm_activation = parse_activation(v);
        else if (key == "hidden_units") hidden_units = as_int(key, v);
        else if (key == "learning_rate") learning_rate = io::parse_double(v);
        else if (key == "encoder_epochs") encoder_epochs = as_int(key, v);
        else if (key == "vae_epochs") vae_epochs = as_int(key, v);
        else if (key == "vae_restarts") vae_restarts = as_int(key, v);
        else if (key == "ae_epochs") ae_epochs = as_int(key, v);
        else if (key.starts_with("world.")) set_world(key.substr(6), io::parse_double(v));
        else throw io::FormatError("unknown config key '" + key + "'");
      } catch (const nn::ContractError& e) {
        throw io::FormatError("key '" + key + "': " + e.what());
      }
    }
  }

  static ExperimentConfig from_key_values(const io::KeyValues& kv) {
    ExperimentConfig c;
    c.apply(kv);
    return c;
  }

  static ExperimentConfig load(const std::filesystem::path& path) {
    auto in = io::open_in(path);
    return from_key_values(io::parse_key_values(in));
  }

  void save(const std::filesystem::path& path) const {
    auto out = io::open_out(path);
    io::write_key_values(out, to_key_values());
  }

  /// OAO_SEED, when set, replaces the master seed.
  void apply_env() {
    if (const char* s = std::getenv("OAO_SEED"); s != nullptr && *s != '\0') seed = parse_seed(s);
  }

  static std::uint64_t parse_seed(std::string_view v) {
    std::uint64_t out = 0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
      throw io::FormatError("seed is not an unsigned integer: '" + std::string(v) + "'");
    return out;
  }

  learner::ModelConfig model_config() const {
    learner::ModelConfig m;
    m.kind = model;
    m.hidden = hidden_units;
    m.hidden_activation = fm_activation;
    m.epochs = epochs_per_step;
    m.batch_size = batch_size;
    m.optimizer.learning_rate = learning_rate;
    return m;
  }

  learner::LpConfig lp_config() const { return {theta, optimistic_lp}; }

  partition::PartitionConfig partition_config() const {
    partition::PartitionConfig p;
    p.strategy = strategy;
    p.backend = cluster;
    p.dimred = dimred;
    p.k = k;
    p.vae.epochs = vae_epochs;
    p.vae.restarts = vae_restarts;
    p.ae.epochs = ae_epochs;
    return p;
  }

  /// Fields that determine the shared bootstrap (data, encoder, normalizer).
  std::string bootstrap_key() const {
    std::string s = std::to_string(seed) + '/' + std::to_string(bootstrap_n) + '/' + std::to_string(pool_size) + '/' +
                    std::to_string(eval_size) + '/' + std::to_string(encoder_epochs);
    for (const auto& [name, member] : world_keys()) s += '/' + io::format_double(world.*member);
    return s;
  }

 private:
  void set_world(const std::string& name, double v) {
    for (const auto& [n, member] : world_keys()) {
      if (name == n) {
        world.*member = v;
        return;
      }
    }
    throw io::FormatError("unknown world constant '" + name + "'");
  }
};

// ---------------------------------------------------------------------------
// Shared bootstrap

/// Everything a run derives from its master seed before region formation.
/// Strategies and ablation cells of one replicate share it, so their
/// comparison isolates partitioning.
struct SharedBootstrap {
  std::string key;
  std::vector<world::Interaction> bootstrap;
  std::vector<world::Interaction> pool;
  std::vector<world::Interaction> eval;
  perception::ObjectEncoder encoder;
  latent::OutcomeNormalizer normalizer;
  double seconds = 0.0;
};

inline std::shared_ptr<const SharedBootstrap> make_shared_bootstrap(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  auto sb = std::make_shared<SharedBootstrap>();
  sb->key = cfg.bootstrap_key();
  const auto n_boot = static_cast<std::uint64_t>(cfg.bootstrap_n);
  const auto n_pool = static_cast<std::uint64_t>(cfg.pool_size);
  sb->bootstrap =
      world::generate_dataset(world::balanced_counts(cfg.bootstrap_n), derive_seed(cfg.seed, "world"), cfg.world, 0);
  sb->pool =
      world::generate_dataset(world::balanced_counts(cfg.pool_size), derive_seed(cfg.seed, "pool"), cfg.world, n_boot);
  sb->eval = world::generate_dataset(world::balanced_counts(cfg.eval_size), derive_seed(cfg.seed, "eval"), cfg.world,
                                     n_boot + n_pool);
  std::vector<world::DepthImage> images;
  images.reserve(sb->bootstrap.size());
  for (const auto& x : sb->bootstrap) images.push_back(x.depth);
  perception::EncoderConfig ecfg;
  ecfg.epochs = cfg.encoder_epochs;
  Rng rng = make_rng(cfg.seed, "encoder");
  sb->encoder = perception::train_encoder(images, ecfg, rng);
  perception::encode_all(sb->encoder, sb->bootstrap);
  perception::encode_all(sb->encoder, sb->pool);
  perception::encode_all(sb->encoder, sb->eval);
  sb->normalizer = latent::OutcomeNormalizer::fit(sb->bootstrap);
  sb->seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return sb;
}

/// Fitted partitioners of one shared bootstrap, keyed by everything that
/// shapes the regions. A latent space (VAE, PCA or autoencoder) is fitted
/// once and reused by both cluster backends.
class PartitionCache {
 public:
  std::shared_ptr<const partition::Partitioner> get(const ExperimentConfig& cfg, const SharedBootstrap& sb) {
    const auto pc = cfg.partition_config();
    const std::string key = region_key(cfg);
    std::lock_guard lock(mutex_);
    if (auto it = fitted_.find(key); it != fitted_.end()) return it->second;
    const std::uint64_t seed = derive_seed(cfg.seed, "partition");
    std::shared_ptr<const partition::Partitioner> p;
    if (auto it = spaces_.find(space_key(cfg)); it != spaces_.end() && pc.strategy == partition::Strategy::latent) {
      p = std::make_shared<partition::Partitioner>(
          partition::Partitioner::fit_with_space(pc, *it->second, sb.bootstrap, seed));
    } else {
      p = std::make_shared<partition::Partitioner>(
          partition::Partitioner::fit(pc, sb.bootstrap, sb.normalizer, seed));
    }
    if (pc.strategy == partition::Strategy::latent) spaces_.emplace(space_key(cfg), p);
    fitted_.emplace(key, p);
    return p;
  }

 private:
  static std::string space_key(const ExperimentConfig& c) {
    std::string s = std::to_string(c.seed) + '/' + partition::to_string(c.strategy);
    if (c.strategy == partition::Strategy::latent) {
      s += '/' + std::string(partition::to_string(c.dimred));
      if (c.dimred == partition::DimRed::vae) s += '/' + std::to_string(c.vae_epochs) + '/' + std::to_string(c.vae_restarts);
      if (c.dimred == partition::DimRed::ae) s += '/' + std::to_string(c.ae_epochs);
    }
    return s;
  }
  static std::string region_key(const ExperimentConfig& c) {
    if (c.strategy == partition::Strategy::random || c.cluster == partition::Backend::random)
      return std::to_string(c.seed) + "/random/" + std::to_string(c.k);
    return space_key(c) + '/' + partition::to_string(c.cluster) + '/' + std::to_string(c.k);
  }

  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const partition::Partitioner>> spaces_;
  std::map<std::string, std::shared_ptr<const partition::Partitioner>> fitted_;
};

// ---------------------------------------------------------------------------
// Run records

struct StepRecord {
  int step = 0;  // 1-based
  std::vector<double> lp;  // per region, as seen by the selection
  int selected = 0;
  bool greedy = true;
  int moved = 0;
  double e_n = 0.0;
  double weighted_mse = 0.0;
};

inline constexpr int kLabelCount = 6;

struct RegionMeta {
  int id = 0;
  int pool_size = 0;   // candidates assigned at bootstrap
  int eval_count = 0;  // eval items assigned
  std::array<int, kLabelCount> label_counts{};  // over the assigned pool
  int majority_label = -1;
  double purity = 0.0;
  double init_error = 0.0;
  int visits = 0;
  int train_size = 0;
  bool exhausted = false;
};

struct Timing {
  double bootstrap_seconds = 0.0;
  double partition_seconds = 0.0;
  double loop_seconds = 0.0;
};

struct RunLog {
  ExperimentConfig config;
  std::vector<RegionMeta> regions;
  std::vector<StepRecord> steps;
  double initial_weighted_mse = 0.0;
  Timing timing;

  double final_weighted_mse() const { return steps.empty() ? initial_weighted_mse : steps.back().weighted_mse; }
};

// ---------------------------------------------------------------------------
// Exploration state

struct ExplorationState {
  ExperimentConfig cfg;
  std::shared_ptr<const SharedBootstrap> shared;
  std::shared_ptr<const partition::Partitioner> partitioner;
  learner::ModelConfig model_cfg;
  learner::LpConfig lp_cfg;
  learner::Samples pool_samples;
  learner::Samples eval_samples;
  std::vector<int> eval_region;
  std::vector<std::vector<Eigen::Index>> eval_members;  // eval indices per region
  VectorXd eval_error;                                  // per-item MSE
  std::vector<learner::RegionState> regions;
  std::vector<RegionMeta> meta;
  Rng loop_rng;
  int step = 0;
};

/// Count-weighted mean sum(n_i * psi_i) / sum(n_i). Regions with n_i = 0
/// contribute nothing.
inline double weighted_mse(std::span<const double> psi, std::span<const int> counts) {
  if (psi.size() != counts.size()) throw nn::ContractError("weighted_mse: length mismatch");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    if (counts[i] < 0) throw nn::ContractError("weighted_mse: negative count");
    if (counts[i] == 0) continue;
    num += counts[i] * psi[i];
    den += counts[i];
  }
  return den > 0.0 ? num / den : 0.0;
}

/// Per-region mean error psi_i over the eval set and the weighted MSE.
inline double weighted_mse(const ExplorationState& s) {
  std::vector<double> psi(s.regions.size(), 0.0);
  std::vector<int> counts(s.regions.size(), 0);
  for (std::size_t r = 0; r < s.regions.size(); ++r) {
    counts[r] = static_cast<int>(s.eval_members[r].size());
    double sum = 0.0;
    for (auto j : s.eval_members[r]) sum += s.eval_error[j];
    if (counts[r] > 0) psi[r] = sum / counts[r];
  }
  return weighted_mse(psi, counts);
}

namespace detail {

inline void refresh_eval(ExplorationState& s, int region) {
  const auto& members = s.eval_members[static_cast<std::size_t>(region)];
  if (members.empty()) return;
  const auto n = static_cast<Eigen::Index>(members.size());
  MatrixXd x(learner::kInputDim, n), y(learner::kOutputDim, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    x.col(j) = s.eval_samples.inputs.col(members[static_cast<std::size_t>(j)]);
    y.col(j) = s.eval_samples.targets.col(members[static_cast<std::size_t>(j)]);
  }
  const VectorXd e = learner::per_item_mse(s.regions[static_cast<std::size_t>(region)].model.forward_batch(x), y);
  for (Eigen::Index j = 0; j < n; ++j) s.eval_error[members[static_cast<std::size_t>(j)]] = e[j];
}

}  // namespace detail

/// Regions, pools and initialized models from explicit region ids of the
/// pool and eval sets.
inline ExplorationState bootstrap(const ExperimentConfig& cfg, std::shared_ptr<const SharedBootstrap> shared,
                                  std::shared_ptr<const partition::Partitioner> partitioner,
                                  const std::vector<int>& pool_region, std::vector<int> eval_region) {
  cfg.validate();
  if (shared->key != cfg.bootstrap_key()) throw nn::ContractError("shared bootstrap does not match the config");
  if (pool_region.size() != shared->pool.size() || eval_region.size() != shared->eval.size())
    throw nn::ContractError("one region id per pool and eval interaction");
  for (const std::vector<int>* ids : {&pool_region, static_cast<const std::vector<int>*>(&eval_region)})
    for (int r : *ids)
      if (r < 0 || r >= cfg.k) throw nn::ContractError("region id out of range");
  ExplorationState s;
  s.cfg = cfg;
  s.shared = shared;
  s.partitioner = partitioner;
  s.model_cfg = cfg.model_config();
  s.lp_cfg = cfg.lp_config();
  s.loop_rng = make_rng(cfg.seed, "loop");
  s.pool_samples = learner::make_samples(shared->pool, shared->normalizer, cfg.model);
  s.eval_samples = learner::make_samples(shared->eval, shared->normalizer, cfg.model);

  const auto k = static_cast<std::size_t>(cfg.k);
  s.eval_region = std::move(eval_region);
  s.meta.resize(k);
  s.eval_members.assign(k, {});
  s.regions.reserve(k);
  for (std::size_t r = 0; r < k; ++r) {
    Rng mrng = make_rng(cfg.seed, "model", r);
    s.regions.emplace_back(static_cast<int>(r), s.model_cfg, mrng);
    s.meta[r].id = static_cast<int>(r);
  }
  for (std::size_t j = 0; j < pool_region.size(); ++j) {
    const auto r = static_cast<std::size_t>(pool_region[j]);
    s.regions[r].pool.push_back(j);
    s.meta[r].label_counts[static_cast<std::size_t>(shared->pool[j].label(cfg.world.lift_threshold).index())]++;
  }
  for (std::size_t j = 0; j < s.eval_region.size(); ++j)
    s.eval_members[static_cast<std::size_t>(s.eval_region[j])].push_back(static_cast<Eigen::Index>(j));
  for (std::size_t r = 0; r < k; ++r) {
    auto& m = s.meta[r];
    m.pool_size = static_cast<int>(s.regions[r].pool.size());
    m.eval_count = static_cast<int>(s.eval_members[r].size());
    if (m.pool_size == 0)
      throw std::runtime_error("region " + std::to_string(r) + " received no pool candidates (degenerate clustering)");
    const auto best = std::max_element(m.label_counts.begin(), m.label_counts.end());
    m.majority_label = static_cast<int>(best - m.label_counts.begin());
    m.purity = static_cast<double>(*best) / m.pool_size;
  }

  s.eval_error = VectorXd::Zero(static_cast<Eigen::Index>(shared->eval.size()));
  for (std::size_t r = 0; r < k; ++r) {
    auto& rs = s.regions[r];
    rs.draw(static_cast<std::size_t>(cfg.init_per_region), s.loop_rng);
    s.meta[r].init_error = learner::train_region(rs, s.pool_samples, s.model_cfg, s.loop_rng);
    detail::refresh_eval(s, static_cast<int>(r));
  }
  return s;
}

/// Regions, pools and initialized models for one configuration, with
/// regions assigned by the fitted partitioner.
inline ExplorationState bootstrap(const ExperimentConfig& cfg, std::shared_ptr<const SharedBootstrap> shared,
                                  std::shared_ptr<const partition::Partitioner> partitioner) {
  if (partitioner->k() != cfg.k) throw nn::ContractError("partitioner k does not match the config");
  const auto pool_region = partitioner->assign(shared->pool);
  auto eval_region = partitioner->assign(shared->eval);
  return bootstrap(cfg, std::move(shared), std::move(partitioner), pool_region, std::move(eval_region));
}

/// Epsilon-greedy choice over regions whose LP is not -inf (not exhausted).
/// nullopt when every region is exhausted. The bool is true for a greedy
/// pick.
inline std::optional<std::pair<int, bool>> select_region(std::span<const double> lps, double epsilon, Rng& rng) {
  if (lps.empty()) throw nn::ContractError("select_region: no regions");
  std::vector<int> open;
  for (std::size_t i = 0; i < lps.size(); ++i)
    if (lps[i] != -std::numeric_limits<double>::infinity()) open.push_back(static_cast<int>(i));
  if (open.empty()) return std::nullopt;
  if (uniform01(rng) < epsilon) return std::pair{open[uniform_index(rng, open.size())], false};
  int best = open.front();
  for (int i : open)
    if (lps[static_cast<std::size_t>(i)] > lps[static_cast<std::size_t>(best)]) best = i;
  return std::pair{best, true};
}

/// One cycle: LP for every region, selection, kappa new candidates, five
/// training epochs, error bookkeeping and evaluation. nullopt when all
/// regions are exhausted.
inline std::optional<StepRecord> explore_step(ExplorationState& s) {
  StepRecord rec;
  rec.lp.reserve(s.regions.size());
  for (const auto& rs : s.regions) rec.lp.push_back(rs.learning_progress(s.lp_cfg));
  const auto choice = select_region(rec.lp, s.cfg.epsilon, s.loop_rng);
  if (!choice) return std::nullopt;
  rec.step = ++s.step;
  rec.selected = choice->first;
  rec.greedy = choice->second;
  auto& rs = s.regions[static_cast<std::size_t>(rec.selected)];
  rec.moved = static_cast<int>(rs.draw(static_cast<std::size_t>(s.cfg.kappa), s.loop_rng));
  rec.e_n = learner::train_region(rs, s.pool_samples, s.model_cfg, s.loop_rng);
  detail::refresh_eval(s, rec.selected);
  rec.weighted_mse = weighted_mse(s);
  if (!std::isfinite(rec.weighted_mse))
    throw nn::NumericError("region " + std::to_string(rec.selected) + ": non-finite weighted MSE", 1);
  s.meta[static_cast<std::size_t>(rec.selected)].visits++;
  return rec;
}

namespace detail {

inline std::pair<RunLog, ExplorationState> execute(const ExperimentConfig& cfg,
                                                   std::shared_ptr<const SharedBootstrap> shared,
                                                   PartitionCache& cache) {
  RunLog log;
  log.config = cfg;
  log.timing.bootstrap_seconds = shared->seconds;
  const auto t0 = std::chrono::steady_clock::now();
  auto partitioner = cache.get(cfg, *shared);
  const auto t1 = std::chrono::steady_clock::now();
  log.timing.partition_seconds = std::chrono::duration<double>(t1 - t0).count();
  ExplorationState s = bootstrap(cfg, std::move(shared), std::move(partitioner));
  log.initial_weighted_mse = weighted_mse(s);
  log.steps.reserve(static_cast<std::size_t>(cfg.steps));
  for (int i = 0; i < cfg.steps; ++i) {
    auto rec = explore_step(s);
    if (!rec) break;
    log.steps.push_back(std::move(*rec));
  }
  for (std::size_t r = 0; r < s.regions.size(); ++r) {
    s.meta[r].train_size = static_cast<int>(s.regions[r].train.size());
    s.meta[r].exhausted = s.regions[r].exhausted;
  }
  log.regions = s.meta;
  log.timing.loop_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();
  return {std::move(log), std::move(s)};
}

}  // namespace detail

/// Bootstrap followed by `steps` exploration steps, stopping early only if
/// every region is exhausted.
inline RunLog run(const ExperimentConfig& cfg, std::shared_ptr<const SharedBootstrap> shared,
                  PartitionCache& cache) {
  return detail::execute(cfg, std::move(shared), cache).first;
}

inline RunLog run(const ExperimentConfig& cfg) {
  PartitionCache cache;
  return run(cfg, make_shared_bootstrap(cfg), cache);
}

// ---------------------------------------------------------------------------
// Persistence. A run directory holds
//   config.txt    key = value snapshot
//   steps.csv     step,selected_region,greedy,lp_0..lp_{k-1},moved,e_n,weighted_mse
//   regions.csv   id,pool_size,eval_count,label_0..label_5,majority_label,purity,
//                 init_error,visits,train_size,exhausted
//   summary.txt   initial and final weighted MSE, completed steps
//   timing.txt    wall-clock seconds (the only non-deterministic file)
//   models/       encoder.oao1, normalizer.txt, partitioner.oaop, region_<i>.oao1

inline void write_steps_csv(std::ostream& out, const std::vector<StepRecord>& steps, int k) {
  out << "step,selected_region,greedy";
  for (int i = 0; i < k; ++i) out << ",lp_" << i;
  out << ",moved,e_n,weighted_mse\n";
  for (const auto& r : steps) {
    out << r.step << ',' << r.selected << ',' << (r.greedy ? 1 : 0);
    for (double v : r.lp) out << ',' << io::format_double(v);
    out << ',' << r.moved << ',' << io::format_double(r.e_n) << ',' << io::format_double(r.weighted_mse) << '\n';
  }
}

inline std::vector<StepRecord> read_steps_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw io::FormatError("steps.csv: missing header");
  const auto header = io::split(line, ',');
  if (header.size() < 6 || header[0] != "step") throw io::FormatError("steps.csv: bad header");
  const std::size_t k = header.size() - 6;
  std::vector<StepRecord> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = io::split(line, ',');
    if (f.size() != header.size()) throw io::FormatError("steps.csv line " + std::to_string(lineno) + ": field count");
    StepRecord r;
    r.step = std::stoi(f[0]);
    r.selected = std::stoi(f[1]);
    r.greedy = f[2] == "1";
    for (std::size_t i = 0; i < k; ++i) r.lp.push_back(io::parse_double(f[3 + i]));
    r.moved = std::stoi(f[3 + k]);
    r.e_n = io::parse_double(f[4 + k]);
    r.weighted_mse = io::parse_double(f[5 + k]);
    out.push_back(std::move(r));
  }
  return out;
}

inline void write_regions_csv(std::ostream& out, const std::vector<RegionMeta>& regions) {
  out << "id,pool_size,eval_count";
  for (int i = 0; i < kLabelCount; ++i) out << ",label_" << i;
  out << ",majority_label,purity,init_error,visits,train_size,exhausted\n";
  for (const auto& m : regions) {
    out << m.id << ',' << m.pool_size << ',' << m.eval_count;
    for (int c : m.label_counts) out << ',' << c;
    out << ',' << m.majority_label << ',' << io::format_double(m.purity) << ',' << io::format_double(m.init_error)
        << ',' << m.visits << ',' << m.train_size << ',' << (m.exhausted ? 1 : 0) << '\n';
  }
}

inline std::vector<RegionMeta> read_regions_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw io::FormatError("regions.csv: missing header");
  std::vector<RegionMeta> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = io::split(line, ',');
    if (f.size() != 3 + kLabelCount + 6) throw io::FormatError("regions.csv: field count");
    RegionMeta m;
    m.id = std::stoi(f[0]);
    m.pool_size = std::stoi(f[1]);
    m.eval_count = std::stoi(f[2]);
    for (std::size_t i = 0; i < kLabelCount; ++i) m.label_counts[i] = std::stoi(f[3 + i]);
    m.majority_label = std::stoi(f[9]);
    m.purity = io::parse_double(f[10]);
    m.init_error = io::parse_double(f[11]);
    m.visits = std::stoi(f[12]);
    m.train_size = std::stoi(f[13]);
    m.exhausted = f[14] == "1";
    out.push_back(m);
  }
  return out;
}

/// Writes the deterministic part of a run directory (everything except
/// models/ and timing.txt).
inline void save_run(const RunLog& log, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  log.config.save(dir / "config.txt");
  {
    auto out = io::open_out(dir / "steps.csv");
    write_steps_csv(out, log.steps, log.config.k);
  }
  {
    auto out = io::open_out(dir / "regions.csv");
    write_regions_csv(out, log.regions);
  }
  {
    auto out = io::open_out(dir / "summary.txt");
    io::write_key_values(out, {{"initial_weighted_mse", io::format_double(log.initial_weighted_mse)},
                               {"final_weighted_mse", io::format_double(log.final_weighted_mse())},
                               {"steps_completed", std::to_string(log.steps.size())}});
  }
  auto out = io::open_out(dir / "timing.txt");
  io::write_key_values(out, {{"bootstrap_seconds", io::format_double(log.timing.bootstrap_seconds)},
                             {"partition_seconds", io::format_double(log.timing.partition_seconds)},
                             {"loop_seconds", io::format_double(log.timing.loop_seconds)}});
}

inline RunLog load_run(const std::filesystem::path& dir) {
  RunLog log;
  log.config = ExperimentConfig::load(dir / "config.txt");
  {
    auto in = io::open_in(dir / "steps.csv");
    log.steps = read_steps_csv(in);
  }
  {
    auto in = io::open_in(dir / "regions.csv");
    log.regions = read_regions_csv(in);
  }
  auto in = io::open_in(dir / "summary.txt");
  const auto kv = io::parse_key_values(in);
  if (auto it = kv.find("initial_weighted_mse"); it != kv.end()) log.initial_weighted_mse = io::parse_double(it->second);
  return log;
}

/// Persists the fitted models of a finished state.
inline void save_models(const ExplorationState& s, const std::filesystem::path& dir) {
  const auto m = dir / "models";
  std::filesystem::create_directories(m);
  {
    auto out = io::open_out(m / "encoder.oao1", true);
    nn::save(out, s.shared->encoder.network());
  }
  {
    auto out = io::open_out(m / "normalizer.txt");
    s.shared->normalizer.save(out);
  }
  {
    auto out = io::open_out(m / "partitioner.oaop", true);
    s.partitioner->save(out);
  }
  for (const auto& rs : s.regions) {
    auto out = io::open_out(m / ("region_" + std::to_string(rs.id) + ".oao1"), true);
    nn::save(out, rs.model);
  }
}

/// `run` plus persistence of the run directory and its models.
inline RunLog run_and_save(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
  PartitionCache cache;
  auto [log, state] = detail::execute(cfg, make_shared_bootstrap(cfg), cache);
  save_run(log, dir);
  save_models(state, dir);
  return log;
}

// ---------------------------------------------------------------------------
// Replicate grids

/// Seed of replicate i under a master seed.
inline std::uint64_t replicate_seed(std::uint64_t master, std::size_t i) {
  return derive_seed(master, "replicate", i);
}

struct GridOptions {
  unsigned workers = 1;
  std::optional<std::filesystem::path> out_dir;
  std::function<void(const std::string&)> progress;
};

/// Runs every variant on every seed. Work is split by seed: each worker
/// builds one shared bootstrap and partition cache per seed and runs all
/// variants on it; identical variants run once. Results are indexed
/// [variant][replicate]. When `out_dir` is set, run i of variant v is saved
/// to out_dir / names[v] / "rep_<i>".
inline std::vector<std::vector<RunLog>> run_grid(const std::vector<ExperimentConfig>& variants,
                                                 const std::vector<std::string>& names,
                                                 std::span<const std::uint64_t> seeds, const GridOptions& opt = {}) {
  if (names.size() != variants.size()) throw nn::ContractError("run_grid: one name per variant");
  std::vector<std::vector<RunLog>> out(variants.size(), std::vector<RunLog>(seeds.size()));
  std::atomic<std::size_t> next{0};
  std::mutex report_mutex;
  std::exception_ptr failure;
  auto worker = [&] {
    while (true) {
      const std::size_t rep = next.fetch_add(1);
      if (rep >= seeds.size()) return;
      try {
        std::map<std::string, std::shared_ptr<const SharedBootstrap>> shared;
        PartitionCache cache;
        std::map<std::string, std::size_t> done;
        for (std::size_t v = 0; v < variants.size(); ++v) {
          ExperimentConfig cfg = variants[v];
          cfg.seed = seeds[rep];
          std::ostringstream key;
          io::write_key_values(key, cfg.to_key_values());
          if (auto it = done.find(key.str()); it != done.end()) {
            out[v][rep] = out[it->second][rep];
          } else {
            auto& sb = shared[cfg.bootstrap_key()];
            if (!sb) sb = make_shared_bootstrap(cfg);
            out[v][rep] = run(cfg, sb, cache);
            done.emplace(key.str(), v);
          }
          if (opt.out_dir) save_run(out[v][rep], *opt.out_dir / names[v] / ("rep_" + std::to_string(rep)));
          if (opt.progress) {
            std::lock_guard lock(report_mutex);
            opt.progress(names[v] + " rep " + std::to_string(rep) + " final " +
                         io::format_double(out[v][rep].final_weighted_mse()));
          }
        }
      } catch (...) {
        std::lock_guard lock(report_mutex);
        if (!failure) failure = std::current_exception();
        next = seeds.size();
        return;
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(opt.workers, static_cast<unsigned>(seeds.size())));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace oao::explorer

#endif  // OAO_EXPLORER_HPP

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
 * @file partition.hpp
 *
 * @brief Region formation: Gaussian mixtures fitted by EM, k-means, PCA and
 * the strategy-specific feature spaces that the regions live in.
 *
 * Points are stored column-wise in a d x n matrix throughout.
 */

#ifndef OAO_PARTITION_HPP
#define OAO_PARTITION_HPP

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oao/io.hpp"
#include "oao/latent.hpp"
#include "oao/nn.hpp"
#include "oao/rng.hpp"
#include "oao/world.hpp"

namespace oao::partition {

using nn::MatrixXd;
using nn::VectorXd;

namespace detail {

/// k-means++ seeding: first centre uniform, then proportional to squared
/// distance to the nearest chosen centre.
inline MatrixXd kmeanspp(const MatrixXd& x, int k, Rng& rng) {
  const auto n = x.cols();
  MatrixXd centres(x.rows(), k);
  centres.col(0) = x.col(static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::size_t>(n))));
  VectorXd d2 = (x.colwise() - centres.col(0)).colwise().squaredNorm().transpose();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      double r = uniform01(rng) * total;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        r -= d2[i];
        if (r < 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::size_t>(n)));
    }
    centres.col(c) = x.col(pick);
    d2 = d2.cwiseMin((x.colwise() - centres.col(c)).colwise().squaredNorm().transpose());
  }
  return centres;
}

/// Index of the nearest centre for every point; ties go to the lowest id.
inline std::vector<int> nearest(const MatrixXd& x, const MatrixXd& centres, VectorXd* dist2 = nullptr) {
  std::vector<int> out(static_cast<std::size_t>(x.cols()));
  if (dist2) dist2->resize(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    int best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < centres.cols(); ++c) {
      const double d = (x.col(j) - centres.col(c)).squaredNorm();
      if (d < bd) bd = d, best = static_cast<int>(c);
    }
    out[static_cast<std::size_t>(j)] = best;
    if (dist2) (*dist2)[j] = bd;
  }
  return out;
}

inline double log_sum_exp(const VectorXd& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Gaussian mixture

struct GmmConfig {
  int max_iterations = 200;
  double tolerance = 1e-6;
  double ridge = 1e-6;
  int restarts = 5;
  double min_weight = 1e-8;
  int max_reseeds = 20;
};

struct GmmModel {
  VectorXd weights;
  std::vector<VectorXd> means;
  std::vector<MatrixXd> covariances;
  std::vector<double> log_likelihood;  // total log-likelihood after every iteration

  int k() const { return static_cast<int>(means.size()); }
  int dim() const { return means.empty() ? 0 : static_cast<int>(means.front().size()); }

  /// log(pi_c) + log N(x | mu_c, Sigma_c) for every component (k x n).
  MatrixXd weighted_log_densities(const MatrixXd& x) const {
    const int d = dim();
    MatrixXd out(k(), x.cols());
    for (int c = 0; c < k(); ++c) {
      Eigen::LLT<MatrixXd> llt(covariances[static_cast<std::size_t>(c)]);
      if (llt.info() != Eigen::Success) throw nn::NumericError("covariance not positive definite", c);
      const MatrixXd l = llt.matrixL();
      const double logdet = 2.0 * l.diagonal().array().log().sum();
      const MatrixXd diff = x.colwise() - means[static_cast<std::size_t>(c)];
      const MatrixXd sol = llt.matrixL().solve(diff);
      const double base = std::log(weights[c]) - 0.5 * (d * std::log(2.0 * std::numbers::pi) + logdet);
      out.row(c) = (base - 0.5 * sol.colwise().squaredNorm().array()).matrix();
    }
    return out;
  }

  /// Posterior responsibilities (k x n); every column sums to 1.
  MatrixXd responsibilities(const MatrixXd& x) const {
    MatrixXd lw = weighted_log_densities(x);
    for (Eigen::Index j = 0; j < lw.cols(); ++j) {
      const double lse = detail::log_sum_exp(lw.col(j));
      lw.col(j) = (lw.col(j).array() - lse).exp().matrix();
    }
    return lw;
  }

  double total_log_likelihood(const MatrixXd& x) const {
    const MatrixXd lw = weighted_log_densities(x);
    double s = 0.0;
    for (Eigen::Index j = 0; j < lw.cols(); ++j) s += detail::log_sum_exp(lw.col(j));
    return s;
  }

  /// Argmax posterior per point; ties go to the lowest component id.
  std::vector<int> assign(const MatrixXd& x) const {
    const MatrixXd lw = weighted_log_densities(x);
    std::vector<int> out(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index j = 0; j < lw.cols(); ++j) {
      int best = 0;
      for (int c = 1; c < k(); ++c)
        if (lw(c, j) > lw(best, j)) best = c;
      out[static_cast<std::size_t>(j)] = best;
    }
    return out;
  }
};

namespace detail {

/// M-step from responsibilities. Returns the id of a component whose weight
/// fell below `min_weight`, if any.
inline std::optional<int> m_step(const MatrixXd& x, const MatrixXd& resp, const GmmConfig& cfg, GmmModel& m) {
  const auto n = static_cast<double>(x.cols());
  const int k = static_cast<int>(resp.rows());
  const auto d = x.rows();
  m.weights.resize(k);
  m.means.assign(static_cast<std::size_t>(k), VectorXd::Zero(d));
  m.covariances.assign(static_cast<std::size_t>(k), MatrixXd::Identity(d, d) * cfg.ridge);
  for (int c = 0; c < k; ++c) {
    const double nk = resp.row(c).sum();
    m.weights[c] = nk / n;
    if (m.weights[c] < cfg.min_weight) return c;
    VectorXd mu = x * resp.row(c).transpose() / nk;
    const MatrixXd diff = x.colwise() - mu;
    m.covariances[static_cast<std::size_t>(c)] +=
        (diff * resp.row(c).asDiagonal() * diff.transpose()) / nk;
    m.means[static_cast<std::size_t>(c)] = std::move(mu);
  }
  return std::nullopt;
}

/// Hard responsibilities from nearest-centre assignment.
inline MatrixXd hard_responsibilities(const MatrixXd& x, const MatrixXd& centres) {
  MatrixXd r = MatrixXd::Zero(centres.cols(), x.cols());
  const auto idx = nearest(x, centres);
  for (Eigen::Index j = 0; j < x.cols(); ++j) r(idx[static_cast<std::size_t>(j)], j) = 1.0;
  return r;
}

/// Replaces centre `c` by the point farthest from its nearest centre.
inline void reseed_farthest(const MatrixXd& x, MatrixXd& centres, int c) {
  VectorXd d2;
  nearest(x, centres, &d2);
  Eigen::Index far = 0;
  d2.maxCoeff(&far);
  centres.col(c) = x.col(far);
}

inline GmmModel fit_gmm_once(const MatrixXd& x, int k, const GmmConfig& cfg, Rng& rng) {
  MatrixXd centres = kmeanspp(x, k, rng);
  GmmModel m;
  MatrixXd resp = hard_responsibilities(x, centres);
  int reseeds = 0;
  while (auto bad = m_step(x, resp, cfg, m)) {
    if (++reseeds > cfg.max_reseeds) throw nn::NumericError("GMM component stays degenerate after reseeding", *bad);
    reseed_farthest(x, centres, *bad);
    resp = hard_responsibilities(x, centres);
  }
  double prev = -std::numeric_limits<double>::infinity();
  for (int it = 0; it < cfg.max_iterations; ++it) {
    // E-step and the log-likelihood of the current parameters.
    MatrixXd lw = m.weighted_log_densities(x);
    double ll = 0.0;
    for (Eigen::Index j = 0; j < lw.cols(); ++j) {
      const double lse = log_sum_exp(lw.col(j));
      ll += lse;
      lw.col(j) = (lw.col(j).array() - lse).exp().matrix();
    }
    m.log_likelihood.push_back(ll);
    if (std::abs(ll - prev) < cfg.tolerance) break;
    prev = ll;
    GmmModel next;
    next.log_likelihood = std::move(m.log_likelihood);
    if (auto bad = m_step(x, lw, cfg, next)) {
      // Restart from the current means with the starved component moved to
      // the worst-explained point; the log restarts with it.
      if (++reseeds > cfg.max_reseeds) throw nn::NumericError("GMM component stays degenerate after reseeding", *bad);
      for (int c = 0; c < k; ++c) centres.col(c) = m.means[static_cast<std::size_t>(c)];
      reseed_farthest(x, centres, *bad);
      resp = hard_responsibilities(x, centres);
      while (auto again = m_step(x, resp, cfg, next)) {
        if (++reseeds > cfg.max_reseeds) throw nn::NumericError("GMM component stays degenerate after reseeding", *again);
        reseed_farthest(x, centres, *again);
        resp = hard_responsibilities(x, centres);
      }
      next.log_likelihood.clear();
      prev = -std::numeric_limits<double>::infinity();
    }
    m = std::move(next);
  }
  return m;
}

}  // namespace detail

/// EM with k-means++ initialization and full covariances; best of
/// `cfg.restarts` fits by final log-likelihood.
inline GmmModel fit_gmm(const MatrixXd& x, int k, const GmmConfig& cfg, Rng& rng) {
  if (k < 1) throw nn::ContractError("k must be >= 1");
  if (x.cols() < static_cast<Eigen::Index>(k) * (x.rows() + 1))
    throw nn::ContractError("fit_gmm needs at least k*(d+1) points");
  std::optional<GmmModel> best;
  for (int r = 0; r < std::max(1, cfg.restarts); ++r) {
    GmmModel m = detail::fit_gmm_once(x, k, cfg, rng);
    if (!best || m.log_likelihood.back() > best->log_likelihood.back()) best = std::move(m);
  }
  return std::move(*best);
}

// ---------------------------------------------------------------------------
// K-means

struct KMeansConfig {
  int max_iterations = 200;
  int restarts = 5;
};

struct KMeansModel {
  MatrixXd centroids;  // d x k
  double inertia = 0.0;
  int iterations = 0;

  int k() const { return static_cast<int>(centroids.cols()); }
  std::vector<int> assign(const MatrixXd& x) const { return detail::nearest(x, centroids); }
};

namespace detail {

inline KMeansModel fit_kmeans_once(const MatrixXd& x, int k, const KMeansConfig& cfg, Rng& rng) {
  KMeansModel m;
  m.centroids = kmeanspp(x, k, rng);
  std::vector<int> labels;
  for (int it = 0; it < cfg.max_iterations; ++it) {
    auto next = nearest(x, m.centroids);
    m.iterations = it + 1;
    if (next == labels) break;
    labels = std::move(next);
    MatrixXd sums = MatrixXd::Zero(x.rows(), k);
    VectorXd counts = VectorXd::Zero(k);
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      sums.col(labels[static_cast<std::size_t>(j)]) += x.col(j);
      counts[labels[static_cast<std::size_t>(j)]] += 1.0;
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0.0) {
        m.centroids.col(c) = sums.col(c) / counts[c];
      } else {
        reseed_farthest(x, m.centroids, c);
        labels.clear();
      }
    }
  }
  VectorXd d2;
  nearest(x, m.centroids, &d2);
  m.inertia = d2.sum();
  return m;
}

}  // namespace detail

/// k-means++ then Lloyd iterations to a fixpoint; best of `cfg.restarts`
/// runs by inertia.
inline KMeansModel fit_kmeans(const MatrixXd& x, int k, const KMeansConfig& cfg, Rng& rng) {
  if (k < 1 || x.cols() < k) throw nn::ContractError("fit_kmeans needs 1 <= k <= n");
  std::optional<KMeansModel> best;
  for (int r = 0; r < std::max(1, cfg.restarts); ++r) {
    auto m = detail::fit_kmeans_once(x, k, cfg, rng);
    if (!best || m.inertia < best->inertia) best = std::move(m);
  }
  return std::move(*best);
}

// ---------------------------------------------------------------------------
// PCA

struct PcaProjector {
  MatrixXd components;  // out_dim x d, orthonormal rows
  VectorXd mean;
  VectorXd variances;  // eigenvalues of the retained components, descending

  MatrixXd project(const MatrixXd& x) const { return components * (x.colwise() - mean); }
  MatrixXd reconstruct(const MatrixXd& z) const { return (components.transpose() * z).colwise() + mean; }
};

/// Top `out_dim` eigenvectors of the sample covariance. Throws ContractError
/// when the covariance rank is below `out_dim`.
inline PcaProjector fit_pca(const MatrixXd& x, int out_dim = 3) {
  if (out_dim < 1 || out_dim > x.rows()) throw nn::ContractError("out_dim outside [1, d]");
  if (x.cols() < out_dim + 1) throw nn::ContractError("fit_pca needs at least out_dim + 1 points");
  PcaProjector p;
  p.mean = x.rowwise().mean();
  const MatrixXd c = x.colwise() - p.mean;
  const MatrixXd cov = c * c.transpose() / static_cast<double>(x.cols() - 1);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(cov);
  const VectorXd vals = es.eigenvalues().reverse();
  const double tol = std::max(vals[0], 1e-300) * 1e-12 * static_cast<double>(x.rows());
  int rank = 0;
  while (rank < vals.size() && vals[rank] > tol) ++rank;
  if (rank < out_dim)
    throw nn::ContractError("covariance has rank " + std::to_string(rank) + ", below out_dim " + std::to_string(out_dim));
  p.components = es.eigenvectors().rowwise().reverse().leftCols(out_dim).transpose();
  p.variances = vals.head(out_dim);
  return p;
}

// ---------------------------------------------------------------------------
// Strategies and the partitioner

enum class Strategy : std::uint8_t { latent = 0, object = 1, action = 2, outcome = 3, random = 4 };
enum class Backend : std::uint8_t { gmm = 0, kmeans = 1, random = 2 };
enum class DimRed : std::uint8_t { vae = 0, pca = 1, ae = 2 };

inline constexpr std::array<Strategy, 5> kStrategies = {Strategy::latent, Strategy::object, Strategy::action,
                                                       Strategy::outcome, Strategy::random};

inline const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::latent: return "latent";
    case Strategy::object: return "object";
    case Strategy::action: return "action";
    case Strategy::outcome: return "outcome";
    case Strategy::random: return "random";
  }
  return "?";
}
inline const char* to_string(Backend b) {
  switch (b) {
    case Backend::gmm: return "gmm";
    case Backend::kmeans: return "kmeans";
    case Backend::random: return "random";
  }
  return "?";
}
inline const char* to_string(DimRed d) {
  switch (d) {
    case DimRed::vae: return "vae";
    case DimRed::pca: return "pca";
    case DimRed::ae: return "ae";
  }
  return "?";
}

template <typename E, std::size_t N>
E parse_enum(std::string_view text, const std::array<E, N>& values, std::string_view what) {
  for (E v : values)
    if (text == to_string(v)) return v;
  throw nn::ContractError("unknown " + std::string(what) + " '" + std::string(text) + "'");
}
inline Strategy parse_strategy(std::string_view s) { return parse_enum(s, kStrategies, "strategy"); }
inline Backend parse_backend(std::string_view s) {
  return parse_enum(s, std::array{Backend::gmm, Backend::kmeans, Backend::random}, "cluster backend");
}
inline DimRed parse_dimred(std::string_view s) {
  return parse_enum(s, std::array{DimRed::vae, DimRed::pca, DimRed::ae}, "dimensionality reduction");
}

struct PartitionConfig {
  Strategy strategy = Strategy::latent;
  Backend backend = Backend::gmm;
  DimRed dimred = DimRed::vae;
  int k = 5;
  GmmConfig gmm = {};
  KMeansConfig kmeans = {};
  latent::VaeConfig vae = {};
  latent::AutoencoderConfig ae = {};
};

/// Frozen regions over one strategy's feature space.
class Partitioner {
 public:
  Partitioner() = default;

  const PartitionConfig& config() const { return cfg_; }
  Strategy strategy() const { return cfg_.strategy; }
  int k() const { return cfg_.k; }
  bool is_random() const { return cfg_.strategy == Strategy::random || cfg_.backend == Backend::random; }
  const std::optional<latent::VaeModel>& vae() const { return vae_; }
  const std::optional<GmmModel>& gmm() const { return gmm_; }
  const std::optional<KMeansModel>& kmeans() const { return kmeans_; }
  const latent::OutcomeNormalizer& normalizer() const { return norm_; }

  /// Feature-space coordinates (one column per interaction). Empty for the
  /// random strategy.
  MatrixXd features(std::span<const world::Interaction> data) const {
    const auto n = static_cast<Eigen::Index>(data.size());
    switch (cfg_.strategy) {
      case Strategy::latent: {
        const MatrixXd f = latent::to_matrix(latent::build_features(data, norm_));
        switch (cfg_.dimred) {
          case DimRed::vae: return latent::embed_batch(*vae_, f);
          case DimRed::pca: return pca_->project(f);
          case DimRed::ae: return ae_->embed_batch(f);
        }
        break;
      }
      case Strategy::object: {
        MatrixXd m(latent::kObjectDim, n);
        for (Eigen::Index j = 0; j < n; ++j) {
          const auto& x = data[static_cast<std::size_t>(j)];
          if (!x.i_enc) throw nn::ContractError("interaction has no object encoding");
          for (int i = 0; i < latent::kObjectDim; ++i) m(i, j) = (*x.i_enc)[static_cast<std::size_t>(i)];
        }
        return m;
      }
      case Strategy::action: {
        MatrixXd m(latent::kActionDim, n);
        for (Eigen::Index j = 0; j < n; ++j) {
          const auto a = latent::normalize_action(data[static_cast<std::size_t>(j)].action);
          for (int i = 0; i < latent::kActionDim; ++i) m(i, j) = a[static_cast<std::size_t>(i)];
        }
        return m;
      }
      case Strategy::outcome: {
        MatrixXd m(latent::kOutcomeDim, n);
        for (Eigen::Index j = 0; j < n; ++j) {
          const auto o = norm_.apply(data[static_cast<std::size_t>(j)].outcome);
          for (int i = 0; i < latent::kOutcomeDim; ++i) m(i, j) = o[static_cast<std::size_t>(i)];
        }
        return m;
      }
      case Strategy::random: break;
    }
    return MatrixXd(0, n);
  }

  /// Region id in [0, k) for every interaction.
  std::vector<int> assign(std::span<const world::Interaction> data) const {
    if (is_random()) {
      std::vector<int> out;
      out.reserve(data.size());
      for (const auto& x : data) out.push_back(random_region(x.id));
      return out;
    }
    const MatrixXd f = features(data);
    return cfg_.backend == Backend::gmm ? gmm_->assign(f) : kmeans_->assign(f);
  }

  int assign(const world::Interaction& x) const { return assign(std::span(&x, 1)).front(); }

  /// Seeded hash of the interaction id, uniform over [0, k).
  int random_region(std::uint64_t id) const {
    return static_cast<int>(mix64(seed_ ^ mix64(id)) % static_cast<std::uint64_t>(cfg_.k));
  }

  /// Fits the feature space and the cluster backend on `bootstrap`, whose
  /// interactions must carry object encodings.
  static Partitioner fit(const PartitionConfig& cfg, std::span<const world::Interaction> bootstrap,
                         const latent::OutcomeNormalizer& norm, std::uint64_t seed) {
    if (cfg.k < 1) throw nn::ContractError("k must be >= 1");
    Partitioner p;
    p.cfg_ = cfg;
    p.norm_ = norm;
    p.seed_ = seed;
    if (p.is_random()) return p;
    if (cfg.strategy == Strategy::latent) {
      const auto feats = latent::build_features(bootstrap, norm);
      Rng rng = make_rng(seed, "space");
      switch (cfg.dimred) {
        case DimRed::vae: p.vae_ = latent::train_vae(feats, cfg.vae, rng); break;
        case DimRed::pca: p.pca_ = fit_pca(latent::to_matrix(feats), latent::kLatentDim); break;
        case DimRed::ae: p.ae_ = latent::train_autoencoder(feats, cfg.ae, rng); break;
      }
    }
    p.fit_backend(p.features(bootstrap), seed);
    return p;
  }

  /// Fits the cluster backend on precomputed feature coordinates, reusing
  /// an already trained latent model.
  static Partitioner fit_with_space(const PartitionConfig& cfg, const Partitioner& space,
                                    std::span<const world::Interaction> bootstrap, std::uint64_t seed) {
    Partitioner p = space;
    p.cfg_ = cfg;
    p.seed_ = seed;
    p.gmm_.reset();
    p.kmeans_.reset();
    if (!p.is_random()) p.fit_backend(p.features(bootstrap), seed);
    return p;
  }

  void save(std::ostream& out) const;
  static Partitioner load(std::istream& in);

 private:
  void fit_backend(const MatrixXd& f, std::uint64_t seed) {
    Rng rng = make_rng(seed, "cluster");
    if (cfg_.backend == Backend::gmm) {
      gmm_ = fit_gmm(f, cfg_.k, cfg_.gmm, rng);
    } else {
      kmeans_ = fit_kmeans(f, cfg_.k, cfg_.kmeans, rng);
    }
  }

  PartitionConfig cfg_;
  latent::OutcomeNormalizer norm_;
  std::uint64_t seed_ = 0;
  std::optional<latent::VaeModel> vae_;
  std::optional<PcaProjector> pca_;
  std::optional<latent::PlainAutoencoder> ae_;
  std::optional<GmmModel> gmm_;
  std::optional<KMeansModel> kmeans_;
};

// ---------------------------------------------------------------------------
// Persistence: "OAOP" block.
//   magic "OAOP", u32 version=1, u8 strategy, u8 backend, u8 dimred, u32 k,
//   u64 seed, 10 x f64 normalizer (min[5], max[5]),
//   u8 has_space then the space model (vae: two OAO1 networks + f64 beta;
//   pca: u32 rows, u32 cols, components row-major, mean, variances;
//   ae: u32 code_layer + OAO1 network),
//   u8 has_backend then (gmm: weights, means, covariances row-major;
//   kmeans: centroids column-major, f64 inertia).

namespace detail {

inline void write_matrix(std::ostream& out, const MatrixXd& m) {
  io::write_u32(out, static_cast<std::uint32_t>(m.rows()));
  io::write_u32(out, static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) io::write_f64(out, m(i, j));
}

inline MatrixXd read_matrix(std::istream& in) {
  const auto r = io::read_u32(in), c = io::read_u32(in);
  if (static_cast<std::uint64_t>(r) * c > (1u << 26)) throw io::FormatError("matrix block too large");
  MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = io::read_f64(in);
  return m;
}

}  // namespace detail

inline void Partitioner::save(std::ostream& out) const {
  io::write_magic(out, "OAOP");
  io::write_u32(out, 1);
  io::write_u8(out, static_cast<std::uint8_t>(cfg_.strategy));
  io::write_u8(out, static_cast<std::uint8_t>(cfg_.backend));
  io::write_u8(out, static_cast<std::uint8_t>(cfg_.dimred));
  io::write_u32(out, static_cast<std::uint32_t>(cfg_.k));
  io::write_u64(out, seed_);
  for (double v : norm_.min()) io::write_f64(out, v);
  for (double v : norm_.max()) io::write_f64(out, v);
  const bool has_space = vae_ || pca_ || ae_;
  io::write_u8(out, has_space ? 1 : 0);
  if (vae_) {
    nn::save(out, vae_->encoder);
    nn::save(out, vae_->decoder);
    io::write_f64(out, vae_->beta_kl);
  } else if (pca_) {
    detail::write_matrix(out, pca_->components);
    detail::write_matrix(out, pca_->mean);
    detail::write_matrix(out, pca_->variances);
  } else if (ae_) {
    io::write_u32(out, static_cast<std::uint32_t>(ae_->code_layer));
    nn::save(out, ae_->net);
  }
  io::write_u8(out, gmm_ || kmeans_ ? 1 : 0);
  if (gmm_) {
    detail::write_matrix(out, gmm_->weights);
    for (const auto& m : gmm_->means) detail::write_matrix(out, m);
    for (const auto& c : gmm_->covariances) detail::write_matrix(out, c);
  } else if (kmeans_) {
    detail::write_matrix(out, kmeans_->centroids);
    io::write_f64(out, kmeans_->inertia);
  }
}

inline Partitioner Partitioner::load(std::istream& in) {
  io::expect_magic(in, "OAOP");
  if (io::read_u32(in) != 1) throw io::FormatError("unsupported OAOP version");
  Partitioner p;
  const auto s = io::read_u8(in), b = io::read_u8(in), d = io::read_u8(in);
  if (s > 4 || b > 2 || d > 2) throw io::FormatError("bad OAOP enum code");
  p.cfg_.strategy = static_cast<Strategy>(s);
  p.cfg_.backend = static_cast<Backend>(b);
  p.cfg_.dimred = static_cast<DimRed>(d);
  p.cfg_.k = static_cast<int>(io::read_u32(in));
  if (p.cfg_.k < 1) throw io::FormatError("OAOP k must be positive");
  p.seed_ = io::read_u64(in);
  latent::OutcomeVector lo{}, hi{};
  for (auto& v : lo) v = io::read_f64(in);
  for (auto& v : hi) v = io::read_f64(in);
  p.norm_ = latent::OutcomeNormalizer(lo, hi);
  if (io::read_u8(in)) {
    if (p.cfg_.strategy != Strategy::latent) throw io::FormatError("space model stored for a non-latent strategy");
    switch (p.cfg_.dimred) {
      case DimRed::vae: {
        latent::VaeModel v;
        v.encoder = nn::load(in);
        v.decoder = nn::load(in);
        v.beta_kl = io::read_f64(in);
        p.vae_ = std::move(v);
        break;
      }
      case DimRed::pca: {
        PcaProjector pca;
        pca.components = detail::read_matrix(in);
        pca.mean = detail::read_matrix(in);
        pca.variances = detail::read_matrix(in);
        p.pca_ = std::move(pca);
        break;
      }
      case DimRed::ae: {
        latent::PlainAutoencoder ae;
        ae.code_layer = static_cast<int>(io::read_u32(in));
        ae.net = nn::load(in);
        p.ae_ = std::move(ae);
        break;
      }
    }
  }
  if (io::read_u8(in)) {
    if (p.cfg_.backend == Backend::gmm) {
      GmmModel g;
      g.weights = detail::read_matrix(in);
      if (g.weights.size() != p.cfg_.k) throw io::FormatError("OAOP weight count differs from k");
      for (int c = 0; c < p.cfg_.k; ++c) g.means.push_back(detail::read_matrix(in));
      for (int c = 0; c < p.cfg_.k; ++c) g.covariances.push_back(detail::read_matrix(in));
      p.gmm_ = std::move(g);
    } else {
      KMeansModel km;
      km.centroids = detail::read_matrix(in);
      km.inertia = io::read_f64(in);
      p.kmeans_ = std::move(km);
    }
  }
  return p;
}

/// Share of the most frequent label among members of each region; NaN for
/// empty regions.
inline std::vector<double> region_purity(std::span<const int> regions, std::span<const int> labels, int k,
                                         int label_count) {
  std::vector<std::vector<int>> counts(static_cast<std::size_t>(k), std::vector<int>(static_cast<std::size_t>(label_count)));
  for (std::size_t i = 0; i < regions.size(); ++i)
    counts[static_cast<std::size_t>(regions[i])][static_cast<std::size_t>(labels[i])]++;
  std::vector<double> out;
  for (const auto& row : counts) {
    int total = 0, best = 0;
    for (int c : row) total += c, best = std::max(best, c);
    out.push_back(total == 0 ? std::nan("") : static_cast<double>(best) / total);
  }
  return out;
}

}  // namespace oao::partition

#endif  // OAO_PARTITION_HPP

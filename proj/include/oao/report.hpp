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
 * @file report.hpp
 *
 * @brief Rank tests, curve smoothing, aggregation over replicate runs and
 * CSV/SVG emission.
 *
 * Mann-Whitney U. U is the statistic of the first sample computed from
 * midranks. The two-sided p is exact (the permutation distribution of the
 * midrank sum, ties included) when n1 + n2 <= 20 and otherwise comes from
 * the normal approximation with continuity correction and tie-adjusted
 * variance.
 *
 * Kruskal-Wallis H is tie-corrected; p is the chi-square survival function
 * with (groups - 1) degrees of freedom, evaluated through the regularized
 * upper incomplete gamma function.
 */

#ifndef OAO_REPORT_HPP
#define OAO_REPORT_HPP

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "oao/explorer.hpp"
#include "oao/io.hpp"

namespace oao::report {

// ---------------------------------------------------------------------------
// Ranks

/// Midranks (1-based, ties averaged) of `values`.
inline std::vector<double> midranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

/// Sum over tie groups of (t^3 - t).
inline double tie_term(std::span<const double> values) {
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  double s = 0.0;
  for (std::size_t i = 0; i < v.size();) {
    std::size_t j = i;
    while (j + 1 < v.size() && v[j + 1] == v[i]) ++j;
    const double t = static_cast<double>(j - i + 1);
    s += t * t * t - t;
    i = j + 1;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Mann-Whitney U

struct MannWhitney {
  double u = 0.0;  // statistic of the first sample
  double p = 1.0;  // two-sided
  bool exact = false;
};

inline constexpr std::size_t kExactMannWhitneyLimit = 20;

namespace detail {

/// Exact two-sided p of the midrank sum of a size-n1 subset. Works on
/// doubled midranks, which are integers.
inline double exact_mann_whitney_p(const std::vector<double>& ranks, std::size_t n1, double observed_sum) {
  const std::size_t n = ranks.size();
  std::vector<int> w(n);
  int total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = static_cast<int>(std::lround(2.0 * ranks[i]));
    total += w[i];
  }
  // count[j][s]: number of j-subsets of the items seen so far with doubled sum s.
  std::vector<std::vector<double>> count(n1 + 1, std::vector<double>(static_cast<std::size_t>(total) + 1, 0.0));
  count[0][0] = 1.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = std::min(n1, i + 1); j >= 1; --j)
      for (int s = total; s >= w[i]; --s) count[j][static_cast<std::size_t>(s)] += count[j - 1][static_cast<std::size_t>(s - w[i])];
  const double mean2 = static_cast<double>(n1) * static_cast<double>(n + 1);  // doubled expected sum
  const double dev = std::abs(2.0 * observed_sum - mean2);
  double hit = 0.0;
  double all = 0.0;
  for (int s = 0; s <= total; ++s) {
    const double c = count[n1][static_cast<std::size_t>(s)];
    if (c == 0.0) continue;
    all += c;
    if (std::abs(static_cast<double>(s) - mean2) >= dev - 1e-9) hit += c;
  }
  return std::min(1.0, hit / all);
}

/// Standard normal upper tail.
inline double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace detail

inline MannWhitney mann_whitney_u(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw nn::ContractError("mann_whitney_u: both samples must be non-empty");
  std::vector<double> all(a.begin(), a.end());
  all.insert(all.end(), b.begin(), b.end());
  const auto ranks = midranks(all);
  const double n1 = static_cast<double>(a.size());
  const double n2 = static_cast<double>(b.size());
  const double n = n1 + n2;
  double r1 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) r1 += ranks[i];
  MannWhitney out;
  out.u = r1 - n1 * (n1 + 1.0) / 2.0;
  const double ties = tie_term(all);
  if (ties == n * n * n - n) return out;  // every value identical
  if (all.size() <= kExactMannWhitneyLimit) {
    out.exact = true;
    out.p = detail::exact_mann_whitney_p(ranks, a.size(), r1);
    return out;
  }
  const double mean = n1 * n2 / 2.0;
  const double var = n1 * n2 / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0)));
  const double dev = std::max(0.0, std::abs(out.u - mean) - 0.5);
  out.p = std::min(1.0, 2.0 * detail::normal_sf(dev / std::sqrt(var)));
  return out;
}

/// Bonferroni correction: min(1, p * comparisons).
inline double bonferroni(double p, std::size_t comparisons) {
  return std::min(1.0, p * static_cast<double>(comparisons));
}

// ---------------------------------------------------------------------------
// Incomplete gamma and Kruskal-Wallis

namespace detail {

/// Regularized lower incomplete gamma by its power series (x < a + 1).
inline double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < 1000; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

/// Regularized upper incomplete gamma by Lentz's continued fraction
/// (x >= a + 1).
inline double gamma_q_fraction(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 1000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace detail

/// Q(a, x) = Gamma(a, x) / Gamma(a).
inline double gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw nn::ContractError("gamma_q: need a > 0 and x >= 0");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
  return detail::gamma_q_fraction(a, x);
}

inline double chi_square_sf(double x, double df) { return x <= 0.0 ? 1.0 : gamma_q(df / 2.0, x / 2.0); }

struct KruskalWallis {
  double h = 0.0;
  int df = 0;
  double p = 1.0;
};

inline KruskalWallis kruskal_wallis(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) throw nn::ContractError("kruskal_wallis: need at least 2 groups");
  std::vector<double> all;
  for (const auto& g : groups) {
    if (g.empty()) throw nn::ContractError("kruskal_wallis: empty group");
    all.insert(all.end(), g.begin(), g.end());
  }
  KruskalWallis out;
  out.df = static_cast<int>(groups.size()) - 1;
  const double n = static_cast<double>(all.size());
  const double ties = tie_term(all);
  if (ties == n * n * n - n) return out;  // every value identical
  const auto ranks = midranks(all);
  double s = 0.0;
  std::size_t offset = 0;
  for (const auto& g : groups) {
    double r = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) r += ranks[offset + i];
    s += r * r / static_cast<double>(g.size());
    offset += g.size();
  }
  const double h = 12.0 / (n * (n + 1.0)) * s - 3.0 * (n + 1.0);
  out.h = std::max(0.0, h / (1.0 - ties / (n * n * n - n)));
  out.p = chi_square_sf(out.h, out.df);
  return out;
}

// ---------------------------------------------------------------------------
// Series

/// Trailing moving average over min(alpha, available) entries.
inline std::vector<double> smooth(std::span<const double> series, int alpha = 16) {
  if (alpha < 1) throw nn::ContractError("smooth: alpha must be >= 1");
  // Window mean taken relative to the newest entry: a constant window sums
  // exact zeros and comes back unchanged.
  std::vector<double> out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    const std::size_t count = std::min(i + 1, static_cast<std::size_t>(alpha));
    double sum = 0.0;
    for (std::size_t t = i + 1 - count; t <= i; ++t) sum += series[t] - series[i];
    out[i] = series[i] + sum / static_cast<double>(count);
  }
  return out;
}

inline double mean_of(std::span<const double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Sample standard deviation (n - 1 denominator); NaN below two values.
inline double std_of(std::span<const double> v) {
  if (v.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// ---------------------------------------------------------------------------
// Aggregation

struct SeriesSummary {
  std::string name;
  std::vector<double> mean;  // per step
  std::vector<double> std;   // per step
  std::vector<double> finals;
  double final_mean = 0.0;
  double final_std = 0.0;
};

struct PairTest {
  std::string a;
  std::string b;
  double u = 0.0;
  double p = 1.0;
  double p_corrected = 1.0;
};

struct ComparisonReport {
  std::vector<SeriesSummary> series;
  std::vector<PairTest> pairs;
  std::optional<KruskalWallis> kruskal;
};

/// A named group of replicate runs (one strategy or one grid cell).
struct RunGroup {
  std::string name;
  std::vector<explorer::RunLog> runs;
};

/// Per-step mean and std of the weighted MSE, final-MSE distributions, all
/// pairwise Mann-Whitney tests (Bonferroni over the pair count) and a
/// Kruskal-Wallis test across groups.
inline ComparisonReport aggregate(const std::vector<RunGroup>& groups) {
  ComparisonReport rep;
  std::optional<std::size_t> steps;
  for (const auto& g : groups) {
    if (g.runs.empty()) throw nn::ContractError("aggregate: group '" + g.name + "' has no runs");
    SeriesSummary s;
    s.name = g.name;
    for (std::size_t r = 0; r < g.runs.size(); ++r) {
      const std::size_t n = g.runs[r].steps.size();
      if (!steps) steps = n;
      if (n != *steps)
        throw nn::ContractError("aggregate: run " + std::to_string(r) + " of '" + g.name + "' has " +
                                std::to_string(n) + " steps, expected " + std::to_string(*steps));
      s.finals.push_back(g.runs[r].final_weighted_mse());
    }
    s.mean.resize(*steps);
    s.std.resize(*steps);
    std::vector<double> column(g.runs.size());
    for (std::size_t t = 0; t < *steps; ++t) {
      for (std::size_t r = 0; r < g.runs.size(); ++r) column[r] = g.runs[r].steps[t].weighted_mse;
      s.mean[t] = mean_of(column);
      s.std[t] = std_of(column);
    }
    s.final_mean = mean_of(s.finals);
    s.final_std = std_of(s.finals);
    rep.series.push_back(std::move(s));
  }
  const std::size_t pair_count = rep.series.size() * (rep.series.size() - 1) / 2;
  for (std::size_t i = 0; i < rep.series.size(); ++i) {
    for (std::size_t j = i + 1; j < rep.series.size(); ++j) {
      const auto mw = mann_whitney_u(rep.series[i].finals, rep.series[j].finals);
      rep.pairs.push_back({rep.series[i].name, rep.series[j].name, mw.u, mw.p, bonferroni(mw.p, pair_count)});
    }
  }
  if (rep.series.size() >= 2) {
    std::vector<std::vector<double>> finals;
    for (const auto& s : rep.series) finals.push_back(s.finals);
    rep.kruskal = kruskal_wallis(finals);
  }
  return rep;
}

inline const SeriesSummary& find_series(const ComparisonReport& rep, std::string_view name) {
  for (const auto& s : rep.series)
    if (s.name == name) return s;
  throw nn::ContractError("no series named '" + std::string(name) + "'");
}

inline const PairTest& find_pair(const ComparisonReport& rep, std::string_view a, std::string_view b) {
  for (const auto& p : rep.pairs)
    if ((p.a == a && p.b == b) || (p.a == b && p.b == a)) return p;
  throw nn::ContractError("no test between '" + std::string(a) + "' and '" + std::string(b) + "'");
}

// ---------------------------------------------------------------------------
// Run analyses

inline const char* label_name(int label) {
  static constexpr const char* names[] = {"closed-push", "closed-lift", "half-push", "half-lift", "open-push",
                                          "open-lift"};
  return label >= 0 && label < 6 ? names[label] : "none";
}

/// Regions whose majority label covers at least `threshold` of their pool.
inline int pure_region_count(const explorer::RunLog& log, double threshold = 0.8) {
  int n = 0;
  for (const auto& m : log.regions) n += m.purity >= threshold ? 1 : 0;
  return n;
}

/// LP of one region per step, NaN where it was the optimistic warm-up
/// value or -inf (exhausted).
inline std::vector<double> region_lp(const explorer::RunLog& log, int region) {
  std::vector<double> out;
  out.reserve(log.steps.size());
  for (const auto& s : log.steps) {
    const double v = s.lp[static_cast<std::size_t>(region)];
    out.push_back(v == log.config.optimistic_lp || !std::isfinite(v) ? std::numeric_limits<double>::quiet_NaN() : v);
  }
  return out;
}

/// Smooths the defined (non-NaN) entries of a series in order, leaving NaN
/// entries in place.
inline std::vector<double> smooth_defined(const std::vector<double>& series, int alpha) {
  std::vector<double> values;
  for (double v : series)
    if (!std::isnan(v)) values.push_back(v);
  const auto sm = smooth(values, alpha);
  std::vector<double> out(series.size(), std::numeric_limits<double>::quiet_NaN());
  std::size_t j = 0;
  for (std::size_t i = 0; i < series.size(); ++i)
    if (!std::isnan(series[i])) out[i] = sm[j++];
  return out;
}

/// First step (1-based) at which the smoothed LP of `region` peaks; nullopt
/// when the region never leaves warm-up.
inline std::optional<int> lp_peak_step(const explorer::RunLog& log, int region, int alpha = 16) {
  const auto sm = smooth_defined(region_lp(log, region), alpha);
  std::optional<int> best;
  double best_v = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < sm.size(); ++i) {
    if (std::isnan(sm[i])) continue;
    if (sm[i] > best_v) {
      best_v = sm[i];
      best = log.steps[i].step;
    }
  }
  return best;
}

struct CurriculumResult {
  std::optional<double> lifting_mean_peak;
  std::optional<double> other_mean_peak;
  bool lifting_first = false;
};

/// Mean LP-peak step of regions whose majority label is a lift against the
/// other regions.
inline CurriculumResult curriculum(const explorer::RunLog& log, int alpha = 16) {
  std::vector<double> lift, other;
  for (const auto& m : log.regions) {
    const auto peak = lp_peak_step(log, m.id, alpha);
    if (!peak) continue;
    (m.majority_label % 2 == 1 ? lift : other).push_back(*peak);
  }
  CurriculumResult r;
  if (!lift.empty()) r.lifting_mean_peak = mean_of(lift);
  if (!other.empty()) r.other_mean_peak = mean_of(other);
  r.lifting_first = r.lifting_mean_peak && r.other_mean_peak && *r.lifting_mean_peak < *r.other_mean_peak;
  return r;
}

/// Mean |LP| over defined entries of steps [first, last] (1-based,
/// inclusive) across all regions; NaN when none is defined.
inline double mean_abs_lp(const explorer::RunLog& log, int first, int last) {
  std::vector<double> v;
  for (int r = 0; r < log.config.k; ++r) {
    const auto lp = region_lp(log, r);
    for (std::size_t i = 0; i < lp.size(); ++i) {
      const int step = log.steps[i].step;
      if (step >= first && step <= last && !std::isnan(lp[i])) v.push_back(std::abs(lp[i]));
    }
  }
  return mean_of(v);
}

// ---------------------------------------------------------------------------
// Emission

/// Per-step curves: step, then <name>_mean and <name>_std per series.
inline void write_curves_csv(std::ostream& out, const ComparisonReport& rep) {
  out << "step";
  for (const auto& s : rep.series) out << ',' << s.name << "_mean," << s.name << "_std";
  out << '\n';
  const std::size_t n = rep.series.empty() ? 0 : rep.series.front().mean.size();
  for (std::size_t t = 0; t < n; ++t) {
    out << t + 1;
    for (const auto& s : rep.series) out << ',' << io::format_double(s.mean[t]) << ',' << io::format_double(s.std[t]);
    out << '\n';
  }
}

/// One row per series (final MSE summary) followed by one row per pair.
inline void write_summary_csv(std::ostream& out, const ComparisonReport& rep) {
  out << "series,replicates,final_mean,final_std\n";
  for (const auto& s : rep.series)
    out << s.name << ',' << s.finals.size() << ',' << io::format_double(s.final_mean) << ','
        << io::format_double(s.final_std) << '\n';
  out << "\na,b,u,p,p_bonferroni\n";
  for (const auto& p : rep.pairs)
    out << p.a << ',' << p.b << ',' << io::format_double(p.u) << ',' << io::format_double(p.p) << ','
        << io::format_double(p.p_corrected) << '\n';
  if (rep.kruskal)
    out << "\nkruskal_h,df,p\n"
        << io::format_double(rep.kruskal->h) << ',' << rep.kruskal->df << ',' << io::format_double(rep.kruskal->p)
        << '\n';
}

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> mean;
  std::vector<double> std;  // empty or NaN entries: no band
};

struct PlotSpec {
  std::string title;
  std::string x_label = "exploration step";
  std::string y_label;
  int width = 720;
  int height = 440;
};

namespace detail {

inline std::string fixed(double v, int digits = 2) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

inline std::string tick_label(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

inline constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

}  // namespace detail

/// Self-contained SVG line plot: one mean curve per series with a
/// translucent +-std band, axes with ticks, labels and a legend. NaN points
/// break the curve. Output depends only on the input.
inline void write_svg(std::ostream& out, const std::vector<PlotSeries>& series, const PlotSpec& spec) {
  const double left = 70, right = 170, top = 40, bottom = 55;
  const double pw = spec.width - left - right;
  const double ph = spec.height - top - bottom;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (std::isnan(s.mean[i])) continue;
      const double sd = i < s.std.size() && !std::isnan(s.std[i]) ? s.std[i] : 0.0;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.mean[i] - sd);
      y1 = std::max(y1, s.mean[i] + sd);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return top + (1.0 - (y - y0) / (y1 - y0)) * ph; };
  using detail::fixed;

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\"" << spec.height
      << "\" viewBox=\"0 0 " << spec.width << ' ' << spec.height << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << spec.width << "\" height=\"" << spec.height << "\" fill=\"white\"/>\n"
      << "<text x=\"" << fixed(left + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"15\">" << xml_escape(spec.title) << "</text>\n";
  out << "<g stroke=\"#444\" stroke-width=\"1\" font-family=\"sans-serif\" font-size=\"11\">\n"
      << "<line x1=\"" << fixed(left) << "\" y1=\"" << fixed(top + ph) << "\" x2=\"" << fixed(left + pw) << "\" y2=\""
      << fixed(top + ph) << "\"/>\n"
      << "<line x1=\"" << fixed(left) << "\" y1=\"" << fixed(top) << "\" x2=\"" << fixed(left) << "\" y2=\""
      << fixed(top + ph) << "\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = x0 + (x1 - x0) * i / 5.0;
    const double yv = y0 + (y1 - y0) * i / 5.0;
    out << "<line x1=\"" << fixed(px(xv)) << "\" y1=\"" << fixed(top + ph) << "\" x2=\"" << fixed(px(xv))
        << "\" y2=\"" << fixed(top + ph + 5) << "\"/>\n"
        << "<text stroke=\"none\" fill=\"#222\" x=\"" << fixed(px(xv)) << "\" y=\"" << fixed(top + ph + 18)
        << "\" text-anchor=\"middle\">" << detail::tick_label(xv) << "</text>\n"
        << "<line x1=\"" << fixed(left - 5) << "\" y1=\"" << fixed(py(yv)) << "\" x2=\"" << fixed(left) << "\" y2=\""
        << fixed(py(yv)) << "\"/>\n"
        << "<text stroke=\"none\" fill=\"#222\" x=\"" << fixed(left - 8) << "\" y=\"" << fixed(py(yv) + 4)
        << "\" text-anchor=\"end\">" << detail::tick_label(yv) << "</text>\n";
  }
  out << "</g>\n"
      << "<text x=\"" << fixed(left + pw / 2) << "\" y=\"" << fixed(spec.height - 12.0)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << xml_escape(spec.x_label)
      << "</text>\n"
      << "<text x=\"16\" y=\"" << fixed(top + ph / 2) << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"12\" transform=\"rotate(-90 16 " << fixed(top + ph / 2) << ")\">" << xml_escape(spec.y_label)
      << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* colour = detail::kPalette[si % std::size(detail::kPalette)];
    // Contiguous runs of defined points.
    std::vector<std::vector<std::size_t>> runs(1);
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (std::isnan(s.mean[i])) {
        if (!runs.back().empty()) runs.emplace_back();
      } else {
        runs.back().push_back(i);
      }
    }
    for (const auto& run : runs) {
      if (run.empty()) continue;
      const bool band = std::all_of(run.begin(), run.end(), [&](std::size_t i) { return i < s.std.size() && !std::isnan(s.std[i]); });
      if (band) {
        out << "<polygon fill=\"" << colour << "\" fill-opacity=\"0.18\" stroke=\"none\" points=\"";
        for (std::size_t i : run) out << fixed(px(s.x[i])) << ',' << fixed(py(s.mean[i] + s.std[i])) << ' ';
        for (auto it = run.rbegin(); it != run.rend(); ++it)
          out << fixed(px(s.x[*it])) << ',' << fixed(py(s.mean[*it] - s.std[*it])) << ' ';
        out << "\"/>\n";
      }
      out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.6\" points=\"";
      for (std::size_t i : run) out << fixed(px(s.x[i])) << ',' << fixed(py(s.mean[i])) << ' ';
      out << "\"/>\n";
    }
    const double ly = top + 14.0 + 18.0 * static_cast<double>(si);
    out << "<line x1=\"" << fixed(left + pw + 14) << "\" y1=\"" << fixed(ly) << "\" x2=\"" << fixed(left + pw + 38)
        << "\" y2=\"" << fixed(ly) << "\" stroke=\"" << colour << "\" stroke-width=\"2.5\"/>\n"
        << "<text x=\"" << fixed(left + pw + 44) << "\" y=\"" << fixed(ly + 4)
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << xml_escape(s.name) << "</text>\n";
  }
  out << "</svg>\n";
}

/// Weighted-MSE curves of a comparison report as plot series.
inline std::vector<PlotSeries> mse_series(const ComparisonReport& rep, int alpha = 1) {
  std::vector<PlotSeries> out;
  for (const auto& s : rep.series) {
    PlotSeries p;
    p.name = s.name;
    for (std::size_t t = 0; t < s.mean.size(); ++t) p.x.push_back(static_cast<double>(t + 1));
    p.mean = smooth(s.mean, alpha);
    p.std = s.std;
    out.push_back(std::move(p));
  }
  return out;
}

/// Smoothed LP per semantic region label, mean and std over every region of
/// every run that carries the label. Warm-up and exhausted steps are gaps.
inline std::vector<PlotSeries> lp_series(const std::vector<explorer::RunLog>& runs, int alpha = 16) {
  std::map<int, std::vector<std::vector<double>>> by_label;
  std::size_t steps = 0;
  for (const auto& log : runs) {
    steps = std::max(steps, log.steps.size());
    for (const auto& m : log.regions) by_label[m.majority_label].push_back(smooth_defined(region_lp(log, m.id), alpha));
  }
  std::vector<PlotSeries> out;
  for (const auto& [label, curves] : by_label) {
    PlotSeries p;
    p.name = label_name(label) + std::string(" (") + std::to_string(curves.size()) + ")";
    for (std::size_t t = 0; t < steps; ++t) {
      std::vector<double> column;
      for (const auto& c : curves)
        if (t < c.size() && !std::isnan(c[t])) column.push_back(c[t]);
      p.x.push_back(static_cast<double>(t + 1));
      p.mean.push_back(column.empty() ? std::numeric_limits<double>::quiet_NaN() : mean_of(column));
      p.std.push_back(column.size() < 2 ? std::numeric_limits<double>::quiet_NaN() : std_of(column));
    }
    out.push_back(std::move(p));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Experiment designs

/// A named grid cell: a configuration template whose seed is replaced per
/// replicate.
struct Variant {
  std::string name;
  explorer::ExperimentConfig config;
};

/// One variant per strategy, named by the strategy.
inline std::vector<Variant> compare_variants(const explorer::ExperimentConfig& base,
                                             std::span<const partition::Strategy> strategies) {
  std::vector<Variant> out;
  for (auto s : strategies) {
    auto cfg = base;
    cfg.strategy = s;
    out.push_back({partition::to_string(s), cfg});
  }
  return out;
}

/// Latent-strategy variants over one parameter ("epsilon" or "k"), named
/// "<param>=<value>".
inline std::vector<Variant> sweep_variants(const explorer::ExperimentConfig& base, std::string_view param,
                                           std::span<const double> values) {
  if (param != "epsilon" && param != "k") throw nn::ContractError("sweep parameter must be epsilon or k");
  std::vector<Variant> out;
  for (double v : values) {
    auto cfg = base;
    if (param == "epsilon") {
      cfg.epsilon = v;
    } else {
      if (v != std::floor(v)) throw nn::ContractError("k must be an integer");
      cfg.k = static_cast<int>(v);
    }
    cfg.validate();
    out.push_back({std::string(param) + "=" + io::format_double(v), cfg});
  }
  return out;
}

/// Component-substitution cells. Dimensionality reduction only affects the
/// latent strategy and the clustering backend does not affect the random
/// strategy, so those axes collapse there; every variant is a distinct run.
/// Names: latent_<dimred>_<cluster>_<act>, <strategy>_<cluster>_<act>,
/// random_<act>.
inline std::vector<Variant> ablation_variants(const explorer::ExperimentConfig& base,
                                              std::span<const partition::Strategy> strategies,
                                              std::span<const partition::DimRed> dimreds,
                                              std::span<const partition::Backend> clusters,
                                              std::span<const nn::Activation> activations) {
  using partition::Strategy;
  std::vector<Variant> out;
  for (auto s : strategies) {
    const auto dims = s == Strategy::latent ? std::vector<partition::DimRed>(dimreds.begin(), dimreds.end())
                                            : std::vector<partition::DimRed>{base.dimred};
    const auto clus = s == Strategy::random ? std::vector<partition::Backend>{base.cluster}
                                            : std::vector<partition::Backend>(clusters.begin(), clusters.end());
    for (auto d : dims) {
      for (auto c : clus) {
        for (auto a : activations) {
          auto cfg = base;
          cfg.strategy = s;
          cfg.dimred = d;
          cfg.cluster = c;
          cfg.fm_activation = a;
          std::string name = partition::to_string(s);
          if (s == Strategy::latent) name += std::string("_") + partition::to_string(d);
          if (s != Strategy::random) name += std::string("_") + partition::to_string(c);
          name += std::string("_") + nn::to_string(a);
          out.push_back({name, cfg});
        }
      }
    }
  }
  return out;
}

/// Compare variants with inverse models.
inline std::vector<Variant> inverse_variants(const explorer::ExperimentConfig& base,
                                             std::span<const partition::Strategy> strategies) {
  auto cfg = base;
  cfg.model = learner::ModelKind::inverse;
  return compare_variants(cfg, strategies);
}

/// Runs `variants` on `replicates` seeds derived from `master`; results are
/// grouped per variant.
inline std::vector<RunGroup> run_variants(const std::vector<Variant>& variants, std::uint64_t master,
                                          std::size_t replicates, const explorer::GridOptions& opt = {}) {
  std::vector<explorer::ExperimentConfig> cfgs;
  std::vector<std::string> names;
  for (const auto& v : variants) {
    cfgs.push_back(v.config);
    names.push_back(v.name);
  }
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < replicates; ++i) seeds.push_back(explorer::replicate_seed(master, i));
  auto logs = explorer::run_grid(cfgs, names, seeds, opt);
  std::vector<RunGroup> out;
  for (std::size_t v = 0; v < variants.size(); ++v) out.push_back({variants[v].name, std::move(logs[v])});
  return out;
}

/// One row per (strategy, dimred, cluster) with a mean/std column pair per
/// activation: the component-substitution table.
inline void write_ablation_csv(std::ostream& out, const std::vector<Variant>& variants, const ComparisonReport& rep) {
  std::vector<nn::Activation> acts;
  for (const auto& v : variants)
    if (std::find(acts.begin(), acts.end(), v.config.fm_activation) == acts.end()) acts.push_back(v.config.fm_activation);
  out << "strategy,dimred,cluster";
  for (auto a : acts) out << ',' << nn::to_string(a) << "_mean," << nn::to_string(a) << "_std";
  out << '\n';
  std::vector<std::string> seen;
  for (const auto& v : variants) {
    const auto& c = v.config;
    const bool latent = c.strategy == partition::Strategy::latent;
    const bool random = c.strategy == partition::Strategy::random;
    std::string row = std::string(partition::to_string(c.strategy)) + ',' +
                      (latent ? partition::to_string(c.dimred) : "-") + ',' +
                      (random ? "-" : partition::to_string(c.cluster));
    if (std::find(seen.begin(), seen.end(), row) != seen.end()) continue;
    seen.push_back(row);
    out << row;
    for (auto a : acts) {
      const SeriesSummary* cell = nullptr;
      for (std::size_t i = 0; i < variants.size(); ++i) {
        const auto& w = variants[i].config;
        if (w.strategy == c.strategy && w.dimred == c.dimred && w.cluster == c.cluster && w.fm_activation == a)
          cell = &rep.series[i];
      }
      if (cell)
        out << ',' << io::format_double(cell->final_mean) << ',' << io::format_double(cell->final_std);
      else
        out << ",,";
    }
    out << '\n';
  }
}

/// Run directories below `root` (any directory holding a steps.csv), in
/// lexicographic order.
inline std::vector<std::filesystem::path> find_runs(const std::filesystem::path& root) {
  std::vector<std::filesystem::path> out;
  if (std::filesystem::exists(root / "steps.csv")) out.push_back(root);
  if (std::filesystem::is_directory(root))
    for (const auto& e : std::filesystem::recursive_directory_iterator(root))
      if (e.is_regular_file() && e.path().filename() == "steps.csv" && e.path().parent_path() != root)
        out.push_back(e.path().parent_path());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace oao::report

#endif  // OAO_REPORT_HPP

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

// oao: command-line harness. Every experiment subcommand builds a list of
// variants, runs them on replicate seeds derived from the master seed, saves
// each run directory and writes summary.csv, curves.csv and mse.svg.
//
// Master seed precedence: config file < OAO_SEED < --seed.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <thread>

#include "oao/report.hpp"

namespace {

using namespace oao;
namespace fs = std::filesystem;

struct Common {
  std::string config;
  std::vector<std::string> set;
  std::optional<std::uint64_t> seed;
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  bool quiet = false;
};

void add_common(CLI::App* sub, Common& c, bool replicate_grid) {
  sub->add_option("--config", c.config, "Key-value config file (defaults for every field)")->check(CLI::ExistingFile);
  sub->add_option("--set", c.set, "Override one config key: key=value (repeatable)");
  sub->add_option("--seed", c.seed, "Master seed (overrides config and OAO_SEED)");
  if (replicate_grid) sub->add_option("--workers", c.workers, "Parallel replicate workers")->check(CLI::PositiveNumber);
  sub->add_flag("-q,--quiet", c.quiet, "No progress output");
}

explorer::ExperimentConfig base_config(const Common& c) {
  auto cfg = c.config.empty() ? explorer::ExperimentConfig{} : explorer::ExperimentConfig::load(c.config);
  io::KeyValues kv;
  for (const auto& s : c.set) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw io::FormatError("--set expects key=value, got '" + s + "'");
    kv[io::trim(s.substr(0, eq))] = io::trim(s.substr(eq + 1));
  }
  cfg.apply(kv);
  cfg.apply_env();
  if (c.seed) cfg.seed = *c.seed;
  cfg.validate();
  return cfg;
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& text, Parse parse) {
  std::vector<T> out;
  for (const auto& item : io::split(text, ',')) {
    const auto t = io::trim(item);
    if (!t.empty()) out.push_back(parse(t));
  }
  if (out.empty()) throw io::FormatError("empty list '" + text + "'");
  return out;
}

std::vector<partition::Strategy> parse_strategies(const std::string& s) {
  return parse_list<partition::Strategy>(s, [](const std::string& t) { return partition::parse_strategy(t); });
}

explorer::GridOptions grid_options(const Common& c, const fs::path& out, std::size_t total) {
  explorer::GridOptions opt;
  opt.workers = c.workers;
  opt.out_dir = out;
  if (!c.quiet) {
    auto done = std::make_shared<std::size_t>(0);
    const auto start = std::chrono::steady_clock::now();
    opt.progress = [done, total, start](const std::string& line) {
      const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      std::fprintf(stderr, "[%zu/%zu %6.0fs] %s\n", ++*done, total, s, line.c_str());
    };
  }
  return opt;
}

void print_report(const report::ComparisonReport& rep) {
  std::printf("%-28s %5s %12s %12s\n", "variant", "n", "final_mean", "final_std");
  for (const auto& s : rep.series)
    std::printf("%-28s %5zu %12.6g %12.6g\n", s.name.c_str(), s.finals.size(), s.final_mean, s.final_std);
  if (!rep.pairs.empty()) {
    std::printf("\n%-28s %-28s %8s %10s %10s\n", "a", "b", "U", "p", "p_bonf");
    for (const auto& p : rep.pairs)
      std::printf("%-28s %-28s %8.1f %10.4g %10.4g\n", p.a.c_str(), p.b.c_str(), p.u, p.p, p.p_corrected);
  }
  if (rep.kruskal) std::printf("\nKruskal-Wallis H = %.4g, df = %d, p = %.4g\n", rep.kruskal->h, rep.kruskal->df, rep.kruskal->p);
}

void write_outputs(const report::ComparisonReport& rep, const fs::path& out, const std::string& title) {
  {
    auto f = io::open_out(out / "summary.csv");
    report::write_summary_csv(f, rep);
  }
  {
    auto f = io::open_out(out / "curves.csv");
    report::write_curves_csv(f, rep);
  }
  auto f = io::open_out(out / "mse.svg");
  report::write_svg(f, report::mse_series(rep), {.title = title, .y_label = "weighted MSE (eval set)"});
}

report::ComparisonReport run_experiment(const std::vector<report::Variant>& variants, const Common& c,
                                        const explorer::ExperimentConfig& base, std::size_t replicates,
                                        const fs::path& out, const std::string& title) {
  if (replicates < 1) throw nn::ContractError("--replicates must be >= 1");
  const auto groups =
      report::run_variants(variants, base.seed, replicates, grid_options(c, out, variants.size() * replicates));
  const auto rep = report::aggregate(groups);
  write_outputs(rep, out, title);
  print_report(rep);
  return rep;
}

// Groups for stats/plot. A directory whose children are run directories is
// one group; otherwise each child holding runs is a group.
std::vector<report::RunGroup> collect_groups(const std::vector<std::string>& dirs) {
  std::vector<report::RunGroup> groups;
  auto add = [&](const fs::path& dir, const std::string& name) {
    report::RunGroup g{name, {}};
    for (const auto& r : report::find_runs(dir)) g.runs.push_back(explorer::load_run(r));
    if (!g.runs.empty()) groups.push_back(std::move(g));
  };
  for (const auto& d : dirs) {
    const fs::path dir(d);
    if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + d);
    bool runs_below = fs::exists(dir / "steps.csv");
    std::vector<fs::path> children;
    for (const auto& e : fs::directory_iterator(dir))
      if (e.is_directory()) {
        children.push_back(e.path());
        runs_below = runs_below || fs::exists(e.path() / "steps.csv");
      }
    std::sort(children.begin(), children.end());
    if (runs_below) {
      add(dir, fs::absolute(dir).lexically_normal().filename().string());
    } else {
      for (const auto& ch : children) add(ch, ch.filename().string());
    }
  }
  if (groups.empty()) throw std::runtime_error("no runs found");
  return groups;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learning-progress exploration over object-action-outcome regions"};
  app.require_subcommand(1);
  Common common;

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Generate a stratified interaction dataset (OAOD binary or CSV)");
  std::uint64_t gen_seed = 1;
  std::string gen_out;
  int per_stratum = 100;
  gen->add_option("--seed", gen_seed, "Dataset seed (OAO_SEED overrides the default)");
  gen->add_option("--out", gen_out, "Output file; a .csv suffix writes the CSV export")->required();
  gen->add_option("--per-stratum", per_stratum, "Interactions per (object kind, gripper) stratum")
      ->check(CLI::PositiveNumber);
  gen->callback([&] {
    if (gen->count("--seed") == 0)
      if (const char* s = std::getenv("OAO_SEED"); s && *s) gen_seed = explorer::ExperimentConfig::parse_seed(s);
    const auto data = world::generate_dataset(world::uniform_counts(per_stratum), gen_seed);
    const bool csv = fs::path(gen_out).extension() == ".csv";
    auto f = io::open_out(gen_out, !csv);
    if (csv)
      world::export_csv(f, data);
    else
      world::save_dataset(f, data);
    std::printf("wrote %zu interactions to %s\n", data.size(), gen_out.c_str());
  });

  // run
  auto* run = app.add_subcommand("run", "One exploration run, any strategy");
  std::string run_out;
  add_common(run, common, false);
  run->add_option("--out", run_out, "Run directory")->required();
  run->callback([&] {
    const auto cfg = base_config(common);
    const auto log = explorer::run_and_save(cfg, run_out);
    std::printf("strategy %s seed %llu: %zu steps, weighted MSE %.6g -> %.6g\n", partition::to_string(cfg.strategy),
                static_cast<unsigned long long>(cfg.seed), log.steps.size(), log.initial_weighted_mse,
                log.final_weighted_mse());
    std::printf("timing: bootstrap %.1fs, partition %.1fs, loop %.1fs\n", log.timing.bootstrap_seconds,
                log.timing.partition_seconds, log.timing.loop_seconds);
  });

  // compare
  auto* compare = app.add_subcommand("compare", "Partitioning strategies side by side");
  std::string cmp_strategies = "latent,outcome,object,action,random";
  std::size_t cmp_reps = 10;
  std::string cmp_out;
  add_common(compare, common, true);
  compare->add_option("--strategies", cmp_strategies, "Comma-separated strategies");
  compare->add_option("--replicates", cmp_reps, "Replicate runs per strategy");
  compare->add_option("--out", cmp_out, "Output directory")->required();
  compare->callback([&] {
    const auto base = base_config(common);
    run_experiment(report::compare_variants(base, parse_strategies(cmp_strategies)), common, base, cmp_reps, cmp_out,
                   "Weighted MSE by strategy");
  });

  // sweep
  auto* sweep = app.add_subcommand("sweep", "LatentIM over epsilon or k");
  std::string sweep_param, sweep_values;
  std::size_t sweep_reps = 10;
  std::string sweep_out;
  add_common(sweep, common, true);
  sweep->add_option("--param", sweep_param, "epsilon or k")->required()->check(CLI::IsMember({"epsilon", "k"}));
  sweep->add_option("--values", sweep_values, "Comma-separated values")->required();
  sweep->add_option("--replicates", sweep_reps, "Replicate runs per value");
  sweep->add_option("--out", sweep_out, "Output directory")->required();
  sweep->callback([&] {
    auto base = base_config(common);
    base.strategy = partition::Strategy::latent;
    const auto values = parse_list<double>(sweep_values, [](const std::string& t) { return io::parse_double(t); });
    run_experiment(report::sweep_variants(base, sweep_param, values), common, base, sweep_reps, sweep_out,
                   "LatentIM weighted MSE over " + sweep_param);
  });

  // ablate
  auto* ablate = app.add_subcommand("ablate", "Component substitutions (dimensionality reduction, clustering, FM activation)");
  std::string abl_dimred = "vae,pca,ae", abl_cluster = "gmm,kmeans", abl_act = "relu,linear";
  std::string abl_strategies = "latent,outcome,object,action,random";
  std::size_t abl_reps = 5;
  std::string abl_out;
  add_common(ablate, common, true);
  ablate->add_option("--dimred", abl_dimred, "Comma-separated subset of vae,pca,ae");
  ablate->add_option("--cluster", abl_cluster, "Comma-separated subset of gmm,kmeans");
  ablate->add_option("--fm-activation", abl_act, "Comma-separated subset of relu,linear");
  ablate->add_option("--strategies", abl_strategies, "Comma-separated strategies");
  ablate->add_option("--replicates", abl_reps, "Replicate runs per cell");
  ablate->add_option("--out", abl_out, "Output directory")->required();
  ablate->callback([&] {
    const auto base = base_config(common);
    const auto variants = report::ablation_variants(
        base, parse_strategies(abl_strategies),
        parse_list<partition::DimRed>(abl_dimred, [](const std::string& t) { return partition::parse_dimred(t); }),
        parse_list<partition::Backend>(abl_cluster, [](const std::string& t) { return partition::parse_backend(t); }),
        parse_list<nn::Activation>(abl_act, [](const std::string& t) { return explorer::parse_activation(t); }));
    const auto rep = run_experiment(variants, common, base, abl_reps, abl_out, "Component substitutions");
    auto f = io::open_out(fs::path(abl_out) / "ablation.csv");
    report::write_ablation_csv(f, variants, rep);
  });

  // inverse
  auto* inverse = app.add_subcommand("inverse", "Strategies with inverse models in place of forward models");
  std::string inv_strategies = "latent,outcome,object,action,random";
  std::size_t inv_reps = 10;
  std::string inv_out;
  add_common(inverse, common, true);
  inverse->add_option("--strategies", inv_strategies, "Comma-separated strategies");
  inverse->add_option("--replicates", inv_reps, "Replicate runs per strategy");
  inverse->add_option("--out", inv_out, "Output directory")->required();
  inverse->callback([&] {
    const auto base = base_config(common);
    run_experiment(report::inverse_variants(base, parse_strategies(inv_strategies)), common, base, inv_reps, inv_out,
                   "Inverse-model weighted MSE by strategy");
  });

  // stats
  auto* stats = app.add_subcommand("stats", "Rank tests and summary over saved runs");
  std::vector<std::string> stats_runs;
  std::string stats_out;
  stats->add_option("--runs", stats_runs, "Run, group or experiment directories")->required()->expected(1, -1);
  stats->add_option("--out", stats_out, "Summary CSV")->required();
  stats->callback([&] {
    const auto rep = report::aggregate(collect_groups(stats_runs));
    auto f = io::open_out(stats_out);
    report::write_summary_csv(f, rep);
    print_report(rep);
  });

  // plot
  auto* plot = app.add_subcommand("plot", "SVG plot of saved runs");
  std::string plot_runs, plot_kind = "mse", plot_out;
  int alpha = 16;
  plot->add_option("--runs", plot_runs, "Run, group or experiment directory")->required();
  plot->add_option("--kind", plot_kind, "mse: weighted MSE per group; lp: smoothed LP per region label")
      ->check(CLI::IsMember({"mse", "lp"}));
  plot->add_option("--alpha", alpha, "Smoothing window")->check(CLI::PositiveNumber);
  plot->add_option("--out", plot_out, "SVG file")->required();
  plot->callback([&] {
    auto f = io::open_out(plot_out);
    if (plot_kind == "mse") {
      const auto rep = report::aggregate(collect_groups({plot_runs}));
      report::write_svg(f, report::mse_series(rep, alpha), {.title = "Weighted MSE", .y_label = "weighted MSE"});
    } else {
      std::vector<explorer::RunLog> runs;
      for (const auto& r : report::find_runs(plot_runs)) runs.push_back(explorer::load_run(r));
      if (runs.empty()) throw std::runtime_error("no runs found under " + plot_runs);
      report::write_svg(f, report::lp_series(runs, alpha),
                        {.title = "Learning progress by region label", .y_label = "LP (smoothed)"});
    }
    std::printf("wrote %s\n", plot_out.c_str());
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "oao: error: %s\n", e.what());
    return 1;
  }
  return 0;
}

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

// A reduced-budget exploration run driven step by step through the library
// API: bootstrap, partition, then the learning-progress loop. Prints what
// each region turned out to contain and which region the agent chose.
//
//   explore_demo [seed] [steps]

#include <cstdio>
#include <cstdlib>

#include "oao/explorer.hpp"
#include "oao/report.hpp"

using namespace oao;

int main(int argc, char** argv) {
  explorer::ExperimentConfig cfg;
  cfg.seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 7;
  cfg.steps = argc > 2 ? std::atoi(argv[2]) : 120;
  // Desk-top budget: a few seconds on one core.
  cfg.bootstrap_n = 450;
  cfg.pool_size = 2700;
  cfg.eval_size = 450;
  cfg.init_per_region = 64;
  cfg.theta = 6;
  cfg.hidden_units = 128;
  cfg.encoder_epochs = 40;
  cfg.vae_epochs = 300;
  cfg.vae_restarts = 2;
  cfg.validate();

  auto shared = explorer::make_shared_bootstrap(cfg);
  explorer::PartitionCache cache;
  auto partitioner = cache.get(cfg, *shared);
  auto state = explorer::bootstrap(cfg, shared, partitioner);

  std::printf("region  pool  majority      purity  initial error\n");
  for (const auto& m : state.meta)
    std::printf("%6d %5d  %-12s %6.2f  %.4f\n", m.id, m.pool_size, report::label_name(m.majority_label), m.purity,
                m.init_error);
  std::printf("\nweighted MSE after bootstrap: %.5f\n\n", explorer::weighted_mse(state));

  std::vector<int> visits(static_cast<std::size_t>(cfg.k), 0);
  while (state.step < cfg.steps) {
    const auto rec = explorer::explore_step(state);
    if (!rec) break;  // every region exhausted
    ++visits[static_cast<std::size_t>(rec->selected)];
    if (rec->step % 20 == 0)
      std::printf("step %4d  region %d (%s)  e_n %.4f  weighted MSE %.5f\n", rec->step, rec->selected,
                  rec->greedy ? "greedy" : "random", rec->e_n, rec->weighted_mse);
  }

  std::printf("\nvisits per region:");
  for (int v : visits) std::printf(" %d", v);
  std::printf("\nfinal weighted MSE: %.5f\n", explorer::weighted_mse(state));
  return 0;
}

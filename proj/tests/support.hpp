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

#ifndef OAO_TESTS_SUPPORT_HPP
#define OAO_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

namespace oao::testing {

// First index i where the mean loss over epochs [i+w, i+2w) exceeds the
// mean over [i, i+w) by more than two standard errors of that difference.
// Averaging absorbs single-epoch fluctuation; the noise scale comes from
// first differences, which a steady trend barely affects.
inline std::optional<std::size_t> first_window_violation(const std::vector<double>& log, std::size_t w) {
  auto mean = [&](std::size_t from) {
    double s = 0.0;
    for (std::size_t k = from; k < from + w; ++k) s += log[k];
    return s / static_cast<double>(w);
  };
  auto noise = [&](std::size_t from) {
    double q = 0.0;
    for (std::size_t k = from; k + 1 < from + 2 * w; ++k) q += (log[k + 1] - log[k]) * (log[k + 1] - log[k]);
    return std::sqrt(q / static_cast<double>(2 * w - 1) / 2.0);
  };
  for (std::size_t i = 0; i + 2 * w <= log.size(); ++i)
    if (mean(i + w) - mean(i) > 2.0 * noise(i) * std::sqrt(2.0 / static_cast<double>(w))) return i;
  return std::nullopt;
}

}  // namespace oao::testing

#endif  // OAO_TESTS_SUPPORT_HPP

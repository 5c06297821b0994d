// Copyright 2026 The isd-evo Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "isd/metrics.h"

#include <algorithm>
#include <numeric>

namespace isd {

double gini(std::span<const double> returns) {
  const std::size_t n = returns.size();
  if (n == 0) return 0.0;
  std::vector<double> x(returns.begin(), returns.end());
  std::sort(x.begin(), x.end());
  const double shift = -std::min(0.0, x.front());
  double total = 0.0;
  for (double& v : x) {
    v += shift;
    total += v;
  }
  if (total <= 0.0) return 0.0;
  // sum_i (2i - n - 1) x_(i) with 1-based ranks on sorted values equals
  // half the pairwise absolute-difference sum.
  double weighted = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    weighted += (2.0 * static_cast<double>(i + 1) - static_cast<double>(n) - 1.0) * x[i];
  }
  return weighted / (static_cast<double>(n) * total);
}

double equality(std::span<const double> returns) { return 1.0 - gini(returns); }

double tagging_rate(const EpisodeStats& stats) {
  if (stats.tags_fired.empty()) return 0.0;
  const double sum = std::accumulate(stats.tags_fired.begin(), stats.tags_fired.end(), 0.0);
  return sum / static_cast<double>(stats.tags_fired.size());
}

double sustainability(const EpisodeStats& stats) {
  if (stats.reward_times.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& times : stats.reward_times) {
    if (times.empty()) {
      acc += stats.episode_length;
      continue;
    }
    acc += std::accumulate(times.begin(), times.end(), 0.0) /
           static_cast<double>(times.size());
  }
  return acc / static_cast<double>(stats.reward_times.size());
}

double collective_return(std::span<const double> returns) {
  return std::accumulate(returns.begin(), returns.end(), 0.0);
}

MetricsRow compute_metrics(const EpisodeStats& stats) {
  return MetricsRow{collective_return(stats.returns), equality(stats.returns),
                    tagging_rate(stats), sustainability(stats)};
}

}  // namespace isd

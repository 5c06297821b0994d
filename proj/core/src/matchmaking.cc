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
#include "isd/matchmaking.h"

#include <algorithm>
#include <numeric>
#include <string>

#include "isd/errors.h"

namespace isd {

std::string_view to_string(Matchmaking mode) {
  return mode == Matchmaking::kRandom ? "random" : "assortative";
}

Matchmaking parse_matchmaking(std::string_view text) {
  if (text == "random") return Matchmaking::kRandom;
  if (text == "assortative") return Matchmaking::kAssortative;
  throw ConfigError("unknown matchmaking '" + std::string(text) + "'");
}

double coop_score_cleanup(std::span<const Action> actions) {
  return static_cast<double>(
      std::count(actions.begin(), actions.end(), Action::kClean));
}

double coop_score_harvest(double own_return, std::span<const double> all_returns) {
  if (all_returns.empty()) throw UsageError("coop_score_harvest: no returns");
  const double mean = std::accumulate(all_returns.begin(), all_returns.end(), 0.0) /
                      static_cast<double>(all_returns.size());
  return mean - own_return;
}

void fill_cold_start(std::span<CoopRecord> records) {
  std::vector<double> known;
  for (const auto& r : records) {
    if (r.source_episode >= 0) known.push_back(r.coop_score);
  }
  double median = 0.0;
  if (!known.empty()) {
    std::sort(known.begin(), known.end());
    const std::size_t mid = known.size() / 2;
    median = known.size() % 2 == 1 ? known[mid] : 0.5 * (known[mid - 1] + known[mid]);
  }
  for (auto& r : records) {
    if (r.source_episode < 0) r.coop_score = median;
  }
}

std::vector<Group> assortative_groups(std::span<const CoopRecord> records,
                                      int group_size, Rng& rng) {
  if (group_size <= 0 || records.size() % static_cast<std::size_t>(group_size) != 0) {
    throw UsageError("assortative_groups: " + std::to_string(records.size()) +
                     " records do not split into groups of " +
                     std::to_string(group_size));
  }
  std::vector<CoopRecord> sorted(records.begin(), records.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const CoopRecord& a, const CoopRecord& b) { return a.id < b.id; });
  shuffle(std::span<CoopRecord>(sorted), rng);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const CoopRecord& a, const CoopRecord& b) {
                     return a.coop_score > b.coop_score;
                   });
  std::vector<Group> groups;
  for (std::size_t start = 0; start < sorted.size(); start += group_size) {
    Group g;
    for (std::size_t k = start; k < start + group_size; ++k) g.push_back(sorted[k].id);
    groups.push_back(std::move(g));
  }
  return groups;
}

std::vector<Group> random_groups(std::span<const int> ids, int group_size, Rng& rng) {
  if (group_size <= 0 || ids.size() < static_cast<std::size_t>(group_size)) {
    throw ConfigError("matchmaking pool of " + std::to_string(ids.size()) +
                      " cannot fill a group of " + std::to_string(group_size));
  }
  std::vector<int> pool(ids.begin(), ids.end());
  shuffle(std::span<int>(pool), rng);
  std::vector<Group> groups;
  const std::size_t count = pool.size() / group_size;
  for (std::size_t g = 0; g < count; ++g) {
    groups.emplace_back(pool.begin() + g * group_size,
                        pool.begin() + (g + 1) * group_size);
  }
  return groups;
}

}  // namespace isd

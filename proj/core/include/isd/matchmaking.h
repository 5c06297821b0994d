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
#ifndef ISD_MATCHMAKING_H_
#define ISD_MATCHMAKING_H_

#include <span>
#include <string_view>
#include <vector>

#include "isd/gridworld.h"
#include "isd/random.h"

namespace isd {

enum class Matchmaking { kRandom, kAssortative };

std::string_view to_string(Matchmaking mode);
Matchmaking parse_matchmaking(std::string_view text);

struct CoopRecord {
  int id = 0;
  double coop_score = 0.0;
  long source_episode = -1;  // -1: no history yet
};

// Cleanup: number of steps on which the player chose to clean.
double coop_score_cleanup(std::span<const Action> actions);

// Harvest: mean(all_returns) - own_return. Earning less than average ranks
// as more cooperative.
double coop_score_harvest(double own_return, std::span<const double> all_returns);

// Gives records without history (source_episode < 0) the median score of
// those with history, or 0 if none has any.
void fill_cold_start(std::span<CoopRecord> records);

using Group = std::vector<int>;

// Sorts by score, highest first (ties in a seeded random order), and cuts
// consecutive blocks of group_size. Throws UsageError unless the record
// count is a multiple of group_size.
std::vector<Group> assortative_groups(std::span<const CoopRecord> records,
                                      int group_size, Rng& rng);

// Uniform random partition of ids into floor(n / group_size) groups;
// leftovers sit out. Throws ConfigError if the pool is smaller than a group.
std::vector<Group> random_groups(std::span<const int> ids, int group_size, Rng& rng);

}  // namespace isd

#endif  // ISD_MATCHMAKING_H_

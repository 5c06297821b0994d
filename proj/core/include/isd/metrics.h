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
#ifndef ISD_METRICS_H_
#define ISD_METRICS_H_

// Social outcome metrics computed per episode.

#include <span>
#include <vector>

namespace isd {

struct EpisodeStats {
  std::vector<double> returns;                  // extrinsic, per player
  std::vector<int> tags_fired;                  // per player
  std::vector<std::vector<int>> reward_times;   // steps with positive reward
  int episode_length = 0;
};

// Gini coefficient sum_ij |x_i - x_j| / (2 n^2 mu), computed in
// O(n log n) from sorted values. Negative returns are first shifted up so
// the minimum is zero; an all-equal (mu = 0) vector has G = 0.
double gini(std::span<const double> returns);

// 1 - gini
double equality(std::span<const double> returns);

// Mean number of tags fired per player.
double tagging_rate(const EpisodeStats& stats);

// Mean over players of the mean step index of positive rewards. Players
// never rewarded count as episode_length.
double sustainability(const EpisodeStats& stats);

double collective_return(std::span<const double> returns);

struct MetricsRow {
  double collective_return = 0.0;
  double equality = 0.0;
  double tagging = 0.0;
  double sustainability = 0.0;
};

MetricsRow compute_metrics(const EpisodeStats& stats);

}  // namespace isd

#endif  // ISD_METRICS_H_

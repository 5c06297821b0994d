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
#ifndef ISD_EXPERIMENT_H_
#define ISD_EXPERIMENT_H_

// Training driver. Each round forms disjoint groups by matchmaking, plays
// one episode per group across the arena threads, then folds results into
// fitness, coop scores and logs in episode order. Evolution runs between
// rounds, so output depends only on the config and the seed.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "isd/config.h"
#include "isd/learner.h"
#include "isd/metrics.h"

namespace isd {

inline constexpr const char* kOutputRootEnv = "ISD_OUTPUT_ROOT";

// Relative output_dir values are placed under $ISD_OUTPUT_ROOT when set.
std::filesystem::path resolve_output_dir(const std::string& output_dir);

NetShape net_shape_for(const ExperimentConfig& config);

struct RunPaths {
  std::filesystem::path root;
  std::filesystem::path config;
  std::filesystem::path episodes;
  std::filesystem::path losses;
  std::filesystem::path evolution;
  std::filesystem::path timing;
  std::filesystem::path replay;
  std::filesystem::path checkpoints;
  std::filesystem::path summary;

  explicit RunPaths(std::filesystem::path run_dir);
  std::filesystem::path checkpoint(std::int64_t episodes_done) const;
  // Highest-numbered checkpoint, or empty.
  std::filesystem::path latest_checkpoint() const;
};

struct EpisodeRecord {
  std::int64_t episode = 0;
  std::vector<int> policy_ids;
  std::vector<double> returns;
  MetricsRow metrics;
  bool numeric_failure = false;
};

struct RunOptions {
  bool resume = false;
  // Called on the main thread after each episode is logged.
  std::function<void(const EpisodeRecord&)> on_episode;
};

struct RunSummary {
  std::filesystem::path run_dir;
  std::int64_t episodes = 0;
  std::int64_t numeric_failures = 0;
  std::int64_t copy_events = 0;
  std::vector<EpisodeRecord> records;  // this invocation only
};

RunSummary run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

// CSV schema tags written as the first line of each log.
inline constexpr const char* kEpisodesSchema = "# isd-episodes v1";
inline constexpr const char* kLossesSchema = "# isd-losses v1";
inline constexpr const char* kEvolutionSchema = "# isd-evolution v1";
inline constexpr const char* kTimingSchema = "# isd-timing v1";

}  // namespace isd

#endif  // ISD_EXPERIMENT_H_

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
#ifndef ISD_REPLAY_H_
#define ISD_REPLAY_H_

// Re-simulates a logged episode from its seed and joint actions and checks
// that the recorded returns come out bit-identical.

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "isd/config.h"
#include "isd/gridworld.h"

namespace isd {

struct ReplayRecord {
  std::int64_t episode = 0;
  std::uint64_t seed = 0;
  std::vector<int> policy_ids;
  std::vector<int> reward_ids;
  std::vector<std::vector<double>> reward_thetas;  // flat genotypes per slot
  std::vector<double> returns;
  std::vector<double> intrinsic_returns;
  int length = 0;
  bool numeric_failure = false;
  std::vector<std::vector<Action>> actions;  // [player][t]
};

// Throws IntegrityError when the log is missing, truncated or has no line
// for the episode.
ReplayRecord load_replay_record(const std::filesystem::path& run_dir, std::int64_t episode);
std::vector<ReplayRecord> load_replay_log(const std::filesystem::path& run_dir);

struct ReplayOptions {
  std::ostream* text_frames = nullptr;  // one ASCII frame per step
  std::filesystem::path ppm_dir;        // one PPM image per step if non-empty
  int ppm_scale = 8;
};

struct ReplayResult {
  std::vector<double> returns;
  std::vector<double> intrinsic_returns;
  bool returns_match = false;
  // Intrinsic rewards are recomputed only for retrospective features;
  // prospective ones depend on policy value estimates that are not logged.
  bool intrinsic_checked = false;
  bool intrinsic_match = false;
  int steps = 0;
};

ReplayResult replay_episode(const ExperimentConfig& config, const ReplayRecord& record,
                            const ReplayOptions& options = {});

// Writes the full map as a binary PPM, each cell scale x scale pixels.
void write_ppm(const EnvState& state, const std::filesystem::path& path, int scale);

}  // namespace isd

#endif  // ISD_REPLAY_H_

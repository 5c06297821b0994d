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
#ifndef ISD_CONFIG_H_
#define ISD_CONFIG_H_

// Experiment configuration and its flat "section.key = value" text form.
//
//   # comment
//   env.game = harvest
//   evo.population_size = 16   # trailing comments are allowed
//
// Unknown keys are rejected. Keys may appear in any order; env.preset and
// env.game are applied first, then everything else.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "isd/evolution.h"
#include "isd/gridworld.h"
#include "isd/matchmaking.h"
#include "isd/social_reward.h"

namespace isd {

struct LearnerConfig {
  double learning_rate = 4e-4;
  double entropy_cost_min = 2e-4;
  double entropy_cost_max = 0.01;
  double baseline_cost = 0.25;
  double discount = 0.99;
  int hidden = 64;
  int unroll_length = 50;
  int batch_size = 8;
  double rmsprop_decay = 0.99;
  double rmsprop_epsilon = 1e-5;
  double rmsprop_momentum = 0.0;
};

enum class EnvPreset { kMini, kFull };

struct ExperimentConfig {
  EnvPreset env_preset = EnvPreset::kMini;
  EnvConfig env;
  EvoConfig evo;
  LearnerConfig learner;
  FeatureMode feature_mode = FeatureMode::kRetrospective;
  double decay_eta = 0.975;
  Matchmaking matchmaking = Matchmaking::kRandom;
  int arenas = 4;
  std::int64_t total_episodes = 1000;
  std::uint64_t seed = 1;
  std::string output_dir = "runs/default";
  std::int64_t checkpoint_every = 500;  // episodes; 0 writes only the final one
  bool strict_order = false;
  bool replay_log = true;
  std::string checkpoint_format = "cbor";  // cbor | json

  // Cross-field checks; throws ConfigError with a diagnostic.
  void validate() const;

  // Desk-scale defaults: mini Harvest map, population 16, 4 arenas.
  static ExperimentConfig defaults();
};

ExperimentConfig parse_config(std::string_view text,
                              const std::vector<std::string>& overrides = {});
ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides = {});

// Complete, re-parseable dump with the reference value of each constant noted.
std::string config_to_text(const ExperimentConfig& config);

std::vector<std::string> config_keys();

}  // namespace isd

#endif  // ISD_CONFIG_H_

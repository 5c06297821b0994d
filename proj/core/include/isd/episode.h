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
#ifndef ISD_EPISODE_H_
#define ISD_EPISODE_H_

// One arena episode: players act, the environment steps, social features
// and intrinsic rewards are computed every step, and the resulting
// trajectories feed one learner pass per player.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "isd/gridworld.h"
#include "isd/learner.h"
#include "isd/metrics.h"
#include "isd/social_reward.h"

namespace isd {

struct EpisodeSetup {
  const EnvConfig* env = nullptr;
  std::uint64_t seed = 0;  // episode seed; env and player streams derive from it
  std::vector<const PolicyParams*> policies;       // one per player
  std::vector<const RewardNetParams*> reward_nets; // one per player, or empty
  FeatureMode feature_mode = FeatureMode::kRetrospective;
  double decay_eta = 0.975;
};

std::uint64_t env_seed_for(std::uint64_t episode_seed);
std::uint64_t player_seed_for(std::uint64_t episode_seed, int player);

struct EpisodeResult {
  std::vector<std::vector<TrajectoryStep>> steps;  // [player][t]
  std::vector<std::vector<Action>> actions;        // [player][t]
  std::vector<double> returns;                     // extrinsic, per player
  std::vector<double> intrinsic_returns;           // per player
  std::vector<double> clean_steps;                 // per player
  EpisodeStats stats;
  int apples_eaten = 0;
  int length = 0;
  bool numeric_failure = false;
  std::string failure;
};

EpisodeResult run_episode(const EpisodeSetup& setup);

// Cuts one player's episode into unroll segments; each segment bootstraps
// from the recorded values of the first step after it (zero at episode end).
std::vector<Trajectory> segment_trajectory(std::span<const TrajectoryStep> steps,
                                           int unroll_length);

// Applies updates over consecutive minibatches of batch_size segments.
std::vector<LossReport> learn_from_episode(PolicyParams& params, OptState& opt,
                                           const Hyperparams& hyper,
                                           std::span<const TrajectoryStep> steps,
                                           int unroll_length, int batch_size);

}  // namespace isd

#endif  // ISD_EPISODE_H_

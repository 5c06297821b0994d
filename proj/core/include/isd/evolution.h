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
#ifndef ISD_EVOLUTION_H_
#define ISD_EVOLUTION_H_

// Two-population natural selection. Policy individuals carry network
// weights, optimizer state and evolvable hyperparameters; reward
// individuals carry reward-network genotypes. Both are ranked on smoothed
// episode return and evolved with PBT-style exploit/explore, inheriting
// learned weights directly (Lamarckian).

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "isd/learner.h"
#include "isd/random.h"
#include "isd/social_reward.h"

namespace isd {

enum class RewardMode { kNone, kIndividual, kShared };

std::string_view to_string(RewardMode mode);
RewardMode parse_reward_mode(std::string_view text);

struct EvoConfig {
  int population_size = 50;
  double mutation_prob = 0.1;
  double multiplicative_step = 0.2;  // hyperparameters scale by 1 +/- step
  double additive_step = 0.1;        // reward-net entries shift by +/- step
  double fitness_smoothing = 0.001;  // nu
  std::int64_t burn_in_steps = 4'000'000;
  RewardMode reward_mode = RewardMode::kShared;
  double exploit_margin = 0.2;       // fraction of the fitness IQR
  double reward_init_range = 0.1;    // reward-net init U(-r, r)
  bool shared_fitness_mean = false;  // group mean instead of group sum
  int evolve_every_episodes = 10;

  void validate(int group_size) const;
};

struct PolicyIndividual {
  int id = 0;
  PolicyParams params;
  Hyperparams hyper;
  OptState opt;
  double fitness = 0.0;
  std::int64_t episodes_played = 0;
  // Agent steps since this individual's payload was last replaced; gates
  // burn-in.
  std::int64_t steps_played = 0;
  std::int64_t total_steps = 0;
};

struct RewardIndividual {
  int id = 0;
  RewardNetParams theta;
  double fitness = 0.0;
  std::int64_t episodes_played = 0;
  std::int64_t steps_played = 0;
  std::int64_t total_steps = 0;
};

struct Populations {
  std::vector<PolicyIndividual> policies;
  std::vector<RewardIndividual> rewards;  // empty in kNone mode

  // Fresh populations: policy weights from the initializer, entropy costs
  // from LogUniform, reward genotypes uniform in +/- reward_init_range.
  static Populations create(const EvoConfig& config, const NetShape& shape,
                            int num_players, double learning_rate, Rng& rng,
                            double entropy_lo = 2e-4, double entropy_hi = 0.01);
};

// F' = (1 - nu) F + nu R
double smooth_fitness(double prev, double episode_return, double nu);

// Who played an episode and how it went.
struct EpisodeAssignment {
  std::vector<int> policy_ids;       // one per player slot
  std::vector<int> reward_ids;       // one per slot; empty in kNone mode
  std::vector<double> returns;       // extrinsic return per slot
  std::int64_t steps = 0;            // episode length in environment steps
};

// Smooths each policy's fitness toward its own return. In kShared mode the
// (single) reward individual moves toward the group total; in kIndividual
// mode each reward net moves toward its carrier's return. Throws
// IntegrityError on unknown ids.
void assign_fitness(const EpisodeAssignment& episode, Populations& pops,
                    const EvoConfig& config);

// With probability mutation_prob per scalar: learning rate and entropy cost
// scale by (1 +/- step); reward-net entries shift by +/- additive_step.
// Policy weights are never mutated.
void mutate(PolicyIndividual& individual, const EvoConfig& config, Rng& rng);
void mutate(RewardIndividual& individual, const EvoConfig& config, Rng& rng);

struct CopyEvent {
  bool reward_population = false;
  int copier = 0;
  int source = 0;
  double copier_fitness = 0.0;
  double source_fitness = 0.0;
};

// Linear-interpolation interquartile range.
double interquartile_range(std::vector<double> values);

// For every individual past burn-in, compares against one uniformly drawn
// eligible peer from a snapshot taken at entry; if the peer leads by more
// than exploit_margin * IQR, copies the peer's payload (weights, optimizer
// state, hyperparameters, fitness) and mutates the copy. The copier's
// burn-in counter restarts. When paired_rewards is given (kIndividual
// mode), reward nets with matching ids travel with their policies.
std::vector<CopyEvent> exploit_explore(
    std::vector<PolicyIndividual>& population, const EvoConfig& config,
    Rng& rng, std::vector<RewardIndividual>* paired_rewards = nullptr);
std::vector<CopyEvent> exploit_explore(std::vector<RewardIndividual>& population,
                                       const EvoConfig& config, Rng& rng);

struct PlayerSample {
  std::vector<int> policy_ids;
  std::vector<int> reward_ids;  // parallel to policy_ids; empty in kNone mode
};

// Reward nets for an already formed group: kShared draws one uniformly and
// gives it to everyone, kIndividual pairs ids, kNone leaves it empty.
std::vector<int> attach_reward_nets(std::span<const int> policy_ids,
                                    const Populations& pops,
                                    RewardMode mode, Rng& rng);

// group_size distinct policy individuals uniformly at random plus their
// reward nets.
PlayerSample sample_players(const Populations& pops, const EvoConfig& config,
                            int group_size, Rng& rng);

}  // namespace isd

#endif  // ISD_EVOLUTION_H_

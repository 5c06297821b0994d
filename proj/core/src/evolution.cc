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
#include "isd/evolution.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "isd/errors.h"

namespace isd {

std::string_view to_string(RewardMode mode) {
  switch (mode) {
    case RewardMode::kNone: return "none";
    case RewardMode::kIndividual: return "individual";
    case RewardMode::kShared: return "shared";
  }
  return "?";
}

RewardMode parse_reward_mode(std::string_view text) {
  if (text == "none") return RewardMode::kNone;
  if (text == "individual") return RewardMode::kIndividual;
  if (text == "shared") return RewardMode::kShared;
  throw ConfigError("unknown reward mode '" + std::string(text) + "'");
}

void EvoConfig::validate(int group_size) const {
  if (population_size < group_size) {
    throw ConfigError("population_size " + std::to_string(population_size) +
                      " is smaller than the group size " +
                      std::to_string(group_size));
  }
  if (!(mutation_prob >= 0.0 && mutation_prob <= 1.0)) {
    throw ConfigError("mutation_prob must lie in [0,1]");
  }
  if (!(fitness_smoothing >= 0.0 && fitness_smoothing <= 1.0)) {
    throw ConfigError("fitness_smoothing must lie in [0,1]");
  }
  if (!(multiplicative_step >= 0.0 && multiplicative_step < 1.0)) {
    throw ConfigError("multiplicative_step must lie in [0,1)");
  }
  if (additive_step < 0.0 || exploit_margin < 0.0 || reward_init_range < 0.0) {
    throw ConfigError("evolution steps and margins must be nonnegative");
  }
  if (burn_in_steps < 0) throw ConfigError("burn_in_steps must be nonnegative");
  if (evolve_every_episodes <= 0) {
    throw ConfigError("evolve_every_episodes must be positive");
  }
}

Populations Populations::create(const EvoConfig& config, const NetShape& shape,
                                int num_players, double learning_rate, Rng& rng,
                                double entropy_lo, double entropy_hi) {
  Populations pops;
  for (int i = 0; i < config.population_size; ++i) {
    PolicyIndividual ind;
    ind.id = i;
    ind.params = PolicyParams::initialize(shape, rng);
    ind.hyper = Hyperparams::sample(rng, learning_rate, entropy_lo, entropy_hi);
    ind.opt = OptState::for_params(ind.params);
    pops.policies.push_back(std::move(ind));
  }
  if (config.reward_mode != RewardMode::kNone) {
    for (int i = 0; i < config.population_size; ++i) {
      RewardIndividual ind;
      ind.id = i;
      ind.theta = RewardNetParams::random_uniform(
          num_players, -config.reward_init_range, config.reward_init_range, rng);
      pops.rewards.push_back(std::move(ind));
    }
  }
  return pops;
}

double smooth_fitness(double prev, double episode_return, double nu) {
  return (1.0 - nu) * prev + nu * episode_return;
}

namespace {

template <typename T>
T& find_by_id(std::vector<T>& individuals, int id, const char* what) {
  if (id >= 0 && id < static_cast<int>(individuals.size()) &&
      individuals[id].id == id) {
    return individuals[id];
  }
  for (auto& ind : individuals) {
    if (ind.id == id) return ind;
  }
  throw IntegrityError(std::string("unknown ") + what + " id " + std::to_string(id));
}

double perturb_multiplicative(double value, const EvoConfig& config, Rng& rng) {
  if (!bernoulli(rng, config.mutation_prob)) return value;
  const bool up = bernoulli(rng, 0.5);
  return value * (up ? 1.0 + config.multiplicative_step
                     : 1.0 - config.multiplicative_step);
}

template <typename Individual>
std::vector<int> eligible_ids(const std::vector<Individual>& population,
                              const EvoConfig& config) {
  std::vector<int> ids;
  for (std::size_t k = 0; k < population.size(); ++k) {
    if (population[k].steps_played >= config.burn_in_steps) {
      ids.push_back(static_cast<int>(k));
    }
  }
  return ids;
}

// Shared exploit/explore driver. copy(dst_index, src_snapshot) installs
// the payload and mutates it.
template <typename Individual, typename CopyFn>
std::vector<CopyEvent> run_exploit_explore(std::vector<Individual>& population,
                                           const EvoConfig& config, Rng& rng,
                                           bool reward_population, CopyFn copy) {
  std::vector<CopyEvent> events;
  const std::vector<int> eligible = eligible_ids(population, config);
  if (eligible.size() < 2) return events;
  const std::vector<Individual> snapshot = population;
  std::vector<double> fitness;
  for (int k : eligible) fitness.push_back(snapshot[k].fitness);
  const double margin = config.exploit_margin * interquartile_range(fitness);

  for (int k : eligible) {
    std::size_t pick = uniform_index(rng, eligible.size() - 1);
    int peer = eligible[pick];
    if (peer == k) peer = eligible.back();  // draw excludes self
    const Individual& self = snapshot[k];
    const Individual& source = snapshot[peer];
    if (!(source.fitness > self.fitness + margin)) continue;
    events.push_back(CopyEvent{reward_population, self.id, source.id,
                               self.fitness, source.fitness});
    copy(static_cast<std::size_t>(k), source, static_cast<std::size_t>(peer));
    population[k].steps_played = 0;
  }
  return events;
}

}  // namespace

void assign_fitness(const EpisodeAssignment& episode, Populations& pops,
                    const EvoConfig& config) {
  const double nu = config.fitness_smoothing;
  const std::size_t n = episode.policy_ids.size();
  if (episode.returns.size() != n) {
    throw IntegrityError("episode returns do not match player slots");
  }
  // Validate every id before mutating anything.
  for (int id : episode.policy_ids) find_by_id(pops.policies, id, "policy");
  for (int id : episode.reward_ids) find_by_id(pops.rewards, id, "reward net");

  for (std::size_t i = 0; i < n; ++i) {
    PolicyIndividual& ind = find_by_id(pops.policies, episode.policy_ids[i], "policy");
    ind.fitness = smooth_fitness(ind.fitness, episode.returns[i], nu);
    ++ind.episodes_played;
    ind.steps_played += episode.steps;
    ind.total_steps += episode.steps;
  }
  if (config.reward_mode == RewardMode::kNone || episode.reward_ids.empty()) return;
  if (episode.reward_ids.size() != n) {
    throw IntegrityError("reward ids do not match player slots");
  }

  if (config.reward_mode == RewardMode::kShared) {
    double group = 0.0;
    for (double r : episode.returns) group += r;
    if (config.shared_fitness_mean && n > 0) group /= static_cast<double>(n);
    // Every slot carries the same net; update it once per episode.
    std::vector<int> seen;
    for (int id : episode.reward_ids) {
      if (std::find(seen.begin(), seen.end(), id) != seen.end()) continue;
      seen.push_back(id);
      RewardIndividual& ind = find_by_id(pops.rewards, id, "reward net");
      ind.fitness = smooth_fitness(ind.fitness, group, nu);
      ++ind.episodes_played;
      const auto carriers = std::count(episode.reward_ids.begin(),
                                       episode.reward_ids.end(), id);
      ind.steps_played += episode.steps * carriers;
      ind.total_steps += episode.steps * carriers;
    }
    return;
  }
  for (std::size_t i = 0; i < n; ++i) {
    RewardIndividual& ind =
        find_by_id(pops.rewards, episode.reward_ids[i], "reward net");
    ind.fitness = smooth_fitness(ind.fitness, episode.returns[i], nu);
    ++ind.episodes_played;
    ind.steps_played += episode.steps;
    ind.total_steps += episode.steps;
  }
}

void mutate(PolicyIndividual& individual, const EvoConfig& config, Rng& rng) {
  individual.hyper.learning_rate =
      perturb_multiplicative(individual.hyper.learning_rate, config, rng);
  individual.hyper.entropy_cost =
      perturb_multiplicative(individual.hyper.entropy_cost, config, rng);
}

void mutate(RewardIndividual& individual, const EvoConfig& config, Rng& rng) {
  std::vector<double> flat = individual.theta.flat();
  for (double& x : flat) {
    if (!bernoulli(rng, config.mutation_prob)) continue;
    x += bernoulli(rng, 0.5) ? config.additive_step : -config.additive_step;
  }
  individual.theta = RewardNetParams::from_flat(individual.theta.num_players, flat);
}

double interquartile_range(std::vector<double> values) {
  if (values.size() < 2) return 0.0;
  std::sort(values.begin(), values.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
  };
  return quantile(0.75) - quantile(0.25);
}

std::vector<CopyEvent> exploit_explore(std::vector<PolicyIndividual>& population,
                                       const EvoConfig& config, Rng& rng,
                                       std::vector<RewardIndividual>* paired_rewards) {
  std::vector<RewardIndividual> reward_snapshot;
  if (paired_rewards != nullptr) reward_snapshot = *paired_rewards;
  return run_exploit_explore(
      population, config, rng, false,
      [&](std::size_t dst, const PolicyIndividual& src, std::size_t src_index) {
        PolicyIndividual& ind = population[dst];
        ind.params = src.params;
        ind.opt = src.opt;
        ind.hyper = src.hyper;
        ind.fitness = src.fitness;
        mutate(ind, config, rng);
        if (paired_rewards != nullptr && src_index < reward_snapshot.size() &&
            dst < paired_rewards->size()) {
          RewardIndividual& reward = (*paired_rewards)[dst];
          reward.theta = reward_snapshot[src_index].theta;
          reward.fitness = reward_snapshot[src_index].fitness;
          reward.steps_played = 0;
          mutate(reward, config, rng);
        }
      });
}

std::vector<CopyEvent> exploit_explore(std::vector<RewardIndividual>& population,
                                       const EvoConfig& config, Rng& rng) {
  return run_exploit_explore(
      population, config, rng, true,
      [&](std::size_t dst, const RewardIndividual& src, std::size_t) {
        RewardIndividual& ind = population[dst];
        ind.theta = src.theta;
        ind.fitness = src.fitness;
        mutate(ind, config, rng);
      });
}

std::vector<int> attach_reward_nets(std::span<const int> policy_ids,
                                    const Populations& pops, RewardMode mode,
                                    Rng& rng) {
  switch (mode) {
    case RewardMode::kNone:
      return {};
    case RewardMode::kIndividual:
      return std::vector<int>(policy_ids.begin(), policy_ids.end());
    case RewardMode::kShared: {
      if (pops.rewards.empty()) throw ConfigError("reward population is empty");
      const int id = pops.rewards[uniform_index(rng, pops.rewards.size())].id;
      return std::vector<int>(policy_ids.size(), id);
    }
  }
  return {};
}

PlayerSample sample_players(const Populations& pops, const EvoConfig& config,
                            int group_size, Rng& rng) {
  if (static_cast<int>(pops.policies.size()) < group_size || group_size <= 0) {
    throw ConfigError("population is smaller than the group size");
  }
  std::vector<int> ids;
  for (const auto& ind : pops.policies) ids.push_back(ind.id);
  // Partial Fisher-Yates: the first group_size entries are a uniform draw.
  for (int i = 0; i < group_size; ++i) {
    std::size_t j = i + uniform_index(rng, ids.size() - i);
    std::swap(ids[i], ids[j]);
  }
  ids.resize(group_size);
  PlayerSample sample;
  sample.policy_ids = ids;
  sample.reward_ids = attach_reward_nets(ids, pops, config.reward_mode, rng);
  return sample;
}

}  // namespace isd

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
#include "isd/episode.h"

#include <algorithm>

#include "isd/errors.h"

namespace isd {

std::uint64_t env_seed_for(std::uint64_t episode_seed) {
  return derive_seed(episode_seed, 0);
}

std::uint64_t player_seed_for(std::uint64_t episode_seed, int player) {
  return derive_seed(episode_seed, 1 + static_cast<std::uint64_t>(player));
}

EpisodeResult run_episode(const EpisodeSetup& setup) {
  if (setup.env == nullptr) throw UsageError("run_episode: missing env config");
  const EnvConfig& env_cfg = *setup.env;
  const int n = env_cfg.num_players;
  if (static_cast<int>(setup.policies.size()) != n) {
    throw UsageError("run_episode: one policy per player required");
  }
  const bool intrinsic = !setup.reward_nets.empty();
  if (intrinsic && static_cast<int>(setup.reward_nets.size()) != n) {
    throw UsageError("run_episode: one reward net per player required");
  }

  EnvState state = EnvState::reset(env_cfg, env_seed_for(setup.seed));
  const int actions_count = num_actions(env_cfg.game);
  const ObservationEncoder encoder(env_cfg.obs_window, actions_count);
  std::vector<Rng> player_rng;
  for (int i = 0; i < n; ++i) player_rng.emplace_back(player_seed_for(setup.seed, i));

  EpisodeResult result;
  result.steps.resize(n);
  result.actions.resize(n);
  result.returns.assign(n, 0.0);
  result.intrinsic_returns.assign(n, 0.0);
  result.clean_steps.assign(n, 0.0);
  result.stats.returns.assign(n, 0.0);
  result.stats.tags_fired.assign(n, 0);
  result.stats.reward_times.resize(n);
  result.stats.episode_length = env_cfg.episode_length;
  for (int i = 0; i < n; ++i) {
    result.steps[i].reserve(env_cfg.episode_length);
    result.actions[i].reserve(env_cfg.episode_length);
  }

  std::vector<Observation> obs;
  for (int i = 0; i < n; ++i) obs.push_back(state.observe(i));
  std::vector<int> last_action(n, -1);
  std::vector<double> last_u(n, 0.0), last_r(n, 0.0);
  DecayState decay = DecayState::zeros(n, setup.decay_eta);
  std::vector<Action> joint(n);
  std::vector<double> value_ext(n);

  try {
    while (!state.done()) {
      const int t = state.t();
      for (int i = 0; i < n; ++i) {
        TrajectoryStep step;
        step.input = encoder.encode(obs[i], last_action[i], last_u[i], last_r[i]);
        const ActResult out = act(*setup.policies[i], step.input, player_rng[i]);
        step.action = out.action;
        step.log_prob = out.log_prob;
        step.value_ext = out.value_ext;
        step.value_int = out.value_int;
        value_ext[i] = out.value_ext;
        joint[i] = static_cast<Action>(out.action);
        result.steps[i].push_back(std::move(step));
      }
      std::vector<bool> was_active(n);
      for (int i = 0; i < n; ++i) was_active[i] = state.players()[i].active();
      StepOutcome outcome = state.step(joint);
      decay = update_decay(decay, outcome.rewards);
      for (int i = 0; i < n; ++i) {
        double u = 0.0;
        if (intrinsic) {
          const std::vector<double> f =
              build_features(setup.feature_mode, i, decay, value_ext);
          u = intrinsic_reward(*setup.reward_nets[i], f);
        }
        TrajectoryStep& step = result.steps[i].back();
        step.reward_ext = outcome.rewards[i];
        step.reward_int = u;
        result.actions[i].push_back(joint[i]);
        result.returns[i] += outcome.rewards[i];
        result.intrinsic_returns[i] += u;
        if (joint[i] == Action::kTag && was_active[i]) {
          ++result.stats.tags_fired[i];
        }
        if (joint[i] == Action::kClean) result.clean_steps[i] += 1.0;
        if (outcome.rewards[i] > 0.0) result.stats.reward_times[i].push_back(t);
        last_action[i] = static_cast<int>(joint[i]);
        last_u[i] = u;
        last_r[i] = outcome.rewards[i];
      }
      for (const Event& e : outcome.events) {
        if (std::holds_alternative<AppleEaten>(e)) ++result.apples_eaten;
      }
      obs = std::move(outcome.observations);
    }
  } catch (const NumericError& e) {
    result.numeric_failure = true;
    result.failure = e.what();
  }
  result.length = state.t();
  result.stats.returns = result.returns;
  return result;
}

std::vector<Trajectory> segment_trajectory(std::span<const TrajectoryStep> steps,
                                           int unroll_length) {
  if (unroll_length <= 0) throw UsageError("unroll_length must be positive");
  std::vector<Trajectory> segments;
  for (std::size_t start = 0; start < steps.size(); start += unroll_length) {
    const std::size_t end = std::min(steps.size(), start + unroll_length);
    Trajectory traj;
    traj.steps.assign(steps.begin() + start, steps.begin() + end);
    if (end < steps.size()) {
      traj.bootstrap_ext = steps[end].value_ext;
      traj.bootstrap_int = steps[end].value_int;
    }
    segments.push_back(std::move(traj));
  }
  return segments;
}

std::vector<LossReport> learn_from_episode(PolicyParams& params, OptState& opt,
                                           const Hyperparams& hyper,
                                           std::span<const TrajectoryStep> steps,
                                           int unroll_length, int batch_size) {
  std::vector<Trajectory> segments = segment_trajectory(steps, unroll_length);
  std::vector<LossReport> reports;
  for (std::size_t start = 0; start < segments.size(); start += batch_size) {
    const std::size_t count = std::min<std::size_t>(batch_size, segments.size() - start);
    reports.push_back(update(params, opt,
                             std::span<const Trajectory>(segments).subspan(start, count),
                             hyper));
  }
  return reports;
}

}  // namespace isd

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
#ifndef ISD_SOCIAL_REWARD_H_
#define ISD_SOCIAL_REWARD_H_

// Intrinsic social-preference rewards. Each player's reward network maps a
// vector of per-player reward signals (own signal first) through a ReLU
// layer with two hidden units to a scalar bonus added to the extrinsic
// reward.

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "isd/random.h"

namespace isd {

inline constexpr int kRewardHidden = 2;

// Genotype of the reward network. w is num_players x 2, column-major, so
// column k holds the input weights of hidden unit k.
struct RewardNetParams {
  int num_players = 0;
  std::vector<double> w;
  std::array<double, kRewardHidden> b{};
  std::array<double, kRewardHidden> v{};

  double& weight(int input, int hidden) { return w[hidden * num_players + input]; }
  double weight(int input, int hidden) const {
    return w[hidden * num_players + input];
  }

  // Number of scalars: 2 * num_players + 2 + 2.
  std::size_t size() const { return w.size() + b.size() + v.size(); }

  // Flat order: w column-major, then b, then v.
  std::vector<double> flat() const;
  static RewardNetParams from_flat(int num_players, std::span<const double> values);

  static RewardNetParams zeros(int num_players);
  // Every entry drawn uniformly from [lo, hi).
  static RewardNetParams random_uniform(int num_players, double lo, double hi,
                                        Rng& rng);

  bool operator==(const RewardNetParams&) const = default;
};

// Text form: "rewardnet num_players=<n> hidden=2" then the flat values.
std::string serialize_genotype(const RewardNetParams& theta);
RewardNetParams parse_genotype(std::string_view text);

// Exponentially decayed extrinsic reward per player.
struct DecayState {
  std::vector<double> e;
  double eta = 0.975;

  static DecayState zeros(int num_players, double eta = 0.975) {
    return DecayState{std::vector<double>(num_players, 0.0), eta};
  }
};

// e_j <- eta * e_j + r_j for every player j.
DecayState update_decay(const DecayState& state, std::span<const double> extrinsic);

enum class FeatureMode { kRetrospective, kProspective };

std::string_view to_string(FeatureMode mode);
FeatureMode parse_feature_mode(std::string_view text);

// Moves the receiver's entry to the front; the rest keep ascending id order.
std::vector<double> reorder_features(std::span<const double> raw, int receiver);

// Retrospective features read the decayed rewards; prospective features read
// the players' extrinsic value estimates, which callers must pass in (they
// are plain numbers here, so nothing downstream can differentiate through
// them). Throws UsageError when prospective values are missing.
std::vector<double> build_features(FeatureMode mode, int receiver,
                                   const DecayState& decay,
                                   std::span<const double> value_estimates = {});

// v . relu(W^T f + b)
double intrinsic_reward(const RewardNetParams& theta, std::span<const double> f);

inline double total_reward(double extrinsic, double intrinsic) {
  return extrinsic + intrinsic;
}

}  // namespace isd

#endif  // ISD_SOCIAL_REWARD_H_

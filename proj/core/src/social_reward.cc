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
#include "isd/social_reward.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "isd/errors.h"

namespace isd {

std::vector<double> RewardNetParams::flat() const {
  std::vector<double> out(w);
  out.insert(out.end(), b.begin(), b.end());
  out.insert(out.end(), v.begin(), v.end());
  return out;
}

RewardNetParams RewardNetParams::from_flat(int num_players,
                                           std::span<const double> values) {
  RewardNetParams theta = zeros(num_players);
  if (values.size() != theta.size()) {
    throw UsageError("reward genotype has " + std::to_string(values.size()) +
                     " values, expected " + std::to_string(theta.size()));
  }
  auto it = values.begin();
  std::copy_n(it, theta.w.size(), theta.w.begin());
  it += static_cast<std::ptrdiff_t>(theta.w.size());
  std::copy_n(it, kRewardHidden, theta.b.begin());
  it += kRewardHidden;
  std::copy_n(it, kRewardHidden, theta.v.begin());
  return theta;
}

RewardNetParams RewardNetParams::zeros(int num_players) {
  if (num_players <= 0) throw UsageError("reward network needs players");
  RewardNetParams theta;
  theta.num_players = num_players;
  theta.w.assign(static_cast<std::size_t>(num_players) * kRewardHidden, 0.0);
  return theta;
}

RewardNetParams RewardNetParams::random_uniform(int num_players, double lo,
                                                double hi, Rng& rng) {
  RewardNetParams theta = zeros(num_players);
  for (double& x : theta.w) x = uniform(rng, lo, hi);
  for (double& x : theta.b) x = uniform(rng, lo, hi);
  for (double& x : theta.v) x = uniform(rng, lo, hi);
  return theta;
}

std::string serialize_genotype(const RewardNetParams& theta) {
  std::string out = "rewardnet num_players=" + std::to_string(theta.num_players) +
                    " hidden=" + std::to_string(kRewardHidden) + "\n";
  char buf[32];
  bool first = true;
  for (double x : theta.flat()) {
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    if (!first) out += ' ';
    out += buf;
    first = false;
  }
  out += '\n';
  return out;
}

RewardNetParams parse_genotype(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string tag, players_field, hidden_field;
  in >> tag >> players_field >> hidden_field;
  if (tag != "rewardnet" || players_field.rfind("num_players=", 0) != 0 ||
      hidden_field.rfind("hidden=", 0) != 0) {
    throw IntegrityError("malformed reward genotype header");
  }
  const int num_players = std::stoi(players_field.substr(12));
  const int hidden = std::stoi(hidden_field.substr(7));
  if (hidden != kRewardHidden || num_players <= 0) {
    throw IntegrityError("unsupported reward genotype shape");
  }
  std::vector<double> values;
  double x;
  while (in >> x) values.push_back(x);
  if (!in.eof()) throw IntegrityError("non-numeric value in reward genotype");
  if (values.size() != static_cast<std::size_t>(2 * num_players + 4)) {
    throw IntegrityError("truncated reward genotype");
  }
  return RewardNetParams::from_flat(num_players, values);
}

DecayState update_decay(const DecayState& state,
                        std::span<const double> extrinsic) {
  if (extrinsic.size() != state.e.size()) {
    throw UsageError("update_decay: reward vector has the wrong length");
  }
  DecayState next = state;
  for (std::size_t j = 0; j < next.e.size(); ++j) {
    next.e[j] = state.eta * state.e[j] + extrinsic[j];
  }
  return next;
}

std::string_view to_string(FeatureMode mode) {
  return mode == FeatureMode::kRetrospective ? "retrospective" : "prospective";
}

FeatureMode parse_feature_mode(std::string_view text) {
  if (text == "retrospective") return FeatureMode::kRetrospective;
  if (text == "prospective") return FeatureMode::kProspective;
  throw ConfigError("unknown feature mode '" + std::string(text) + "'");
}

std::vector<double> reorder_features(std::span<const double> raw, int receiver) {
  if (receiver < 0 || receiver >= static_cast<int>(raw.size())) {
    throw UsageError("reorder_features: receiver out of range");
  }
  std::vector<double> f;
  f.reserve(raw.size());
  f.push_back(raw[receiver]);
  for (int j = 0; j < static_cast<int>(raw.size()); ++j) {
    if (j != receiver) f.push_back(raw[j]);
  }
  return f;
}

std::vector<double> build_features(FeatureMode mode, int receiver,
                                   const DecayState& decay,
                                   std::span<const double> value_estimates) {
  if (mode == FeatureMode::kRetrospective) {
    return reorder_features(decay.e, receiver);
  }
  if (value_estimates.empty()) {
    throw UsageError("prospective features need extrinsic value estimates");
  }
  return reorder_features(value_estimates, receiver);
}

double intrinsic_reward(const RewardNetParams& theta, std::span<const double> f) {
  if (static_cast<int>(f.size()) != theta.num_players ||
      theta.w.size() != f.size() * kRewardHidden) {
    throw UsageError("intrinsic_reward: feature length does not match network");
  }
  double u = 0.0;
  for (int k = 0; k < kRewardHidden; ++k) {
    double pre = theta.b[k];
    for (int j = 0; j < theta.num_players; ++j) pre += theta.weight(j, k) * f[j];
    u += theta.v[k] * std::max(0.0, pre);
  }
  return u;
}

}  // namespace isd

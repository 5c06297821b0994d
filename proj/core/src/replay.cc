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
#include "isd/replay.h"

#include <array>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "isd/episode.h"
#include "isd/errors.h"
#include "isd/social_reward.h"

namespace isd {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

ReplayRecord parse_record(const std::string& line, int num_actions_max) {
  const json j = json::parse(line);
  ReplayRecord r;
  r.episode = j.at("episode").get<std::int64_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.policy_ids = j.at("policy_ids").get<std::vector<int>>();
  r.reward_ids = j.at("reward_ids").get<std::vector<int>>();
  r.reward_thetas = j.at("reward_thetas").get<std::vector<std::vector<double>>>();
  r.returns = j.at("returns").get<std::vector<double>>();
  r.intrinsic_returns = j.at("intrinsic_returns").get<std::vector<double>>();
  r.length = j.at("length").get<int>();
  r.numeric_failure = j.value("numeric_failure", false);
  for (const auto& digits : j.at("actions")) {
    std::vector<Action> seq;
    for (char c : digits.get<std::string>()) {
      const int a = c - '0';
      if (a < 0 || a >= num_actions_max) {
        throw IntegrityError("replay log has an invalid action code");
      }
      seq.push_back(static_cast<Action>(a));
    }
    r.actions.push_back(std::move(seq));
  }
  if (r.actions.size() != r.returns.size()) {
    throw IntegrityError("replay record " + std::to_string(r.episode) +
                         " has mismatched player counts");
  }
  return r;
}

std::ifstream open_log(const fs::path& run_dir) {
  const fs::path path = run_dir / "replay.jsonl";
  std::ifstream in(path);
  if (!in) throw IntegrityError("no replay log at '" + path.string() + "'");
  return in;
}

}  // namespace

std::vector<ReplayRecord> load_replay_log(const fs::path& run_dir) {
  std::ifstream in = open_log(run_dir);
  std::vector<ReplayRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(parse_record(line, 8));
    } catch (const json::exception& e) {
      throw IntegrityError("truncated or corrupt replay log line " +
                           std::to_string(out.size() + 1) + ": " + e.what());
    }
  }
  return out;
}

ReplayRecord load_replay_record(const fs::path& run_dir, std::int64_t episode) {
  std::ifstream in = open_log(run_dir);
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      // Fields serialize in key order, so the episode number sits after
      // the action strings; parse fully only when it matches.
      const auto pos = line.find("\"episode\":");
      if (pos == std::string::npos) throw IntegrityError("missing episode field");
      const std::int64_t e = std::stoll(line.substr(pos + 10));
      if (e != episode) continue;
      return parse_record(line, 8);
    } catch (const json::exception& ex) {
      throw IntegrityError("truncated or corrupt replay log line " + std::to_string(line_no) +
                           ": " + ex.what());
    } catch (const std::invalid_argument&) {
      throw IntegrityError("corrupt replay log line " + std::to_string(line_no));
    }
  }
  throw IntegrityError("episode " + std::to_string(episode) + " not found in replay log");
}

void write_ppm(const EnvState& state, const fs::path& path, int scale) {
  static constexpr std::array<std::array<std::uint8_t, 3>, kNumCellKinds> kCellColor = {{
      {0, 0, 0},        // empty
      {95, 95, 95},     // wall
      {0, 220, 0},      // apple
      {140, 120, 40},   // waste
      {40, 40, 20},     // field soil
      {0, 120, 200},    // aquifer
  }};
  static constexpr std::array<std::array<std::uint8_t, 3>, 10> kPlayerColor = {{
      {230, 25, 75}, {255, 225, 25}, {245, 130, 48}, {145, 30, 180}, {70, 240, 240},
      {240, 50, 230}, {210, 245, 60}, {250, 190, 212}, {170, 110, 40}, {255, 255, 255},
  }};
  const EnvConfig& cfg = state.config();
  const int w = cfg.width * scale;
  const int h = cfg.height * scale;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IntegrityError("cannot write '" + path.string() + "'");
  out << "P6\n" << w << ' ' << h << "\n255\n";
  std::vector<char> row(static_cast<std::size_t>(w) * 3);
  for (int y = 0; y < cfg.height; ++y) {
    for (int x = 0; x < cfg.width; ++x) {
      const int id = state.player_at({x, y});
      const auto& c = id >= 0 ? kPlayerColor[id % 10]
                              : kCellColor[static_cast<int>(state.cell({x, y}))];
      for (int s = 0; s < scale; ++s) {
        const std::size_t o = (static_cast<std::size_t>(x) * scale + s) * 3;
        row[o] = static_cast<char>(c[0]);
        row[o + 1] = static_cast<char>(c[1]);
        row[o + 2] = static_cast<char>(c[2]);
      }
    }
    for (int s = 0; s < scale; ++s) out.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
}

ReplayResult replay_episode(const ExperimentConfig& config, const ReplayRecord& record,
                            const ReplayOptions& options) {
  const EnvConfig& env = config.env;
  const int n = env.num_players;
  if (static_cast<int>(record.actions.size()) != n) {
    throw IntegrityError("replay record player count does not match config");
  }
  for (const auto& seq : record.actions) {
    if (static_cast<int>(seq.size()) != record.length) {
      throw IntegrityError("replay record " + std::to_string(record.episode) +
                           " is truncated");
    }
    for (Action a : seq) {
      if (!is_valid_action(env.game, a)) throw IntegrityError("action invalid for this game");
    }
  }
  ReplayResult result;
  result.returns.assign(n, 0.0);
  result.intrinsic_returns.assign(n, 0.0);
  result.intrinsic_checked = config.feature_mode == FeatureMode::kRetrospective;
  std::vector<RewardNetParams> nets;
  for (const auto& flat : record.reward_thetas) nets.push_back(RewardNetParams::from_flat(n, flat));
  if (!nets.empty() && static_cast<int>(nets.size()) != n) {
    throw IntegrityError("replay record has the wrong number of reward genotypes");
  }

  EnvState state = EnvState::reset(env, env_seed_for(record.seed));
  DecayState decay = DecayState::zeros(n, config.decay_eta);
  std::vector<Action> joint(n);
  if (!options.ppm_dir.empty()) fs::create_directories(options.ppm_dir);
  auto emit = [&](int t) {
    if (options.text_frames != nullptr) {
      *options.text_frames << "t=" << t << '\n' << state.render_text();
    }
    if (!options.ppm_dir.empty()) {
      char name[32];
      std::snprintf(name, sizeof(name), "frame_%05d.ppm", t);
      write_ppm(state, options.ppm_dir / name, options.ppm_scale);
    }
  };
  emit(0);
  for (int t = 0; t < record.length; ++t) {
    for (int i = 0; i < n; ++i) joint[i] = record.actions[i][t];
    const StepOutcome outcome = state.step(joint);
    decay = update_decay(decay, outcome.rewards);
    for (int i = 0; i < n; ++i) {
      result.returns[i] += outcome.rewards[i];
      if (result.intrinsic_checked && !nets.empty()) {
        const std::vector<double> f = build_features(FeatureMode::kRetrospective, i, decay);
        result.intrinsic_returns[i] += intrinsic_reward(nets[i], f);
      }
    }
    ++result.steps;
    emit(t + 1);
  }
  result.returns_match = result.returns == record.returns;
  result.intrinsic_match =
      result.intrinsic_checked && result.intrinsic_returns == record.intrinsic_returns;
  return result;
}

}  // namespace isd

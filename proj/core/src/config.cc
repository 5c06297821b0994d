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

#include "isd/config.h"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "isd/errors.h"

namespace isd {

namespace {

std::string trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return std::string(s.substr(begin, end - begin + 1));
}

// Shortest text that parses back to the same double.
std::string fmt_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

double to_double(std::string_view key, const std::string& v) {
  try {
    std::size_t used = 0;
    double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("key '" + std::string(key) + "' expects a number, got '" + v + "'");
  }
}

std::int64_t to_int(std::string_view key, const std::string& v) {
  // Accept plain integers and integral scientific notation (5e4).
  double x = to_double(key, v);
  if (x != static_cast<double>(static_cast<std::int64_t>(x))) {
    throw ConfigError("key '" + std::string(key) + "' expects an integer, got '" + v + "'");
  }
  return static_cast<std::int64_t>(x);
}

std::uint64_t to_uint64(std::string_view key, const std::string& v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("key '" + std::string(key) + "' expects an unsigned integer");
  }
  return out;
}

bool to_bool(std::string_view key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("key '" + std::string(key) + "' expects true or false");
}

// "0:0, 1:0.005, 2:0.02, 3:0.05" -> dense table; missing keys repeat the
// previous value.
SpawnTable to_spawn_table(std::string_view key, const std::string& v) {
  std::map<int, double> entries;
  std::stringstream in(v);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw ConfigError("key '" + std::string(key) + "' expects count:probability pairs");
    }
    int count = static_cast<int>(to_int(key, trim(item.substr(0, colon))));
    if (count < 0) throw ConfigError("spawn table counts must be nonnegative");
    entries[count] = to_double(key, trim(item.substr(colon + 1)));
  }
  if (entries.empty()) throw ConfigError("empty spawn table");
  SpawnTable table(entries.rbegin()->first + 1, 0.0);
  double last = 0.0;
  for (int k = 0; k < static_cast<int>(table.size()); ++k) {
    auto it = entries.find(k);
    if (it != entries.end()) last = it->second;
    table[k] = last;
  }
  return table;
}

std::string spawn_table_text(const SpawnTable& table) {
  std::string out;
  for (std::size_t k = 0; k < table.size(); ++k) {
    if (k > 0) out += ", ";
    out += std::to_string(k) + ":" + fmt_double(table[k]);
  }
  return out;
}

struct KeySpec {
  std::string_view key;
  std::string_view note;  // documented default or reference value
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define ISD_DOUBLE_KEY(name, field, note)                                  \
  KeySpec {                                                                \
    name, note,                                                            \
        [](ExperimentConfig& c, const std::string& v) {                   \
          c.field = to_double(name, v);                                    \
        },                                                                 \
        [](const ExperimentConfig& c) { return fmt_double(c.field); }      \
  }
#define ISD_INT_KEY(name, field, note)                                     \
  KeySpec {                                                                \
    name, note,                                                            \
        [](ExperimentConfig& c, const std::string& v) {                   \
          c.field = static_cast<decltype(c.field)>(to_int(name, v));       \
        },                                                                 \
        [](const ExperimentConfig& c) { return std::to_string(c.field); }  \
  }
#define ISD_BOOL_KEY(name, field, note)                                    \
  KeySpec {                                                                \
    name, note,                                                            \
        [](ExperimentConfig& c, const std::string& v) {                   \
          c.field = to_bool(name, v);                                      \
        },                                                                 \
        [](const ExperimentConfig& c) {                                    \
          return std::string(c.field ? "true" : "false");                  \
        }                                                                  \
  }

const std::vector<KeySpec>& key_specs() {
  static const std::vector<KeySpec> specs = {
      // env.preset and env.game are handled before the table is applied.
      {"env.layout", "built-in name or path; full maps 'cleanup' 25x18, 'harvest' 38x16",
       [](ExperimentConfig& c, const std::string& v) {
         c.env.layout = Layout::load(v);
         c.env.width = c.env.layout.width;
         c.env.height = c.env.layout.height;
       },
       [](const ExperimentConfig& c) { return c.env.layout.name; }},
      ISD_INT_KEY("env.num_players", env.num_players, "reference: 5"),
      ISD_INT_KEY("env.episode_length", env.episode_length, "reference: 1000"),
      ISD_INT_KEY("env.obs_window", env.obs_window, "reference: 15"),
      ISD_DOUBLE_KEY("env.apple_reward", env.apple_reward, "reference: 1"),
      ISD_DOUBLE_KEY("env.tag_cost", env.tag_cost, "reference: 1"),
      ISD_DOUBLE_KEY("env.tag_penalty", env.tag_penalty, "reference: 50"),
      {"env.harvest_spawn_table", "neighbours:probability; table[0] must be 0",
       [](ExperimentConfig& c, const std::string& v) {
         c.env.harvest_spawn_table = to_spawn_table("env.harvest_spawn_table", v);
       },
       [](const ExperimentConfig& c) { return spawn_table_text(c.env.harvest_spawn_table); }},
      ISD_INT_KEY("env.harvest_radius", env.harvest_radius, "default 2"),
      ISD_DOUBLE_KEY("env.cleanup_base_spawn", env.cleanup_base_spawn, "default 0.05"),
      ISD_DOUBLE_KEY("env.waste_critical", env.waste_critical, "default 40 (full maps)"),
      ISD_DOUBLE_KEY("env.waste_accrual", env.waste_accrual, "default 0.5 (full maps)"),
      ISD_INT_KEY("env.beam_length", env.beam_length, "default 3"),
      ISD_INT_KEY("env.beam_width", env.beam_width, "default 1"),
      ISD_BOOL_KEY("env.absolute_moves", env.absolute_moves, "default false (egocentric)"),
      ISD_INT_KEY("env.tag_removal_steps", env.tag_removal_steps, "default 0"),

      {"reward.mode", "none | individual | shared",
       [](ExperimentConfig& c, const std::string& v) {
         c.evo.reward_mode = parse_reward_mode(v);
       },
       [](const ExperimentConfig& c) { return std::string(to_string(c.evo.reward_mode)); }},
      {"reward.features", "retrospective | prospective",
       [](ExperimentConfig& c, const std::string& v) {
         c.feature_mode = parse_feature_mode(v);
       },
       [](const ExperimentConfig& c) { return std::string(to_string(c.feature_mode)); }},
      ISD_DOUBLE_KEY("reward.decay_eta", decay_eta, "reference: 0.975"),
      ISD_DOUBLE_KEY("reward.init_range", evo.reward_init_range, "default 0.1"),
      {"reward.shared_fitness", "sum | mean of the group's returns",
       [](ExperimentConfig& c, const std::string& v) {
         if (v != "sum" && v != "mean") {
           throw ConfigError("reward.shared_fitness expects sum or mean");
         }
         c.evo.shared_fitness_mean = v == "mean";
       },
       [](const ExperimentConfig& c) {
         return std::string(c.evo.shared_fitness_mean ? "mean" : "sum");
       }},

      ISD_DOUBLE_KEY("learner.learning_rate", learner.learning_rate, "reference: 4e-4 initial"),
      ISD_DOUBLE_KEY("learner.entropy_cost_min", learner.entropy_cost_min, "reference: LogUniform(2e-4, 0.01)"),
      ISD_DOUBLE_KEY("learner.entropy_cost_max", learner.entropy_cost_max, "reference: LogUniform(2e-4, 0.01)"),
      ISD_DOUBLE_KEY("learner.baseline_cost", learner.baseline_cost, "reference: 0.25"),
      ISD_DOUBLE_KEY("learner.discount", learner.discount, "reference: 0.99"),
      ISD_INT_KEY("learner.hidden", learner.hidden, "default 64"),
      ISD_INT_KEY("learner.unroll_length", learner.unroll_length, "reference: 100"),
      ISD_INT_KEY("learner.batch_size", learner.batch_size, "reference: 32"),
      ISD_DOUBLE_KEY("learner.rmsprop_decay", learner.rmsprop_decay, "reference: 0.99"),
      ISD_DOUBLE_KEY("learner.rmsprop_epsilon", learner.rmsprop_epsilon, "reference: 1e-5"),
      ISD_DOUBLE_KEY("learner.rmsprop_momentum", learner.rmsprop_momentum, "reference: 0"),

      ISD_INT_KEY("evo.population_size", evo.population_size, "reference: 50"),
      ISD_DOUBLE_KEY("evo.mutation_prob", evo.mutation_prob, "reference: 0.1"),
      ISD_DOUBLE_KEY("evo.multiplicative_step", evo.multiplicative_step, "reference: 0.2"),
      ISD_DOUBLE_KEY("evo.additive_step", evo.additive_step, "reference: 0.1"),
      ISD_DOUBLE_KEY("evo.fitness_smoothing", evo.fitness_smoothing, "reference: 0.001"),
      ISD_INT_KEY("evo.burn_in_steps", evo.burn_in_steps, "reference: 4e6 agent steps"),
      ISD_DOUBLE_KEY("evo.exploit_margin", evo.exploit_margin, "fraction of fitness IQR, default 0.2"),
      ISD_INT_KEY("evo.evolve_every_episodes", evo.evolve_every_episodes, "default 10"),

      {"experiment.matchmaking", "random | assortative",
       [](ExperimentConfig& c, const std::string& v) {
         c.matchmaking = parse_matchmaking(v);
       },
       [](const ExperimentConfig& c) { return std::string(to_string(c.matchmaking)); }},
      ISD_INT_KEY("experiment.arenas", arenas, "reference: 500"),
      ISD_INT_KEY("experiment.total_episodes", total_episodes, ""),
      {"experiment.seed", "",
       [](ExperimentConfig& c, const std::string& v) {
         c.seed = to_uint64("experiment.seed", v);
       },
       [](const ExperimentConfig& c) { return std::to_string(c.seed); }},
      {"experiment.output_dir", "relative paths resolve under $ISD_OUTPUT_ROOT if set",
       [](ExperimentConfig& c, const std::string& v) { c.output_dir = v; },
       [](const ExperimentConfig& c) { return c.output_dir; }},
      ISD_INT_KEY("experiment.checkpoint_every", checkpoint_every, "episodes; 0 = final only"),
      ISD_BOOL_KEY("experiment.strict_order", strict_order, "evolution is always serialized"),
      ISD_BOOL_KEY("experiment.replay_log", replay_log, "write replay.jsonl"),
      {"experiment.checkpoint_format", "cbor | json",
       [](ExperimentConfig& c, const std::string& v) {
         if (v != "cbor" && v != "json") {
           throw ConfigError("experiment.checkpoint_format expects cbor or json");
         }
         c.checkpoint_format = v;
       },
       [](const ExperimentConfig& c) { return c.checkpoint_format; }},
  };
  return specs;
}

#undef ISD_DOUBLE_KEY
#undef ISD_INT_KEY
#undef ISD_BOOL_KEY

std::vector<std::pair<std::string, std::string>> parse_pairs(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> pairs;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    pairs.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return pairs;
}

}  // namespace

void ExperimentConfig::validate() const {
  env.validate();
  evo.validate(env.num_players);
  if (arenas < 1) throw ConfigError("experiment.arenas must be at least 1");
  if (total_episodes < 0) throw ConfigError("experiment.total_episodes must be nonnegative");
  if (checkpoint_every < 0) throw ConfigError("experiment.checkpoint_every must be nonnegative");
  if (matchmaking == Matchmaking::kAssortative &&
      evo.reward_mode == RewardMode::kShared) {
    throw ConfigError(
        "assortative matchmaking cannot be combined with shared reward networks");
  }
  if (!(decay_eta >= 0.0 && decay_eta < 1.0)) {
    throw ConfigError("reward.decay_eta must lie in [0,1)");
  }
  const LearnerConfig& l = learner;
  if (!(l.learning_rate > 0.0) || !(l.entropy_cost_min > 0.0) ||
      !(l.entropy_cost_max >= l.entropy_cost_min) || !(l.baseline_cost > 0.0) ||
      !(l.discount > 0.0 && l.discount <= 1.0)) {
    throw ConfigError("learner hyperparameters must be positive (discount in (0,1])");
  }
  if (l.hidden <= 0 || l.unroll_length <= 0 || l.batch_size <= 0) {
    throw ConfigError("learner.hidden, unroll_length and batch_size must be positive");
  }
  if (l.unroll_length > 100) {
    throw ConfigError("learner.unroll_length may not exceed 100");
  }
  if (!(l.rmsprop_decay >= 0.0 && l.rmsprop_decay < 1.0) || !(l.rmsprop_epsilon > 0.0) ||
      l.rmsprop_momentum < 0.0) {
    throw ConfigError("invalid RMSProp settings");
  }
}

ExperimentConfig ExperimentConfig::defaults() {
  ExperimentConfig c;
  c.env = EnvConfig::mini(GameKind::kHarvest);
  c.evo.population_size = 16;
  c.evo.burn_in_steps = 50'000;
  return c;
}

ExperimentConfig parse_config(std::string_view text,
                              const std::vector<std::string>& overrides) {
  auto pairs = parse_pairs(text);
  for (const auto& o : overrides) {
    auto more = parse_pairs(o);
    pairs.insert(pairs.end(), more.begin(), more.end());
  }
  ExperimentConfig config = ExperimentConfig::defaults();
  GameKind game = GameKind::kHarvest;
  EnvPreset preset = EnvPreset::kMini;
  for (const auto& [key, value] : pairs) {
    if (key == "env.game") game = parse_game_kind(value);
    if (key == "env.preset") {
      if (value == "mini") preset = EnvPreset::kMini;
      else if (value == "full") preset = EnvPreset::kFull;
      else throw ConfigError("env.preset expects mini or full");
    }
  }
  config.env_preset = preset;
  config.env = preset == EnvPreset::kMini ? EnvConfig::mini(game) : EnvConfig::defaults(game);
  if (preset == EnvPreset::kFull) {
    config.learner.unroll_length = 100;
    config.learner.batch_size = 32;
  }
  const auto& specs = key_specs();
  for (const auto& [key, value] : pairs) {
    if (key == "env.game" || key == "env.preset") continue;
    auto it = std::find_if(specs.begin(), specs.end(),
                           [&](const KeySpec& s) { return s.key == key; });
    if (it == specs.end()) throw ConfigError("unknown config key '" + key + "'");
    it->set(config, value);
  }
  config.validate();
  return config;
}

ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), overrides);
}

std::string config_to_text(const ExperimentConfig& config) {
  std::string out = "# isd experiment config v1\n";
  out += "env.preset = ";
  out += config.env_preset == EnvPreset::kMini ? "mini" : "full";
  out += "\nenv.game = " + std::string(to_string(config.env.game)) + "\n";
  for (const auto& spec : key_specs()) {
    out += std::string(spec.key) + " = " + spec.get(config);
    if (!spec.note.empty()) out += "  # " + std::string(spec.note);
    out += '\n';
  }
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys = {"env.preset", "env.game"};
  for (const auto& spec : key_specs()) keys.emplace_back(spec.key);
  return keys;
}

}  // namespace isd

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
#include "isd/checkpoint.h"

#include <filesystem>
#include <fstream>
#include <iterator>

#include <nlohmann/json.hpp>

#include "isd/errors.h"

namespace isd {

using nlohmann::json;

namespace {

json hyper_to_json(const Hyperparams& h) {
  return {{"learning_rate", h.learning_rate},
          {"entropy_cost", h.entropy_cost},
          {"baseline_cost", h.baseline_cost},
          {"discount", h.discount}};
}

Hyperparams hyper_from_json(const json& j) {
  Hyperparams h;
  h.learning_rate = j.at("learning_rate").get<double>();
  h.entropy_cost = j.at("entropy_cost").get<double>();
  h.baseline_cost = j.at("baseline_cost").get<double>();
  h.discount = j.at("discount").get<double>();
  return h;
}

json to_json(const Checkpoint& c) {
  json doc;
  doc["format"] = "isd-checkpoint";
  doc["version"] = kCheckpointVersion;
  doc["episodes_done"] = c.episodes_done;
  doc["episodes_since_evolution"] = c.episodes_since_evolution;
  doc["config"] = c.config_text;
  doc["control_rng"] = rng_to_string(c.control_rng);
  doc["net_shape"] = {{"input_dim", c.net_shape.input_dim},
                      {"hidden", c.net_shape.hidden},
                      {"num_actions", c.net_shape.num_actions}};
  doc["num_players"] = c.num_players;
  json policies = json::array();
  for (const auto& p : c.pops.policies) {
    policies.push_back({{"id", p.id},
                        {"fitness", p.fitness},
                        {"episodes_played", p.episodes_played},
                        {"steps_played", p.steps_played},
                        {"total_steps", p.total_steps},
                        {"hyper", hyper_to_json(p.hyper)},
                        {"params", p.params.data},
                        {"opt",
                         {{"mean_square", p.opt.mean_square},
                          {"momentum_buffer", p.opt.momentum_buffer},
                          {"decay", p.opt.decay},
                          {"epsilon", p.opt.epsilon},
                          {"momentum", p.opt.momentum}}}});
  }
  doc["policies"] = std::move(policies);
  json rewards = json::array();
  for (const auto& r : c.pops.rewards) {
    rewards.push_back({{"id", r.id},
                       {"fitness", r.fitness},
                       {"episodes_played", r.episodes_played},
                       {"steps_played", r.steps_played},
                       {"total_steps", r.total_steps},
                       {"hidden", kRewardHidden},
                       {"theta", r.theta.flat()}});
  }
  doc["rewards"] = std::move(rewards);
  json coop = json::array();
  for (const auto& r : c.coop) {
    coop.push_back({{"id", r.id}, {"score", r.coop_score},
                    {"source_episode", r.source_episode}});
  }
  doc["coop"] = std::move(coop);
  return doc;
}

Checkpoint from_json(const json& doc) {
  if (doc.value("format", "") != "isd-checkpoint") {
    throw IntegrityError("not an isd checkpoint");
  }
  if (doc.at("version").get<int>() != kCheckpointVersion) {
    throw IntegrityError("unsupported checkpoint version");
  }
  Checkpoint c;
  c.episodes_done = doc.at("episodes_done").get<std::int64_t>();
  c.episodes_since_evolution = doc.at("episodes_since_evolution").get<std::int64_t>();
  c.config_text = doc.at("config").get<std::string>();
  c.control_rng = rng_from_string(doc.at("control_rng").get<std::string>());
  const json& shape = doc.at("net_shape");
  c.net_shape = NetShape{shape.at("input_dim").get<int>(), shape.at("hidden").get<int>(),
                         shape.at("num_actions").get<int>()};
  c.num_players = doc.at("num_players").get<int>();
  const std::size_t param_count = c.net_shape.param_count();
  for (const json& j : doc.at("policies")) {
    PolicyIndividual p;
    p.id = j.at("id").get<int>();
    p.fitness = j.at("fitness").get<double>();
    p.episodes_played = j.at("episodes_played").get<std::int64_t>();
    p.steps_played = j.at("steps_played").get<std::int64_t>();
    p.total_steps = j.at("total_steps").get<std::int64_t>();
    p.hyper = hyper_from_json(j.at("hyper"));
    p.params.shape = c.net_shape;
    p.params.data = j.at("params").get<std::vector<double>>();
    if (p.params.data.size() != param_count) {
      throw IntegrityError("policy " + std::to_string(p.id) + " has wrong parameter count");
    }
    const json& opt = j.at("opt");
    p.opt.mean_square = opt.at("mean_square").get<std::vector<double>>();
    p.opt.momentum_buffer = opt.at("momentum_buffer").get<std::vector<double>>();
    p.opt.decay = opt.at("decay").get<double>();
    p.opt.epsilon = opt.at("epsilon").get<double>();
    p.opt.momentum = opt.at("momentum").get<double>();
    c.pops.policies.push_back(std::move(p));
  }
  for (const json& j : doc.at("rewards")) {
    RewardIndividual r;
    r.id = j.at("id").get<int>();
    r.fitness = j.at("fitness").get<double>();
    r.episodes_played = j.at("episodes_played").get<std::int64_t>();
    r.steps_played = j.at("steps_played").get<std::int64_t>();
    r.total_steps = j.at("total_steps").get<std::int64_t>();
    if (j.value("hidden", kRewardHidden) != kRewardHidden) {
      throw IntegrityError("unsupported reward network width");
    }
    r.theta = RewardNetParams::from_flat(c.num_players,
                                         j.at("theta").get<std::vector<double>>());
    c.pops.rewards.push_back(std::move(r));
  }
  for (const json& j : doc.at("coop")) {
    c.coop.push_back(CoopRecord{j.at("id").get<int>(), j.at("score").get<double>(),
                                j.at("source_episode").get<long>()});
  }
  return c;
}

}  // namespace

void write_checkpoint(const Checkpoint& ckpt, const std::string& path,
                      const std::string& format) {
  if (format != "json" && format != "cbor") {
    throw UsageError("checkpoint format must be cbor or json, got '" + format + "'");
  }
  const json doc = to_json(ckpt);
  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IntegrityError("cannot write checkpoint '" + path + "'");
    if (format == "json") {
      out << doc.dump() << '\n';
    } else {
      const std::vector<std::uint8_t> bytes = json::to_cbor(doc);
      out.write(reinterpret_cast<const char*>(bytes.data()),
                static_cast<std::streamsize>(bytes.size()));
    }
    if (!out) throw IntegrityError("short write on checkpoint '" + path + "'");
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IntegrityError("cannot open checkpoint '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (bytes.empty()) throw IntegrityError("checkpoint '" + path + "' is empty");
  try {
    const json doc = bytes.front() == '{' ? json::parse(bytes) : json::from_cbor(bytes);
    return from_json(doc);
  } catch (const json::exception& e) {
    throw IntegrityError("corrupt checkpoint '" + path + "': " + e.what());
  } catch (const UsageError& e) {
    throw IntegrityError("corrupt checkpoint '" + path + "': " + e.what());
  }
}

}  // namespace isd

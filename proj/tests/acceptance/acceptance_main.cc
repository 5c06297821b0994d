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
// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. Optional arguments select criteria by number.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "env_invariants.h"
#include "isd/checkpoint.h"
#include "isd/config.h"
#include "isd/errors.h"
#include "isd/evolution.h"
#include "isd/experiment.h"
#include "isd/learner.h"
#include "isd/matchmaking.h"
#include "isd/metrics.h"
#include "isd/replay.h"
#include "isd/report.h"
#include "isd/social_reward.h"
#include "oracles.h"

namespace isd {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

// Collects failed expectations; a criterion passes when none failed.
class Verdict {
 public:
  void expect(bool ok, const std::string& what) {
    ++checks_;
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    if (!ok) ++failed_;
  }
  void note(std::string text) { notes_.push_back(std::move(text)); }
  bool passed() const { return failed_ == 0; }
  std::string detail() const {
    std::ostringstream out;
    out << checks_ << " checks";
    if (failed_ > 0) out << ", " << failed_ << " failed";
    for (const auto& n : notes_) out << "; " << n;
    for (const auto& f : failures_) out << "; " << f;
    return out.str();
  }

 private:
  long checks_ = 0;
  long failed_ = 0;
  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

fs::path work_dir(const std::string& name) {
  fs::path dir = resolve_output_dir("acceptance/" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// ------------------------------------------------------------ criteria

void equation_oracles(Verdict& v) {
  auto decay = [](double e, double r, double eta) {
    return update_decay(DecayState{{e}, eta}, std::vector<double>{r}).e[0];
  };
  v.expect(decay(0, 1, 0.975) == 1.0, "decay(0,1)");
  v.expect(decay(1, 0, 0.975) == 0.975, "decay(1,0)");
  v.expect(decay(1, 1, 0.975) == 1.975, "decay(1,1)");

  const DecayState e{{10, 20, 30, 40, 50}, 0.975};
  v.expect(build_features(FeatureMode::kRetrospective, 2, e) ==
               std::vector<double>{30, 10, 20, 40, 50},
           "retrospective reorder");
  v.expect(build_features(FeatureMode::kRetrospective, 0, e) == e.e, "identity reorder");
  const std::vector<double> values{1, 2, 3, 4, 5};
  v.expect(build_features(FeatureMode::kProspective, 1, DecayState::zeros(5), values) ==
               std::vector<double>{2, 1, 3, 4, 5},
           "prospective reorder");

  v.expect(intrinsic_reward(RewardNetParams::zeros(5), std::vector<double>{3, -2, 7, 1, 0}) == 0.0,
           "zero network");
  RewardNetParams single = RewardNetParams::zeros(5);
  single.v = {1.0, 0.0};
  single.weight(0, 0) = 1.0;
  v.expect(intrinsic_reward(single, std::vector<double>{2, 9, 9, 9, 9}) == 2.0, "single unit");
  RewardNetParams clamped = RewardNetParams::zeros(5);
  clamped.v = {1.0, 1.0};
  clamped.b = {-1.0, -1.0};
  v.expect(intrinsic_reward(clamped, std::vector<double>{0.5, 0, 0, 0, 0}) == 0.0, "relu clamp");

  v.expect(total_reward(1, 0.5) == 1.5, "total(1,0.5)");
  v.expect(total_reward(0, 0) == 0.0, "total(0,0)");
  v.expect(total_reward(-50, 2) == -48.0, "total(-50,2)");

  v.expect(smooth_fitness(0, 100, 0.001) == 0.1, "smooth(0,100)");
  v.expect(smooth_fitness(50, 50, 0.001) == 50.0, "smooth(50,50)");
  v.expect(smooth_fitness(1, 0, 0.5) == 0.5, "smooth(1,0,0.5)");

  EvoConfig cfg;
  cfg.population_size = 5;
  cfg.reward_mode = RewardMode::kShared;
  Rng rng(1);
  Populations pops = Populations::create(cfg, NetShape{2, 2, 2}, 5, 4e-4, rng);
  for (auto& p : pops.policies) p.fitness = 0.0;
  for (auto& r : pops.rewards) r.fitness = 0.0;
  assign_fitness({{0, 1, 2, 3, 4}, {2, 2, 2, 2, 2}, {10, 10, 10, 10, -40}, 1000}, pops, cfg);
  v.expect(pops.rewards[2].fitness == smooth_fitness(0, 0, 0.001), "shared reward fitness");
  v.expect(pops.policies[0].fitness == smooth_fitness(0, 10, 0.001), "policy fitness");
  v.expect(pops.policies[4].fitness < 0.0, "tag penalty lowers fitness");
  for (auto& r : pops.rewards) r.fitness = 0.0;
  assign_fitness({{0, 1, 2, 3, 4}, {1, 1, 1, 1, 1}, {10, 10, 10, 10, 10}, 1000}, pops, cfg);
  v.expect(std::abs(pops.rewards[1].fitness - 0.05) < 1e-15, "group total 50 gives 0.05");
  v.expect(smooth_fitness(0, 10, 0.001) == 0.01, "policy prev 0 return 10");
}

void gini_oracle(Verdict& v) {
  Rng rng(2718);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(uniform_index(rng, 10));
    std::vector<double> x(n);
    for (double& value : x) value = uniform(rng, 0.0, 100.0);
    const double diff = std::abs(gini(x) - oracle::brute_force_gini(x));
    worst = std::max(worst, diff);
    v.expect(diff <= 1e-12, "random vector " + std::to_string(trial));
  }
  v.note("max |fast - brute| = " + fmt(worst));
  v.expect(std::abs(gini(std::vector<double>{0, 0, 0, 0, 10}) - 0.8) <= 1e-12, "(0,0,0,0,10)");
  v.expect(std::abs(gini(std::vector<double>{1, 2, 3, 4, 5}) - 40.0 / 150.0) <= 1e-12,
           "(1,2,3,4,5)");
}

void environment_invariants(Verdict& v) {
  for (GameKind g : {GameKind::kCleanup, GameKind::kHarvest}) {
    const EnvConfig cfg = EnvConfig::defaults(g);
    const oracle::RolloutReport report = oracle::random_rollout(cfg, 4242, 10000);
    const std::string name(to_string(g));
    v.expect(report.steps == 10000, name + " step count");
    v.expect(report.violations.empty(),
             name + ": " + (report.violations.empty() ? "" : report.violations.front()));
    const auto mono = oracle::spawn_monotonicity(cfg);
    v.expect(mono.empty(), name + " spawn monotonicity" + (mono.empty() ? "" : ": " + mono[0]));
    v.note(name + " apples eaten " + std::to_string(report.apples_eaten) + ", tag hits " +
           std::to_string(report.tag_hits));
  }
  const EnvConfig cleanup = EnvConfig::defaults(GameKind::kCleanup);
  for (std::uint64_t seed : {1ull, 7ull, 99ull}) {
    const EnvState s = EnvState::reset(cleanup, seed);
    v.expect(s.apple_count() == 0, "cleanup reset has apples");
    bool any = false;
    for (int y = 0; y < cleanup.height; ++y) {
      for (int x = 0; x < cleanup.width; ++x) any |= s.spawn_probability_at({x, y}) != 0.0;
    }
    v.expect(!any, "cleanup reset has nonzero spawn probability");
  }
}

ExperimentConfig mini_run(const fs::path& dir, std::int64_t episodes) {
  return parse_config("", {"experiment.arenas = 1",
                           "experiment.total_episodes = " + std::to_string(episodes),
                           "experiment.output_dir = " + dir.string()});
}

void determinism(Verdict& v) {
  const fs::path a = work_dir("determinism_a"), b = work_dir("determinism_b");
  run_experiment(mini_run(a, 10));
  run_experiment(mini_run(b, 10));
  const RunPaths pa(a), pb(b);
  // timing.csv records wall-clock durations and is excluded by design.
  for (auto member : {&RunPaths::episodes, &RunPaths::losses, &RunPaths::evolution,
                      &RunPaths::replay}) {
    const std::string x = slurp(pa.*member), y = slurp(pb.*member);
    v.expect(!x.empty() && x == y, (pa.*member).filename().string() + " differs");
  }
  const ExperimentConfig config = load_config(pa.config.string());
  const auto records = load_replay_log(a);
  v.expect(records.size() == 10, "replay log has " + std::to_string(records.size()) + " records");
  for (const auto& record : records) {
    const ReplayResult r = replay_episode(config, record);
    v.expect(r.returns_match, "episode " + std::to_string(record.episode) + " returns");
    v.expect(r.intrinsic_match, "episode " + std::to_string(record.episode) + " intrinsic");
  }
}

void gradient_check(Verdict& v) {
  Rng rng(31337);
  double worst = 0.0;
  const int instances = 25;
  for (int trial = 0; trial < instances; ++trial) {
    const NetShape shape{2 + static_cast<int>(uniform_index(rng, 5)),
                         2 + static_cast<int>(uniform_index(rng, 4)),
                         2 + static_cast<int>(uniform_index(rng, 7))};
    const int segments = 1 + static_cast<int>(uniform_index(rng, 3));
    const int steps = 2 + static_cast<int>(uniform_index(rng, 5));
    oracle::LearnerInstance inst = oracle::random_learner_instance(rng, shape, segments, steps);
    std::vector<double> analytic;
    loss_and_gradient(inst.params, inst.batch, inst.hyper, &analytic);
    const auto numeric = oracle::central_difference(
        [&](const std::vector<double>& x) {
          PolicyParams p = inst.params;
          p.data = x;
          return loss_and_gradient(p, inst.batch, inst.hyper, nullptr).total;
        },
        inst.params.data, 1e-5);
    const double err = oracle::relative_error(analytic, numeric);
    worst = std::max(worst, err);
    v.expect(err < 1e-4, "instance " + std::to_string(trial) + " rel err " + fmt(err));
  }
  v.note(std::to_string(instances) + " instances, max rel err " + fmt(worst));
}

void evolution_properties(Verdict& v) {
  EvoConfig cfg;
  cfg.population_size = 12;
  cfg.burn_in_steps = 500;
  cfg.reward_mode = RewardMode::kShared;
  cfg.fitness_smoothing = 0.05;
  const int group = 4;
  Rng rng(8080);
  Populations pops = Populations::create(cfg, NetShape{3, 3, 4}, group, 4e-4, rng);
  long copies = 0;
  for (int round = 0; round < 1000; ++round) {
    for (int g = 0; g < 3; ++g) {
      const PlayerSample s = sample_players(pops, cfg, group, rng);
      std::vector<double> returns(group);
      double sum = 0.0;
      for (double& r : returns) sum += (r = uniform(rng, -80.0, 40.0));
      const auto before = pops;
      assign_fitness({s.policy_ids, s.reward_ids, returns, 200}, pops, cfg);
      const double nu = cfg.fitness_smoothing;
      for (int i = 0; i < group; ++i) {
        const double f = before.policies[s.policy_ids[i]].fitness;
        const double f2 = pops.policies[s.policy_ids[i]].fitness;
        const double lhs = std::abs(f2 - returns[i]), rhs = (1 - nu) * std::abs(f - returns[i]);
        v.expect(std::abs(lhs - rhs) <= 1e-9 * std::max(1.0, rhs), "policy contraction");
      }
      const double f = before.rewards[s.reward_ids[0]].fitness;
      const double f2 = pops.rewards[s.reward_ids[0]].fitness;
      const double rhs = (1 - nu) * std::abs(f - sum);
      v.expect(std::abs(std::abs(f2 - sum) - rhs) <= 1e-9 * std::max(1.0, rhs),
               "reward contraction");
    }
    const auto policies_before = pops.policies;
    const auto events = exploit_explore(pops.policies, cfg, rng);
    v.expect(pops.policies.size() == 12u, "policy population size");
    std::set<int> copiers;
    for (const auto& e : events) {
      const auto& copier = policies_before[e.copier];
      const auto& source = policies_before[e.source];
      v.expect(copier.steps_played >= cfg.burn_in_steps, "copier inside burn-in");
      v.expect(source.steps_played >= cfg.burn_in_steps, "source inside burn-in");
      v.expect(pops.policies[e.copier].params == source.params, "weights not copied");
      v.expect(pops.policies[e.copier].opt == source.opt, "optimizer state not copied");
      v.expect(pops.policies[e.copier].steps_played == 0, "burn-in not restarted");
      copiers.insert(e.copier);
    }
    copies += static_cast<long>(events.size());
    for (std::size_t k = 0; k < pops.policies.size(); ++k) {
      v.expect(pops.policies[k].id == static_cast<int>(k), "ids reordered");
      if (copiers.count(static_cast<int>(k)) == 0) {
        v.expect(pops.policies[k].params == policies_before[k].params, "bystander changed");
        v.expect(pops.policies[k].hyper == policies_before[k].hyper, "bystander mutated");
      }
    }
    const auto rewards_before = pops.rewards;
    for (const auto& e : exploit_explore(pops.rewards, cfg, rng)) {
      v.expect(rewards_before[e.copier].steps_played >= cfg.burn_in_steps,
               "reward copier inside burn-in");
      v.expect(rewards_before[e.source].steps_played >= cfg.burn_in_steps,
               "reward source inside burn-in");
    }
    v.expect(pops.rewards.size() == 12u, "reward population size");
  }
  v.note(std::to_string(copies) + " policy copies");
  v.expect(copies > 0, "no copies happened");
}

void matchmaking(Verdict& v) {
  Rng rng(1234);
  for (int table = 0; table < 1000; ++table) {
    const int group = 1 + static_cast<int>(uniform_index(rng, 5));
    const int count = 1 + static_cast<int>(uniform_index(rng, 6));
    std::vector<CoopRecord> records;
    for (int i = 0; i < group * count; ++i) {
      records.push_back({i, static_cast<double>(uniform_index(rng, 7)), 0});
    }
    const auto groups = assortative_groups(records, group, rng);
    std::map<int, std::size_t> index;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      v.expect(static_cast<int>(groups[g].size()) == group, "group size");
      for (int id : groups[g]) index[id] = g;
    }
    v.expect(index.size() == records.size(), "ids lost or duplicated");
    for (const auto& a : records) {
      for (const auto& b : records) {
        if (a.coop_score > b.coop_score) {
          v.expect(index[a.id] <= index[b.id], "table " + std::to_string(table));
        }
      }
    }
  }
  const std::vector<double> returns{10, 10, 10, 10, 0};
  std::vector<CoopRecord> records;
  for (int i = 0; i < 5; ++i) records.push_back({i, coop_score_harvest(returns[i], returns), 0});
  v.expect(records[4].coop_score == 8.0 && records[0].coop_score == -2.0, "mean minus own");
  const auto ranked = assortative_groups(records, 1, rng);
  v.expect(ranked.front() == Group{4}, "lowest earner not ranked most cooperative");
}

// Fixed budget, chosen from measured throughput before looking at outcomes:
// 4 seeds x 2 modes x 15000 episodes is about 7 minutes on one core.
constexpr std::int64_t kSmokeEpisodes = 15000;
constexpr int kSmokeSeeds = 4;

void directional_smoke(Verdict& v) {
  const auto start = Clock::now();
  auto run = [](const std::string& mode, int seed) {
    const fs::path dir = work_dir("smoke_" + mode + "_" + std::to_string(seed));
    run_experiment(parse_config(
        "", {"env.game = harvest", "env.preset = mini", "experiment.arenas = 1",
             "experiment.checkpoint_every = 0", "experiment.replay_log = false",
             "experiment.total_episodes = " + std::to_string(kSmokeEpisodes),
             "experiment.seed = " + std::to_string(seed), "reward.mode = " + mode,
             "experiment.output_dir = " + dir.string()}));
    return load_metric_series(dir);
  };
  auto mean = [](const std::vector<double>& x, std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += x[i];
    return s / static_cast<double>(hi - lo);
  };
  int shared_wins = 0;
  for (int seed = 1; seed <= kSmokeSeeds; ++seed) {
    const MetricSeries none = run("none", seed);
    const MetricSeries shared = run("shared", seed);
    const std::size_t n = none.sustainability.size();
    const double early = mean(none.sustainability, 0, n / 10);
    const double late = mean(none.sustainability, n - n / 10, n);
    v.expect(late < early, "seed " + std::to_string(seed) + " none sustainability " +
                               fmt(early) + " -> " + fmt(late));
    const std::size_t q = n - n / 4;
    const double cr_none = mean(none.collective_return, q, n);
    const double cr_shared = mean(shared.collective_return, q, shared.collective_return.size());
    shared_wins += cr_shared >= cr_none;
    v.note("seed " + std::to_string(seed) + ": sustainability " + fmt(early) + " -> " +
           fmt(late) + ", final-quarter collective return none " + fmt(cr_none) +
           " shared " + fmt(cr_shared));
  }
  v.expect(shared_wins >= 3,
           "shared >= none in " + std::to_string(shared_wins) + " of 4 seeds");
  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
  v.expect(seconds < 1800.0, "budget exceeded: " + fmt(seconds) + " s");
}

void weight_report(Verdict& v) {
  const std::string header =
      "parameter,layer,count,mean,std,min,q25,median,q75,max,hist_lo,hist_hi,hist";
  auto check = [&](const fs::path& ckpt, const std::string& label) {
    const Checkpoint c = read_checkpoint(ckpt.string());
    const auto rows = report_weights(ckpt);
    const std::size_t n = static_cast<std::size_t>(c.num_players);
    v.expect(rows.size() == 6 + 2 * n, label + " row count");
    std::vector<std::string> names = {"v1", "v2", "abs_v1", "abs_v2", "b1", "b2"};
    for (std::size_t j = 1; j <= n; ++j) {
      for (int k = 1; k <= 2; ++k) names.push_back("W" + std::to_string(j) + "_" + std::to_string(k));
    }
    for (std::size_t i = 0; i < rows.size() && i < names.size(); ++i) {
      v.expect(rows[i].parameter == names[i], label + " row " + std::to_string(i));
      v.expect(rows[i].count == c.pops.rewards.size(), label + " count");
      v.expect(rows[i].hist.size() == static_cast<std::size_t>(kHistogramBins), label + " bins");
    }
    std::istringstream csv(weight_report_csv(rows));
    std::string line;
    std::getline(csv, line);
    v.expect(line == kWeightReportSchema, label + " schema line");
    std::getline(csv, line);
    v.expect(line == header, label + " header");
    std::size_t body = 0;
    while (std::getline(csv, line)) {
      v.expect(std::count(line.begin(), line.end(), ',') == 12, label + " column count");
      ++body;
    }
    v.expect(body == rows.size(), label + " csv rows");
  };
  for (const char* mode : {"shared", "individual", "none"}) {
    for (const char* format : {"cbor", "json"}) {
      const fs::path dir = work_dir(std::string("report_") + mode + "_" + format);
      run_experiment(parse_config(
          "", {"experiment.arenas = 1", "experiment.total_episodes = 20",
               "experiment.checkpoint_every = 10", std::string("reward.mode = ") + mode,
               std::string("experiment.checkpoint_format = ") + format,
               "experiment.output_dir = " + dir.string()}));
      for (const auto& entry : fs::directory_iterator(RunPaths(dir).checkpoints)) {
        check(entry.path(), std::string(mode) + "/" + format + "/" +
                                entry.path().filename().string());
      }
    }
  }
  const fs::path dir = work_dir("report_full");
  run_experiment(parse_config(
      "", {"env.preset = full", "env.game = cleanup", "experiment.arenas = 1",
           "experiment.total_episodes = 0", "experiment.output_dir = " + dir.string()}));
  check(RunPaths(dir).latest_checkpoint(), "full cleanup");
}

struct Criterion {
  int number;
  const char* name;
  double time_limit;  // seconds; 0 for none
  std::function<void(Verdict&)> run;
};

}  // namespace
}  // namespace isd

int main(int argc, char** argv) {
  using namespace isd;
  const std::vector<Criterion> criteria = {
      {1, "equation oracles", 1.0, equation_oracles},
      {2, "gini oracle equivalence", 0.0, gini_oracle},
      {3, "environment invariants", 30.0, environment_invariants},
      {4, "determinism and replay", 0.0, determinism},
      {5, "gradient check", 10.0, gradient_check},
      {6, "evolution properties", 0.0, evolution_properties},
      {7, "matchmaking", 0.0, matchmaking},
      {8, "directional smoke test", 0.0, directional_smoke},
      {9, "weight report", 0.0, weight_report},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const Criterion& c : criteria) {
    if (!selected.empty() && selected.count(c.number) == 0) continue;
    Verdict verdict;
    const auto start = Clock::now();
    try {
      c.run(verdict);
    } catch (const std::exception& e) {
      verdict.expect(false, std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
    if (c.time_limit > 0.0) {
      verdict.expect(seconds < c.time_limit, "runtime over " + fmt(c.time_limit) + " s");
    }
    const bool pass = verdict.passed();
    failed += !pass;
    std::printf("%s [%d] %s (%.2f s): %s\n", pass ? "PASS" : "FAIL", c.number, c.name, seconds,
                verdict.detail().c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}

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
#include "isd/experiment.h"

#include <algorithm>
#include <charconv>
#include <atomic>
#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "isd/checkpoint.h"
#include "isd/episode.h"
#include "isd/errors.h"
#include "isd/evolution.h"
#include "isd/matchmaking.h"
#include "isd/report.h"

namespace isd {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path resolve_output_dir(const std::string& output_dir) {
  fs::path dir(output_dir);
  if (dir.is_relative()) {
    if (const char* root = std::getenv(kOutputRootEnv); root != nullptr && *root != '\0') {
      return fs::path(root) / dir;
    }
  }
  return dir;
}

NetShape net_shape_for(const ExperimentConfig& config) {
  const int actions = num_actions(config.env.game);
  ObservationEncoder encoder(config.env.obs_window, actions);
  return NetShape{encoder.input_dim(), config.learner.hidden, actions};
}

RunPaths::RunPaths(fs::path run_dir)
    : root(run_dir),
      config(run_dir / "config.cfg"),
      episodes(run_dir / "episodes.csv"),
      losses(run_dir / "losses.csv"),
      evolution(run_dir / "evolution.csv"),
      timing(run_dir / "timing.csv"),
      replay(run_dir / "replay.jsonl"),
      checkpoints(run_dir / "checkpoints"),
      summary(run_dir / "summary.json") {}

fs::path RunPaths::checkpoint(std::int64_t episodes_done) const {
  char name[64];
  std::snprintf(name, sizeof(name), "ckpt_%09" PRId64 ".ckpt", episodes_done);
  return checkpoints / name;
}

fs::path RunPaths::latest_checkpoint() const {
  fs::path best;
  if (!fs::is_directory(checkpoints)) return best;
  for (const auto& entry : fs::directory_iterator(checkpoints)) {
    const fs::path& p = entry.path();
    if (p.extension() != ".ckpt") continue;
    if (best.empty() || p.filename() > best.filename()) best = p;
  }
  return best;
}

namespace {

// Child streams of the master seed.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kControlStream = 2;
constexpr std::uint64_t kEpisodeStream = 3;

// Shortest text that parses back to the same double.
std::string num(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

template <typename T, typename F>
std::string join(const std::vector<T>& values, F&& format) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ';';
    out += format(values[i]);
  }
  return out;
}

std::string join_ids(const std::vector<int>& ids) {
  return join(ids, [](int v) { return std::to_string(v); });
}

std::string join_nums(const std::vector<double>& values) {
  return join(values, [](double v) { return num(v); });
}

// Keeps the schema line, the header and data rows whose leading integer
// satisfies keep(). Used to roll logs back to a checkpoint on resume.
template <typename Pred>
void truncate_log(const fs::path& path, Pred keep) {
  if (!fs::exists(path)) return;
  std::ifstream in(path);
  std::vector<std::string> kept;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    if (line_no++ < 2 || line.empty() || line[0] == '#') {
      kept.push_back(line);
      continue;
    }
    std::int64_t key = 0;
    if (line[0] == '{') {
      key = json::parse(line).at("episode").get<std::int64_t>();
    } else {
      key = std::stoll(line.substr(0, line.find(',')));
    }
    if (keep(key)) kept.push_back(line);
  }
  in.close();
  std::ofstream out(path, std::ios::trunc);
  for (const auto& l : kept) out << l << '\n';
}

// Config text with the keys that do not affect simulated results blanked,
// so a run can be resumed with a longer budget or from a moved directory.
std::string resume_identity(ExperimentConfig config) {
  config.total_episodes = 0;
  config.output_dir.clear();
  config.checkpoint_every = 0;
  config.arenas = 1;
  config.replay_log = true;
  config.checkpoint_format.clear();
  return config_to_text(config);
}

std::ofstream open_log(const fs::path& path, bool append, const char* schema,
                       const char* header) {
  const bool fresh = !append || !fs::exists(path);
  std::ofstream out(path, fresh ? std::ios::trunc : std::ios::app);
  if (!out) throw IntegrityError("cannot open '" + path.string() + "' for writing");
  if (fresh && schema != nullptr) out << schema << '\n' << header << '\n';
  return out;
}

struct Job {
  std::int64_t episode = 0;
  int arena = 0;
  std::uint64_t seed = 0;
  std::vector<int> policy_ids;
  std::vector<int> reward_ids;
  EpisodeResult result;
  std::vector<std::vector<LossReport>> losses;  // [player][update]
  double episode_ms = 0.0;
  double learn_ms = 0.0;
};

class Runner {
 public:
  Runner(const ExperimentConfig& config, const RunOptions& options)
      : config_(config), options_(options),
        paths_(resolve_output_dir(config.output_dir)),
        shape_(net_shape_for(config)),
        config_text_(config_to_text(config)) {}

  RunSummary run();

 private:
  void initialize();
  void open_logs(bool append);
  std::vector<Group> form_groups();
  void play(std::vector<Job>& jobs);
  void play_one(Job& job);
  void fold(Job& job, RunSummary& summary);
  void evolve(RunSummary& summary);
  void save_checkpoint() const;
  void write_summary(const RunSummary& summary) const;

  const ExperimentConfig& config_;
  const RunOptions& options_;
  RunPaths paths_;
  NetShape shape_;
  std::string config_text_;

  Populations pops_;
  std::vector<CoopRecord> coop_;
  Rng control_rng_;
  std::int64_t episodes_done_ = 0;
  std::int64_t since_evolution_ = 0;
  std::uint64_t episode_seed_root_ = 0;

  std::ofstream episodes_log_;
  std::ofstream losses_log_;
  std::ofstream evolution_log_;
  std::ofstream timing_log_;
  std::ofstream replay_log_;
};

void Runner::initialize() {
  episode_seed_root_ = derive_seed(config_.seed, kEpisodeStream);
  fs::path latest = options_.resume ? paths_.latest_checkpoint() : fs::path();
  if (!latest.empty()) {
    Checkpoint ckpt = read_checkpoint(latest.string());
    if (resume_identity(parse_config(ckpt.config_text)) != resume_identity(config_)) {
      throw ConfigError("config differs from the one that produced '" + latest.string() + "'");
    }
    if (!(ckpt.net_shape == shape_) || ckpt.num_players != config_.env.num_players) {
      throw IntegrityError("checkpoint shape does not match config");
    }
    pops_ = std::move(ckpt.pops);
    coop_ = std::move(ckpt.coop);
    control_rng_ = ckpt.control_rng;
    episodes_done_ = ckpt.episodes_done;
    since_evolution_ = ckpt.episodes_since_evolution;
    const std::int64_t done = episodes_done_;
    auto before = [done](std::int64_t e) { return e < done; };
    truncate_log(paths_.episodes, before);
    truncate_log(paths_.losses, before);
    truncate_log(paths_.timing, before);
    truncate_log(paths_.replay, before);
    truncate_log(paths_.evolution, [done](std::int64_t e) { return e <= done; });
    open_logs(true);
    return;
  }
  Rng init_rng(derive_seed(config_.seed, kInitStream));
  pops_ = Populations::create(config_.evo, shape_, config_.env.num_players,
                              config_.learner.learning_rate, init_rng,
                              config_.learner.entropy_cost_min,
                              config_.learner.entropy_cost_max);
  for (auto& p : pops_.policies) {
    p.hyper.baseline_cost = config_.learner.baseline_cost;
    p.hyper.discount = config_.learner.discount;
    p.opt.decay = config_.learner.rmsprop_decay;
    p.opt.epsilon = config_.learner.rmsprop_epsilon;
    p.opt.momentum = config_.learner.rmsprop_momentum;
  }
  coop_.clear();
  for (const auto& p : pops_.policies) coop_.push_back(CoopRecord{p.id, 0.0, -1});
  control_rng_ = Rng(derive_seed(config_.seed, kControlStream));
  open_logs(false);
}

void Runner::open_logs(bool append) {
  fs::create_directories(paths_.root);
  if (!append) {
    // A fresh run owns the directory; stale checkpoints would poison --resume.
    fs::remove_all(paths_.checkpoints);
    fs::remove(paths_.replay);
    fs::remove(paths_.summary);
    fs::remove(paths_.root / "metrics.svg");
  }
  {
    std::ofstream cfg(paths_.config, std::ios::trunc);
    cfg << config_text_;
  }
  episodes_log_ = open_log(
      paths_.episodes, append, kEpisodesSchema,
      "episode,arena,seed,game,feature_mode,reward_mode,matchmaking,policy_ids,"
      "reward_ids,returns,intrinsic_returns,collective_return,equality,tagging,"
      "sustainability,apples,clean_steps,numeric_failure");
  losses_log_ = open_log(
      paths_.losses, append, kLossesSchema,
      "episode,policy_id,update,steps,policy_loss,value_loss_ext,value_loss_int,"
      "entropy,total,grad_norm,learning_rate,entropy_cost,skipped");
  evolution_log_ = open_log(paths_.evolution, append, kEvolutionSchema,
                            "after_episode,population,copier,source,copier_fitness,"
                            "source_fitness");
  timing_log_ = open_log(paths_.timing, append, kTimingSchema,
                         "episode,arena,episode_ms,learn_ms");
  if (config_.replay_log) {
    replay_log_ = open_log(paths_.replay, append, nullptr, nullptr);
  }
}

std::vector<Group> Runner::form_groups() {
  const int g = config_.env.num_players;
  std::vector<int> ids;
  for (const auto& p : pops_.policies) ids.push_back(p.id);
  if (config_.matchmaking == Matchmaking::kRandom) {
    return random_groups(ids, g, control_rng_);
  }
  shuffle(std::span<int>(ids), control_rng_);
  ids.resize(ids.size() / g * g);
  std::vector<CoopRecord> records;
  for (int id : ids) records.push_back(coop_[id]);
  fill_cold_start(records);
  return assortative_groups(records, g, control_rng_);
}

void Runner::play_one(Job& job) {
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  EpisodeSetup setup;
  setup.env = &config_.env;
  setup.seed = job.seed;
  setup.feature_mode = config_.feature_mode;
  setup.decay_eta = config_.decay_eta;
  for (int id : job.policy_ids) setup.policies.push_back(&pops_.policies[id].params);
  for (int id : job.reward_ids) setup.reward_nets.push_back(&pops_.rewards[id].theta);
  job.result = run_episode(setup);
  const auto t1 = Clock::now();
  if (!job.result.numeric_failure) {
    for (std::size_t i = 0; i < job.policy_ids.size(); ++i) {
      PolicyIndividual& ind = pops_.policies[job.policy_ids[i]];
      job.losses.push_back(learn_from_episode(ind.params, ind.opt, ind.hyper,
                                              job.result.steps[i],
                                              config_.learner.unroll_length,
                                              config_.learner.batch_size));
    }
  }
  job.result.steps.clear();
  const auto t2 = Clock::now();
  job.episode_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  job.learn_ms = std::chrono::duration<double, std::milli>(t2 - t1).count();
}

// Groups in a round are disjoint, so each job touches only its own
// individuals' weights and optimizer state.
void Runner::play(std::vector<Job>& jobs) {
  const int workers = std::min<int>(config_.arenas, static_cast<int>(jobs.size()));
  if (workers <= 1) {
    for (auto& job : jobs) play_one(job);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> threads;
  for (int w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < jobs.size(); i = next++) play_one(jobs[i]);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void Runner::fold(Job& job, RunSummary& summary) {
  const EpisodeResult& r = job.result;
  const MetricsRow m = compute_metrics(r.stats);
  const int n = static_cast<int>(job.policy_ids.size());

  episodes_log_ << job.episode << ',' << job.arena << ',' << job.seed << ','
                << to_string(config_.env.game) << ',' << to_string(config_.feature_mode) << ','
                << to_string(config_.evo.reward_mode) << ','
                << to_string(config_.matchmaking) << ',' << join_ids(job.policy_ids) << ','
                << join_ids(job.reward_ids) << ',' << join_nums(r.returns) << ','
                << join_nums(r.intrinsic_returns) << ',' << num(m.collective_return) << ','
                << num(m.equality) << ',' << num(m.tagging) << ','
                << num(m.sustainability) << ',' << r.apples_eaten << ','
                << join_nums(r.clean_steps) << ',' << (r.numeric_failure ? 1 : 0) << '\n';
  for (std::size_t i = 0; i < job.losses.size(); ++i) {
    const PolicyIndividual& ind = pops_.policies[job.policy_ids[i]];
    for (std::size_t u = 0; u < job.losses[i].size(); ++u) {
      const LossReport& l = job.losses[i][u];
      losses_log_ << job.episode << ',' << ind.id << ',' << u << ',' << l.steps << ','
                  << num(l.policy_loss) << ',' << num(l.value_loss_ext) << ','
                  << num(l.value_loss_int) << ',' << num(l.entropy) << ',' << num(l.total)
                  << ',' << num(l.grad_norm) << ',' << num(ind.hyper.learning_rate) << ','
                  << num(ind.hyper.entropy_cost) << ',' << (l.skipped ? 1 : 0) << '\n';
    }
  }
  char timing[96];
  std::snprintf(timing, sizeof(timing), "%.3f,%.3f", job.episode_ms, job.learn_ms);
  timing_log_ << job.episode << ',' << job.arena << ',' << timing << '\n';

  if (config_.replay_log) {
    json line;
    line["episode"] = job.episode;
    line["seed"] = job.seed;
    line["policy_ids"] = job.policy_ids;
    line["reward_ids"] = job.reward_ids;
    json thetas = json::array();
    for (int id : job.reward_ids) thetas.push_back(pops_.rewards[id].theta.flat());
    line["reward_thetas"] = std::move(thetas);
    line["returns"] = r.returns;
    line["intrinsic_returns"] = r.intrinsic_returns;
    line["length"] = r.length;
    line["numeric_failure"] = r.numeric_failure;
    json actions = json::array();
    for (const auto& seq : r.actions) {
      std::string digits;
      digits.reserve(seq.size());
      for (Action a : seq) digits += static_cast<char>('0' + static_cast<int>(a));
      actions.push_back(std::move(digits));
    }
    line["actions"] = std::move(actions);
    replay_log_ << line.dump() << '\n';
  }

  if (r.numeric_failure) {
    ++summary.numeric_failures;
  } else {
    EpisodeAssignment assignment{job.policy_ids, job.reward_ids, r.returns, r.length};
    assign_fitness(assignment, pops_, config_.evo);
    for (int i = 0; i < n; ++i) {
      const double score =
          config_.env.game == GameKind::kCleanup
              ? coop_score_cleanup(r.actions[i])
              : coop_score_harvest(r.returns[i], r.returns);
      coop_[job.policy_ids[i]] = CoopRecord{job.policy_ids[i], score,
                                            static_cast<long>(job.episode)};
    }
  }

  EpisodeRecord record{job.episode, job.policy_ids, r.returns, m, r.numeric_failure};
  if (options_.on_episode) options_.on_episode(record);
  summary.records.push_back(std::move(record));
}

void Runner::evolve(RunSummary& summary) {
  std::vector<CopyEvent> events;
  if (config_.evo.reward_mode == RewardMode::kIndividual) {
    events = exploit_explore(pops_.policies, config_.evo, control_rng_, &pops_.rewards);
  } else {
    events = exploit_explore(pops_.policies, config_.evo, control_rng_);
    if (config_.evo.reward_mode == RewardMode::kShared) {
      std::vector<CopyEvent> reward_events =
          exploit_explore(pops_.rewards, config_.evo, control_rng_);
      events.insert(events.end(), reward_events.begin(), reward_events.end());
    }
  }
  for (const CopyEvent& e : events) {
    evolution_log_ << episodes_done_ << ',' << (e.reward_population ? "reward" : "policy")
                   << ',' << e.copier << ',' << e.source << ',' << num(e.copier_fitness)
                   << ',' << num(e.source_fitness) << '\n';
    if (!e.reward_population) coop_[e.copier] = CoopRecord{e.copier, 0.0, -1};
  }
  summary.copy_events += static_cast<std::int64_t>(events.size());
}

void Runner::save_checkpoint() const {
  Checkpoint ckpt;
  ckpt.episodes_done = episodes_done_;
  ckpt.episodes_since_evolution = since_evolution_;
  ckpt.config_text = config_text_;
  ckpt.control_rng = control_rng_;
  ckpt.net_shape = shape_;
  ckpt.num_players = config_.env.num_players;
  ckpt.pops = pops_;
  ckpt.coop = coop_;
  write_checkpoint(ckpt, paths_.checkpoint(episodes_done_).string(),
                   config_.checkpoint_format);
}

void Runner::write_summary(const RunSummary& summary) const {
  json doc;
  doc["episodes"] = episodes_done_;
  doc["numeric_failures"] = summary.numeric_failures;
  doc["copy_events"] = summary.copy_events;
  doc["final_checkpoint"] = paths_.checkpoint(episodes_done_).filename().string();
  // Whole-run log, so resumed runs summarize every episode.
  const MetricSeries series = load_metric_series(paths_.root);
  const std::size_t total = series.equality.size();
  const std::size_t tail = total / 4 == 0 ? total : total / 4;
  MetricsRow mean;
  for (std::size_t i = total - tail; i < total; ++i) {
    mean.collective_return += series.collective_return[i] / tail;
    mean.equality += series.equality[i] / tail;
    mean.tagging += series.tagging[i] / tail;
    mean.sustainability += series.sustainability[i] / tail;
  }
  doc["final_quarter"] = {{"episodes", tail},
                          {"collective_return", mean.collective_return},
                          {"equality", mean.equality},
                          {"tagging", mean.tagging},
                          {"sustainability", mean.sustainability}};
  std::ofstream out(paths_.summary, std::ios::trunc);
  out << doc.dump(2) << '\n';
}

RunSummary Runner::run() {
  config_.validate();
  initialize();
  RunSummary summary;
  summary.run_dir = paths_.root;
  const std::int64_t every = config_.checkpoint_every;
  while (episodes_done_ < config_.total_episodes) {
    std::vector<Group> groups = form_groups();
    const std::int64_t remaining = config_.total_episodes - episodes_done_;
    if (static_cast<std::int64_t>(groups.size()) > remaining) groups.resize(remaining);
    std::vector<Job> jobs(groups.size());
    for (std::size_t k = 0; k < groups.size(); ++k) {
      Job& job = jobs[k];
      job.episode = episodes_done_ + static_cast<std::int64_t>(k);
      job.arena = static_cast<int>(k % config_.arenas);
      job.seed = derive_seed(episode_seed_root_, static_cast<std::uint64_t>(job.episode));
      job.policy_ids = groups[k];
      job.reward_ids = attach_reward_nets(job.policy_ids, pops_, config_.evo.reward_mode,
                                          control_rng_);
    }
    play(jobs);
    for (Job& job : jobs) fold(job, summary);
    const std::int64_t before = episodes_done_;
    episodes_done_ += static_cast<std::int64_t>(jobs.size());
    since_evolution_ += static_cast<std::int64_t>(jobs.size());
    if (since_evolution_ >= config_.evo.evolve_every_episodes) {
      evolve(summary);
      since_evolution_ = 0;
    }
    episodes_log_.flush();
    losses_log_.flush();
    evolution_log_.flush();
    timing_log_.flush();
    if (config_.replay_log) replay_log_.flush();
    if (every > 0 && before / every != episodes_done_ / every &&
        episodes_done_ < config_.total_episodes) {
      save_checkpoint();
    }
  }
  save_checkpoint();
  summary.episodes = episodes_done_;
  episodes_log_.close();
  write_summary(summary);
  return summary;
}

}  // namespace

RunSummary run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  Runner runner(config, options);
  return runner.run();
}

}  // namespace isd

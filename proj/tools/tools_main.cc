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
// isd: train, replay, inspect and plot social-dilemma evolution runs.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "isd/config.h"
#include "isd/errors.h"
#include "isd/experiment.h"
#include "isd/replay.h"
#include "isd/report.h"

namespace {

namespace fs = std::filesystem;

constexpr int kExitConfig = 2;
constexpr int kExitIntegrity = 3;
constexpr int kExitMismatch = 4;

fs::path locate_run(const std::string& run) {
  fs::path p(run);
  if (fs::exists(p)) return p;
  return isd::resolve_output_dir(run);
}

int cmd_train(const std::string& path, const std::vector<std::string>& overrides,
              bool resume, int report_every) {
  const isd::ExperimentConfig config = isd::load_config(path, overrides);
  isd::RunOptions options;
  options.resume = resume;
  if (report_every > 0) {
    options.on_episode = [&](const isd::EpisodeRecord& r) {
      if ((r.episode + 1) % report_every != 0) return;
      std::printf("episode %lld  return %.2f  equality %.3f  tagging %.2f  sustainability %.1f%s\n",
                  static_cast<long long>(r.episode + 1), r.metrics.collective_return,
                  r.metrics.equality, r.metrics.tagging, r.metrics.sustainability,
                  r.numeric_failure ? "  [numeric failure]" : "");
      std::fflush(stdout);
    };
  }
  const isd::RunSummary summary = isd::run_experiment(config, options);
  std::printf("run %s: %lld episodes, %lld copy events, %lld numeric failures\n",
              summary.run_dir.string().c_str(), static_cast<long long>(summary.episodes),
              static_cast<long long>(summary.copy_events),
              static_cast<long long>(summary.numeric_failures));
  return 0;
}

int cmd_replay(const std::string& run, long long episode, bool all, const std::string& render,
               const std::string& frames_dir) {
  const fs::path run_dir = locate_run(run);
  const isd::ExperimentConfig config = isd::load_config((run_dir / "config.cfg").string());
  std::vector<isd::ReplayRecord> records;
  if (all) {
    records = isd::load_replay_log(run_dir);
  } else {
    records.push_back(isd::load_replay_record(run_dir, episode));
  }
  int mismatches = 0;
  for (const auto& record : records) {
    isd::ReplayOptions options;
    if (render == "text") options.text_frames = &std::cout;
    if (render == "ppm") {
      options.ppm_dir = frames_dir.empty()
                            ? run_dir / ("frames_" + std::to_string(record.episode))
                            : fs::path(frames_dir);
    }
    const isd::ReplayResult result = isd::replay_episode(config, record, options);
    const bool ok = result.returns_match && (!result.intrinsic_checked || result.intrinsic_match);
    if (!ok) ++mismatches;
    std::printf("episode %lld: %d steps, returns %s%s\n",
                static_cast<long long>(record.episode), result.steps,
                result.returns_match ? "match" : "MISMATCH",
                result.intrinsic_checked
                    ? (result.intrinsic_match ? ", intrinsic match" : ", intrinsic MISMATCH")
                    : "");
  }
  return mismatches == 0 ? 0 : kExitMismatch;
}

// A run directory stands for its newest checkpoint.
int cmd_report(const std::string& checkpoint, const std::string& output) {
  fs::path path = locate_run(checkpoint);
  if (fs::is_directory(path)) {
    path = isd::RunPaths(path).latest_checkpoint();
    if (path.empty()) throw isd::IntegrityError("no checkpoint under '" + checkpoint + "'");
  }
  const std::string csv = isd::weight_report_csv(isd::report_weights(path));
  if (output.empty()) {
    std::cout << csv;
  } else {
    std::ofstream out(output, std::ios::trunc);
    if (!out) throw isd::IntegrityError("cannot write '" + output + "'");
    out << csv;
  }
  return 0;
}

int cmd_validate(const std::string& path, const std::vector<std::string>& overrides, bool dump) {
  const isd::ExperimentConfig config = isd::load_config(path, overrides);
  if (dump) {
    std::cout << isd::config_to_text(config);
  } else {
    std::printf("%s: ok (%s, %d players, population %d, %lld episodes)\n", path.c_str(),
                std::string(isd::to_string(config.env.game)).c_str(), config.env.num_players,
                config.evo.population_size, static_cast<long long>(config.total_episodes));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evolve intrinsic social-preference rewards in gridworld social dilemmas."};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  bool resume = false;
  int report_every = 0;
  auto* train = app.add_subcommand("train", "Run training from a config file.");
  train->add_option("config", config_path, "Config file")->required();
  train->add_option("--set", overrides, "Override a key: key=value (repeatable)");
  train->add_flag("--resume", resume, "Continue from the newest checkpoint in output_dir");
  train->add_option("--progress", report_every, "Print metrics every N episodes");

  std::string run;
  long long episode = 0;
  bool all = false;
  std::string render = "none";
  std::string frames_dir;
  auto* replay = app.add_subcommand("replay", "Re-simulate a logged episode and verify it.");
  replay->add_option("run", run, "Run directory")->required();
  replay->add_option("episode", episode, "Episode index");
  replay->add_flag("--all", all, "Verify every logged episode");
  replay->add_option("--render", render, "Frame output: none, text or ppm")
      ->check(CLI::IsMember({"none", "text", "ppm"}));
  replay->add_option("--frames-dir", frames_dir, "Directory for ppm frames");

  std::string checkpoint;
  std::string output;
  auto* report = app.add_subcommand("report-weights",
                                    "Summarize reward-network weights in a checkpoint.");
  report->add_option("checkpoint", checkpoint, "Checkpoint file or run directory")->required();
  report->add_option("-o,--output", output, "Write CSV here instead of stdout");

  bool dump = false;
  auto* validate = app.add_subcommand("validate-config", "Parse and check a config file.");
  validate->add_option("config", config_path, "Config file")->required();
  validate->add_option("--set", overrides, "Override a key: key=value (repeatable)");
  validate->add_flag("--dump", dump, "Print the fully resolved config");

  auto* plot = app.add_subcommand("plot", "Render metric curves of a run to metrics.svg.");
  plot->add_option("run", run, "Run directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return cmd_train(config_path, overrides, resume, report_every);
    if (*replay) {
      if (!all && replay->count("episode") == 0) {
        throw isd::UsageError("replay needs an episode index or --all");
      }
      return cmd_replay(run, episode, all, render, frames_dir);
    }
    if (*report) return cmd_report(checkpoint, output);
    if (*validate) return cmd_validate(config_path, overrides, dump);
    if (*plot) {
      std::printf("%s\n", isd::plot_run(locate_run(run)).string().c_str());
      return 0;
    }
  } catch (const isd::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const isd::UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kExitConfig;
  } catch (const isd::IntegrityError& e) {
    std::fprintf(stderr, "integrity error: %s\n", e.what());
    return kExitIntegrity;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

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
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "isd/config.h"
#include "isd/errors.h"
#include "isd/experiment.h"
#include "isd/replay.h"
#include "oracles.h"

namespace isd {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<std::string> lines_of(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

ExperimentConfig small(const fs::path& dir, std::int64_t episodes,
                       std::vector<std::string> extra = {}) {
  std::vector<std::string> o = {
      "experiment.arenas = 1",
      "experiment.checkpoint_every = 0",
      "env.episode_length = 60",
      "experiment.total_episodes = " + std::to_string(episodes),
      "experiment.output_dir = " + dir.string(),
  };
  o.insert(o.end(), extra.begin(), extra.end());
  return parse_config("", o);
}

TEST(HarnessTest, TwoEpisodesTwoRecordsOneCheckpoint) {
  const fs::path dir = oracle::scratch_dir("harness_two");
  const RunSummary s = run_experiment(small(dir, 2));
  EXPECT_EQ(s.episodes, 2);
  ASSERT_EQ(s.records.size(), 2u);
  EXPECT_EQ(s.records[0].episode, 0);
  EXPECT_EQ(s.records[1].episode, 1);
  const RunPaths paths(dir);
  int checkpoints = 0;
  for (const auto& e : fs::directory_iterator(paths.checkpoints)) {
    (void)e;
    ++checkpoints;
  }
  EXPECT_EQ(checkpoints, 1);
  EXPECT_EQ(paths.latest_checkpoint(), paths.checkpoint(2));
  const auto lines = lines_of(paths.episodes);
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0], kEpisodesSchema);
  EXPECT_EQ(lines_of(paths.losses).at(0), kLossesSchema);
  EXPECT_EQ(lines_of(paths.evolution).at(0), kEvolutionSchema);
  EXPECT_EQ(lines_of(paths.timing).at(0), kTimingSchema);
  EXPECT_TRUE(fs::exists(paths.summary));
  EXPECT_EQ(parse_config(slurp(paths.config)).total_episodes, 2);
}

TEST(HarnessTest, FreshRunClearsAnOlderRun) {
  const fs::path dir = oracle::scratch_dir("harness_fresh");
  run_experiment(small(dir, 4, {"experiment.checkpoint_every = 2"}));
  run_experiment(small(dir, 1, {"experiment.replay_log = false"}));
  const RunPaths paths(dir);
  EXPECT_EQ(paths.latest_checkpoint(), paths.checkpoint(1));
  EXPECT_FALSE(fs::exists(paths.checkpoint(4)));
  EXPECT_FALSE(fs::exists(paths.replay));
}

TEST(HarnessTest, ZeroEpisodesStillWritesACheckpoint) {
  const fs::path dir = oracle::scratch_dir("harness_zero");
  const RunSummary s = run_experiment(small(dir, 0));
  EXPECT_EQ(s.episodes, 0);
  EXPECT_TRUE(s.records.empty());
  EXPECT_FALSE(RunPaths(dir).latest_checkpoint().empty());
}

// Checkpoints embed the config text, output_dir included, so both runs
// share one directory and the first is moved aside.
TEST(HarnessTest, RerunsAreByteIdenticalAcrossThreads) {
  const fs::path a = oracle::scratch_dir("harness_rerun_a");
  const fs::path b = oracle::scratch_dir("harness_rerun_b");
  run_experiment(small(b, 24, {"experiment.arenas = 3"}));
  fs::remove_all(a);
  fs::rename(b, a);
  run_experiment(small(b, 24, {"experiment.arenas = 3"}));
  const RunPaths pa(a), pb(b);
  EXPECT_EQ(slurp(pa.episodes), slurp(pb.episodes));
  EXPECT_EQ(slurp(pa.losses), slurp(pb.losses));
  EXPECT_EQ(slurp(pa.evolution), slurp(pb.evolution));
  EXPECT_EQ(slurp(pa.replay), slurp(pb.replay));
  EXPECT_TRUE(slurp(pa.latest_checkpoint()) == slurp(pb.latest_checkpoint()));
}

TEST(HarnessTest, ArenaCountDoesNotChangeResults) {
  const fs::path one = oracle::scratch_dir("harness_arenas_1");
  const fs::path three = oracle::scratch_dir("harness_arenas_3");
  run_experiment(small(one, 24, {"experiment.arenas = 1"}));
  run_experiment(small(three, 24, {"experiment.arenas = 3"}));
  const std::vector<std::string> ea = lines_of(RunPaths(one).episodes);
  const std::vector<std::string> eb = lines_of(RunPaths(three).episodes);
  ASSERT_EQ(ea.size(), eb.size());
  // Column 1 is the arena index, which legitimately differs.
  for (std::size_t i = 2; i < ea.size(); ++i) {
    std::vector<std::string> ra = split(ea[i], ','), rb = split(eb[i], ',');
    ra.erase(ra.begin() + 1);
    rb.erase(rb.begin() + 1);
    EXPECT_EQ(ra, rb) << "row " << i;
  }
  EXPECT_EQ(slurp(RunPaths(one).losses), slurp(RunPaths(three).losses));
  EXPECT_EQ(slurp(RunPaths(one).evolution), slurp(RunPaths(three).evolution));
  EXPECT_EQ(slurp(RunPaths(one).replay), slurp(RunPaths(three).replay));
}

TEST(HarnessTest, DifferentSeedsDiverge) {
  const fs::path a = oracle::scratch_dir("harness_seed_a");
  const fs::path b = oracle::scratch_dir("harness_seed_b");
  run_experiment(small(a, 3));
  run_experiment(small(b, 3, {"experiment.seed = 2"}));
  EXPECT_NE(slurp(RunPaths(a).episodes), slurp(RunPaths(b).episodes));
}

TEST(HarnessTest, NoneModeLogsZeroIntrinsicReward) {
  const fs::path dir = oracle::scratch_dir("harness_none");
  run_experiment(small(dir, 4, {"reward.mode = none"}));
  const auto lines = lines_of(RunPaths(dir).episodes);
  const auto header = split(lines.at(1), ',');
  std::size_t col = 0;
  while (col < header.size() && header[col] != "intrinsic_returns") ++col;
  ASSERT_LT(col, header.size());
  for (std::size_t i = 2; i < lines.size(); ++i) {
    for (const auto& v : split(split(lines[i], ',').at(col), ';')) EXPECT_EQ(v, "0");
  }
}

TEST(HarnessTest, ProgressCallbackSeesEveryEpisodeInOrder) {
  const fs::path dir = oracle::scratch_dir("harness_callback");
  std::vector<std::int64_t> seen;
  RunOptions options;
  options.on_episode = [&](const EpisodeRecord& r) { seen.push_back(r.episode); };
  run_experiment(small(dir, 5, {"experiment.arenas = 2"}), options);
  EXPECT_EQ(seen, (std::vector<std::int64_t>{0, 1, 2, 3, 4}));
}

TEST(ReplayTest, EveryLoggedEpisodeReplaysBitExactly) {
  for (const char* mode : {"shared", "individual", "none"}) {
    const fs::path dir = oracle::scratch_dir(std::string("replay_") + mode);
    run_experiment(small(dir, 6, {std::string("reward.mode = ") + mode}));
    const ExperimentConfig config = load_config(RunPaths(dir).config.string());
    const auto records = load_replay_log(dir);
    ASSERT_EQ(records.size(), 6u);
    for (const auto& record : records) {
      const ReplayResult r = replay_episode(config, record);
      EXPECT_TRUE(r.returns_match) << mode << " episode " << record.episode;
      EXPECT_TRUE(r.intrinsic_checked);
      EXPECT_TRUE(r.intrinsic_match) << mode << " episode " << record.episode;
      EXPECT_EQ(r.steps, 60);
    }
  }
}

TEST(ReplayTest, ProspectiveIntrinsicRewardsAreNotChecked) {
  const fs::path dir = oracle::scratch_dir("replay_prospective");
  run_experiment(small(dir, 2, {"reward.features = prospective"}));
  const ExperimentConfig config = load_config(RunPaths(dir).config.string());
  const ReplayResult r = replay_episode(config, load_replay_record(dir, 1));
  EXPECT_TRUE(r.returns_match);
  EXPECT_FALSE(r.intrinsic_checked);
}

TEST(ReplayTest, TamperedRecordIsDetected) {
  const fs::path dir = oracle::scratch_dir("replay_tamper");
  run_experiment(small(dir, 1));
  const ExperimentConfig config = load_config(RunPaths(dir).config.string());
  ReplayRecord record = load_replay_record(dir, 0);
  record.returns[0] += 1.0;
  EXPECT_FALSE(replay_episode(config, record).returns_match);
  record = load_replay_record(dir, 0);
  record.actions[0].pop_back();
  EXPECT_THROW(replay_episode(config, record), IntegrityError);
}

TEST(ReplayTest, TruncatedOrMissingLogRaises) {
  const fs::path dir = oracle::scratch_dir("replay_truncated");
  run_experiment(small(dir, 2));
  const fs::path log = RunPaths(dir).replay;
  const std::string text = slurp(log);
  std::ofstream(log, std::ios::binary | std::ios::trunc) << text.substr(0, text.size() - 40);
  EXPECT_THROW(load_replay_record(dir, 1), IntegrityError);
  EXPECT_THROW(load_replay_log(dir), IntegrityError);
  EXPECT_NO_THROW(load_replay_record(dir, 0));
  EXPECT_THROW(load_replay_record(dir, 7), IntegrityError);
  fs::remove(log);
  EXPECT_THROW(load_replay_record(dir, 0), IntegrityError);
}

TEST(ReplayTest, RenderingOnlyWhenAsked) {
  const fs::path dir = oracle::scratch_dir("replay_render");
  run_experiment(small(dir, 1));
  const ExperimentConfig config = load_config(RunPaths(dir).config.string());
  const ReplayRecord record = load_replay_record(dir, 0);
  const fs::path frames = dir / "frames";
  replay_episode(config, record);
  EXPECT_FALSE(fs::exists(frames));
  std::ostringstream text;
  ReplayOptions options;
  options.text_frames = &text;
  options.ppm_dir = frames;
  options.ppm_scale = 2;
  replay_episode(config, record, options);
  int ppm = 0;
  for (const auto& e : fs::directory_iterator(frames)) {
    ppm += e.path().extension() == ".ppm";
  }
  EXPECT_GE(ppm, 60);
  EXPECT_FALSE(text.str().empty());
}

TEST(ResumeTest, ResumedRunMatchesUninterruptedRun) {
  const fs::path whole = oracle::scratch_dir("resume_whole");
  const fs::path split_dir = oracle::scratch_dir("resume_split");
  const std::vector<std::string> every = {"experiment.checkpoint_every = 10"};
  run_experiment(small(split_dir, 30, every));
  fs::remove_all(whole);
  fs::rename(split_dir, whole);
  run_experiment(small(split_dir, 20, every));
  RunOptions resume;
  resume.resume = true;
  const RunSummary s = run_experiment(small(split_dir, 30, every), resume);
  EXPECT_EQ(s.records.size(), 10u);
  EXPECT_EQ(s.episodes, 30);
  const RunPaths a(whole), b(split_dir);
  EXPECT_EQ(slurp(a.episodes), slurp(b.episodes));
  EXPECT_EQ(slurp(a.losses), slurp(b.losses));
  EXPECT_EQ(slurp(a.evolution), slurp(b.evolution));
  EXPECT_EQ(slurp(a.replay), slurp(b.replay));
  EXPECT_TRUE(slurp(a.checkpoint(30)) == slurp(b.checkpoint(30)));
}

TEST(ResumeTest, RefusesADifferentExperiment) {
  const fs::path dir = oracle::scratch_dir("resume_mismatch");
  run_experiment(small(dir, 2));
  RunOptions resume;
  resume.resume = true;
  EXPECT_THROW(run_experiment(small(dir, 4, {"experiment.seed = 5"}), resume),
               ConfigError);
}

TEST(OutputRootTest, RelativeDirsResolveUnderTheRoot) {
  const char* saved = std::getenv(kOutputRootEnv);
  const std::string restore = saved ? saved : "";
  ::setenv(kOutputRootEnv, "/tmp/isd_root", 1);
  EXPECT_EQ(resolve_output_dir("runs/a"), fs::path("/tmp/isd_root/runs/a"));
  EXPECT_EQ(resolve_output_dir("/abs/b"), fs::path("/abs/b"));
  ::unsetenv(kOutputRootEnv);
  EXPECT_EQ(resolve_output_dir("runs/a"), fs::path("runs/a"));
  if (saved) ::setenv(kOutputRootEnv, restore.c_str(), 1);
}

TEST(OutputRootTest, RunLandsUnderTheRoot) {
  const fs::path root = oracle::scratch_dir("output_root");
  const char* saved = std::getenv(kOutputRootEnv);
  const std::string restore = saved ? saved : "";
  ::setenv(kOutputRootEnv, root.c_str(), 1);
  const RunSummary s = run_experiment(parse_config(
      "", {"experiment.arenas = 1", "experiment.total_episodes = 1",
           "env.episode_length = 20", "experiment.output_dir = nested/run"}));
  EXPECT_EQ(s.run_dir, root / "nested/run");
  EXPECT_TRUE(fs::exists(root / "nested/run/episodes.csv"));
  if (saved) ::setenv(kOutputRootEnv, restore.c_str(), 1);
  else ::unsetenv(kOutputRootEnv);
}

}  // namespace
}  // namespace isd

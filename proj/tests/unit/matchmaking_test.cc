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
#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "isd/errors.h"
#include "isd/matchmaking.h"
#include "oracles.h"

namespace isd {
namespace {

std::map<int, int> group_index(const std::vector<Group>& groups) {
  std::map<int, int> index;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (int id : groups[g]) index[id] = static_cast<int>(g);
  }
  return index;
}

TEST(CoopScoreTest, CleanupCountsCleanActions) {
  std::vector<Action> actions(1000, Action::kMoveForward);
  for (int i = 0; i < 120; ++i) actions[i * 8] = Action::kClean;
  EXPECT_EQ(coop_score_cleanup(actions), 120.0);
  EXPECT_EQ(coop_score_cleanup(std::vector<Action>(10, Action::kTag)), 0.0);
  std::vector<Action> other(actions.rbegin(), actions.rend());
  EXPECT_EQ(coop_score_cleanup(other), coop_score_cleanup(actions));
}

TEST(CoopScoreTest, HarvestIsMeanMinusOwn) {
  const std::vector<double> returns{10, 10, 10, 10, 0};
  EXPECT_EQ(coop_score_harvest(0.0, returns), 8.0);
  EXPECT_EQ(coop_score_harvest(8.0, returns), 0.0);
  EXPECT_LT(coop_score_harvest(10.0, returns), 0.0);
  EXPECT_THROW(coop_score_harvest(1.0, std::vector<double>{}), UsageError);
}

TEST(CoopScoreTest, LowestHarvestEarnerRanksMostCooperative) {
  const std::vector<double> returns{10, 10, 10, 10, 0};
  std::vector<CoopRecord> records;
  for (int i = 0; i < 5; ++i) records.push_back({i, coop_score_harvest(returns[i], returns), 0});
  Rng rng(1);
  const auto groups = assortative_groups(records, 1, rng);
  EXPECT_EQ(groups.front(), Group{4});
}

TEST(ColdStartTest, MedianOfKnownScores) {
  std::vector<CoopRecord> r{{0, 1.0, 3}, {1, 5.0, 3}, {2, 3.0, 2}, {3, 99.0, -1}};
  fill_cold_start(r);
  EXPECT_EQ(r[3].coop_score, 3.0);
  std::vector<CoopRecord> even{{0, 1.0, 0}, {1, 2.0, 0}, {2, 0.0, -1}};
  fill_cold_start(even);
  EXPECT_EQ(even[2].coop_score, 1.5);
  std::vector<CoopRecord> none{{0, 7.0, -1}, {1, 8.0, -1}};
  fill_cold_start(none);
  EXPECT_EQ(none[0].coop_score, 0.0);
  EXPECT_EQ(none[1].coop_score, 0.0);
}

TEST(AssortativeTest, TopScoresFormTheFirstGroup) {
  std::vector<CoopRecord> records;
  for (int i = 0; i < 10; ++i) records.push_back({i, static_cast<double>(i), 0});
  Rng rng(3);
  const auto groups = assortative_groups(records, 5, rng);
  ASSERT_EQ(groups.size(), 2u);
  EXPECT_EQ(std::set<int>(groups[0].begin(), groups[0].end()), (std::set<int>{5, 6, 7, 8, 9}));
  EXPECT_EQ(std::set<int>(groups[1].begin(), groups[1].end()), (std::set<int>{0, 1, 2, 3, 4}));
}

TEST(AssortativeTest, TiesFollowASeededUniformOrder) {
  std::vector<CoopRecord> records;
  for (int i = 0; i < 10; ++i) records.push_back({i, 1.0, 0});
  Rng a(5), b(5);
  EXPECT_EQ(assortative_groups(records, 5, a), assortative_groups(records, 5, b));
  // Each id lands in the first group about half the time.
  std::vector<int> first(10, 0);
  Rng rng(11);
  const int draws = 20000;
  for (int d = 0; d < draws; ++d) {
    const auto groups = assortative_groups(records, 5, rng);
    for (int id : groups[0]) ++first[id];
  }
  for (int c : first) EXPECT_NEAR(c / double(draws), 0.5, 0.02);
}

TEST(AssortativeTest, IndivisibleCountIsAUsageError) {
  std::vector<CoopRecord> records;
  for (int i = 0; i < 7; ++i) records.push_back({i, 0.0, 0});
  Rng rng(1);
  EXPECT_THROW(assortative_groups(records, 5, rng), UsageError);
}

TEST(AssortativeTest, MonotoneOnRandomTables) {
  Rng rng(2025);
  for (int table = 0; table < 1000; ++table) {
    const int group_size = 1 + static_cast<int>(uniform_index(rng, 5));
    const int groups_n = 1 + static_cast<int>(uniform_index(rng, 6));
    std::vector<CoopRecord> records;
    for (int i = 0; i < group_size * groups_n; ++i) {
      // Coarse scores so ties are common.
      records.push_back({i * 3 + 1, static_cast<double>(uniform_index(rng, 6)), 0});
    }
    const auto groups = assortative_groups(records, group_size, rng);
    ASSERT_EQ(static_cast<int>(groups.size()), groups_n);
    for (const auto& g : groups) {
      ASSERT_EQ(static_cast<int>(g.size()), group_size);
      ASSERT_EQ(std::set<int>(g.begin(), g.end()).size(), g.size());
    }
    auto index = group_index(groups);
    ASSERT_EQ(index.size(), records.size());
    for (const auto& a : records) {
      for (const auto& b : records) {
        if (a.coop_score > b.coop_score) ASSERT_LE(index[a.id], index[b.id]);
      }
    }
  }
}

TEST(RandomGroupsTest, PoolOfOneGroup) {
  const std::vector<int> ids{4, 2, 9, 1, 7};
  Rng rng(1);
  const auto groups = random_groups(ids, 5, rng);
  ASSERT_EQ(groups.size(), 1u);
  EXPECT_EQ(std::set<int>(groups[0].begin(), groups[0].end()), (std::set<int>{1, 2, 4, 7, 9}));
}

TEST(RandomGroupsTest, SeededAndLeftoversSitOut) {
  std::vector<int> ids(13);
  for (int i = 0; i < 13; ++i) ids[i] = i;
  Rng a(8), b(8);
  const auto ga = random_groups(ids, 5, a);
  EXPECT_EQ(ga, random_groups(ids, 5, b));
  EXPECT_EQ(ga.size(), 2u);
  EXPECT_EQ(group_index(ga).size(), 10u);
}

TEST(RandomGroupsTest, PoolSmallerThanAGroupIsAConfigError) {
  const std::vector<int> ids{1, 2, 3};
  Rng rng(1);
  EXPECT_THROW(random_groups(ids, 5, rng), ConfigError);
}

TEST(RandomGroupsTest, PairCoOccurrenceMatchesEnumeration) {
  const double exact = oracle::co_occurrence_by_enumeration(10, 5);
  EXPECT_NEAR(exact, 4.0 / 9.0, 1e-12);
  std::vector<int> ids(10);
  for (int i = 0; i < 10; ++i) ids[i] = i;
  Rng rng(99);
  const int draws = 40000;
  std::vector<std::vector<int>> together(10, std::vector<int>(10, 0));
  for (int d = 0; d < draws; ++d) {
    const auto index = group_index(random_groups(ids, 5, rng));
    for (int a = 0; a < 10; ++a) {
      for (int b = a + 1; b < 10; ++b) together[a][b] += index.at(a) == index.at(b);
    }
  }
  // Five standard errors of a binomial proportion.
  const double tol = 5.0 * std::sqrt(exact * (1 - exact) / draws);
  for (int a = 0; a < 10; ++a) {
    for (int b = a + 1; b < 10; ++b) {
      EXPECT_NEAR(together[a][b] / double(draws), exact, tol) << a << "," << b;
    }
  }
}

TEST(MatchmakingTest, Parsing) {
  EXPECT_EQ(parse_matchmaking("random"), Matchmaking::kRandom);
  EXPECT_EQ(parse_matchmaking("assortative"), Matchmaking::kAssortative);
  EXPECT_THROW(parse_matchmaking("greedy"), ConfigError);
}

}  // namespace
}  // namespace isd

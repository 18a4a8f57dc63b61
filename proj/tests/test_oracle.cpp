// Copyright 2026 The cogdrive Authors
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
#include <random>

#include "doctest.h"

#include "cogdrive/errors.hpp"
#include "cogdrive/oracle.hpp"
#include "cogdrive/oracle_check.hpp"
#include "cogdrive/strategic.hpp"
#include "test_support.hpp"

namespace cogdrive {
namespace {

using testing::payoff_node;
using testing::small_tree;
using testing::stage_game;
constexpr Maneuver W = Maneuver::kWait;
constexpr Maneuver P = Maneuver::kProceed;

TEST_CASE("profile enumeration counts") {
  std::mt19937_64 rng(3);
  const GameTree one = small_tree(rng, 1, 1);
  CHECK(oracle::profile_count(one) == 4);
  long long seen = 0;
  oracle::enumerate_profiles(one, [&](const oracle::StrategyProfile& p) {
    CHECK(oracle::is_total(one, p));
    ++seen;
  });
  CHECK(seen == 4);

  const GameTree two = small_tree(rng, 2, 1);
  CHECK(oracle::profile_count(two) == 1024);
  seen = 0;
  oracle::enumerate_profiles(two, [&](const oracle::StrategyProfile&) { ++seen; });
  CHECK(seen == 1024);

  const GameTree big = small_tree(rng, 3, 3);
  CHECK(oracle::profile_count(big) > oracle::kMaxProfiles);
  CHECK_THROWS_AS(oracle::enumerate_profiles(big, [](const oracle::StrategyProfile&) {}),
                  Error);
}

TEST_CASE("stage-game references") {
  const std::vector<double> g = {0.0, 0.0};
  SUBCASE("dominant cell is the unique equilibrium") {
    const GameTree t = stage_game(payoff_node(
        {{W, P}, {W, P}}, {{0.6, 0.6}, {0.0, 0.9}, {0.9, 0.0}, {0.3, 0.3}}));
    const auto set = oracle::oracle_spne(t, g);
    REQUIRE(set.size() == 1);
    CHECK(set[0] == spne(t, g).joint);
  }
  SUBCASE("matching pennies has none") {
    const GameTree t = stage_game(payoff_node(
        {{W, P}, {W, P}}, {{1.0, 0.0}, {0.0, 1.0}, {0.0, 1.0}, {1.0, 0.0}}));
    CHECK(oracle::oracle_spne(t, g).empty());
  }
  SUBCASE("coordination has two") {
    const GameTree t = stage_game(payoff_node(
        {{W, P}, {W, P}}, {{0.4, 0.4}, {0.0, 0.0}, {0.0, 0.0}, {0.8, 0.7}}));
    CHECK(oracle::oracle_spne(t, g).size() == 2);
  }
}

TEST_CASE("enumerated equilibria do not depend on visiting order") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 5; ++rep) {
    const GameTree t = small_tree(rng, 2, 1);
    const std::vector<double> g = {0.2 * rep, 1.0 - 0.2 * rep};
    auto fwd = oracle::oracle_spne(t, g);
    std::vector<oracle::StrategyProfile> rev;
    std::vector<oracle::StrategyProfile> all;
    oracle::enumerate_profiles(t, [&](const oracle::StrategyProfile& p) { all.push_back(p); });
    std::reverse(all.begin(), all.end());
    for (const auto& p : all) {
      if (oracle::is_subgame_perfect(t, p, g)) rev.push_back(p);
    }
    std::sort(fwd.begin(), fwd.end());
    std::sort(rev.begin(), rev.end());
    CHECK(fwd == rev);
  }
}

TEST_CASE("differential agreement on random trees") {
  DiffOptions o;
  o.instances = 25;
  o.seed = 7;
  o.max_stages = 2;
  for (const DiffRow& r : run_differential(o)) {
    INFO(r.concept_name << ": " << r.first_failure);
    CHECK(r.agreed == r.instances);
  }
}

}  // namespace
}  // namespace cogdrive

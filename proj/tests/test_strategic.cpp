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
#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "json.hpp"

#include "cogdrive/errors.hpp"
#include "cogdrive/strategic.hpp"
#include "test_support.hpp"

namespace cogdrive {
namespace {

using testing::make_node;
using testing::payoff_node;
using testing::small_tree;
using testing::stage_game;
constexpr Maneuver W = Maneuver::kWait;
constexpr Maneuver P = Maneuver::kProceed;

// One-stage tree whose step and continuation utilities coincide, so every
// normalized value equals the step aggregate.

TEST_CASE("belief from empty history spans the grid") {
  const BeliefL1 b = update_consistent_belief({}, 1, GameConfig{});
  CHECK(b.ac == Interval{});
  CHECK(b.nac == Interval{});
  CHECK_FALSE(b.grid_empty(kDefaultTypeGrid));
}

TEST_CASE("level-0 consistent actions") {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 30; ++trial) {
    const GameTree tree = small_tree(rng, 2, 3);
    const GameConfig& cfg = tree.config();
    const GameNode& root = tree.node(0);
    std::set<int> all;
    for (double g : cfg.type_grid) {
      for (auto k : {AutomatonKind::kAC, AutomatonKind::kNAC}) {
        for (int a : step_automaton(k, g, root, 1, cfg).support) all.insert(a);
      }
    }
    const auto full = level0_consistent_actions(root, 1, BeliefL1{}, cfg);
    CHECK(full == std::vector<int>(all.begin(), all.end()));

    BeliefL1 only;
    only.ac = Interval{1.0, -1.0, true, true};
    only.nac = Interval{1.0, 1.0, true, true};
    CHECK(level0_consistent_actions(root, 1, only, cfg) ==
          step_automaton(AutomatonKind::kNAC, 1.0, root, 1, cfg).support);

    BeliefL1 none;
    none.ac = Interval{0.1, 0.2, true, false};
    none.nac = Interval{0.6, 0.9, true, false};
    CHECK_THROWS_AS(level0_consistent_actions(root, 1, none, cfg), Error);

    // Along a random path, the set equals the brute-force union over the
    // types whose trace holds the observed maneuvers.
    int cur = 0;
    History h;
    while (true) {
      const GameNode& n = tree.node(cur);
      std::set<int> want;
      for (double g : cfg.type_grid) {
        for (auto k : {AutomatonKind::kAC, AutomatonKind::kNAC}) {
          if (!in_trace(k, g, h, 1, cfg)) continue;
          for (int a : step_automaton(k, g, n, 1, cfg).support) want.insert(a);
        }
      }
      const BeliefL1 b = update_consistent_belief(h, 1, cfg);
      if (want.empty()) {
        CHECK(b.grid_empty(cfg.type_grid));
      } else {
        CHECK(level0_consistent_actions(n, 1, b, cfg) ==
              std::vector<int>(want.begin(), want.end()));
      }
      const int j = static_cast<int>(rng() % n.num_joints());
      const auto acts = n.decode(j);
      h.push_back({&tree, cur, {-1, -1}, {n.maneuver(0, acts[0]), n.maneuver(1, acts[1])}});
      if (n.children[j] < 0) break;
      cur = n.children[j];
    }
  }
}

TEST_CASE("best response pair") {
  SUBCASE("singleton opponent") {
    Eigen::ArrayXXd v(2, 1);
    v << 0.2, 0.6;
    CHECK(best_response_pair(v, false).own == 1);
  }
  SUBCASE("dominant row") {
    Eigen::ArrayXXd v(3, 3);
    v << 0.1, 0.5, 0.2, 0.6, 0.7, 0.9, 0.3, 0.2, 0.8;
    CHECK(best_response_pair(v, false).own == 1);
    CHECK(best_response_pair(v, true).own == 1);
  }
  SUBCASE("ties resolve to the lowest pair") {
    Eigen::ArrayXXd v(2, 2);
    v << 0.5, 0.7, 0.7, 0.1;
    const PairChoice pc = best_response_pair(v, false);
    CHECK(pc.own == 0);
    CHECK(pc.opp == 1);
    CHECK(pc.ties == std::vector<int>{0, 1});
  }
  SUBCASE("brute force and affine invariance") {
    std::mt19937_64 rng(59);
    std::uniform_real_distribution<double> u(-1.0, 1.0), scale(0.1, 5.0);
    for (int trial = 0; trial < 300; ++trial) {
      const int r = 1 + static_cast<int>(rng() % 3), c = 1 + static_cast<int>(rng() % 3);
      Eigen::ArrayXXd v(r, c);
      for (int x = 0; x < r; ++x) {
        for (int y = 0; y < c; ++y) v(x, y) = u(rng);
      }
      int bo = 0, bp = 0;
      for (int x = 0; x < r; ++x) {
        for (int y = 0; y < c; ++y) {
          if (v(x, y) > v(bo, bp)) {
            bo = x;
            bp = y;
          }
        }
      }
      const PairChoice pc = best_response_pair(v, false);
      CHECK(pc.own == bo);
      CHECK(pc.opp == bp);
      const Eigen::ArrayXXd w = v * scale(rng) + u(rng);
      CHECK(best_response_pair(w, false).own == pc.own);
      CHECK(best_response_pair(w, true).own == best_response_pair(v, true).own);
    }
  }
}

TEST_CASE("level-1 on a stage game picks the best pair over consistent actions") {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 30; ++trial) {
    const GameTree tree = small_tree(rng, 1, 3);
    const GameNode& n = tree.node(0);
    for (double g : kDefaultTypeGrid) {
      const auto cons = level0_consistent_actions(n, 1, BeliefL1{}, tree.config());
      int best = -1;
      double bv = -1e9;
      for (int a = 0; a < n.num_actions(0); ++a) {
        for (int o : cons) {
          const JointPolicy none = [](int) { return -1; };
          const double v = discounted_value(tree, 0, n.encode(std::vector<int>{a, o}), none, 0, g);
          if (v > bv + kTieEps) {
            bv = v;
            best = a;
          }
        }
      }
      CHECK(level1_response(tree, 0, 0, g) == best);
    }
  }
}

TEST_CASE("spne on hand-made stage games") {
  SUBCASE("strictly dominant cell") {
    // Prisoner's-dilemma payoffs: (1, 1) is dominant for both.
    const GameTree t = stage_game(payoff_node(
        {{W, P}, {W, P}}, {{0.6, 0.6}, {0.0, 0.9}, {0.9, 0.0}, {0.3, 0.3}}));
    const std::vector<double> g = {0.0, 0.0};
    const SpneResult r = spne(t, g);
    CHECK(r.joint[0] == 3);
    CHECK_FALSE(r.any_fallback());
  }
  SUBCASE("coordination picks the larger sum") {
    const GameTree t = stage_game(payoff_node(
        {{W, P}, {W, P}}, {{0.4, 0.4}, {0.0, 0.0}, {0.0, 0.0}, {0.8, 0.7}}));
    const std::vector<double> g = {0.0, 0.0};
    CHECK(spne(t, g).joint[0] == 3);
  }
  SUBCASE("matching pennies has no pure equilibrium") {
    const GameTree t = stage_game(payoff_node(
        {{W, P}, {W, P}}, {{1.0, 0.0}, {0.0, 1.0}, {0.0, 1.0}, {1.0, 0.0}}));
    const std::vector<double> g = {0.0, 0.0};
    const SpneResult r = spne(t, g);
    CHECK(r.any_fallback());
    CHECK(r.joint[0] >= 0);
    CHECK(spne_set(t, r).flagged == std::vector<int>{0});
    try {
      spne(t, g, false);
      FAIL("expected NoPureEquilibrium");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kNoPureEquilibrium);
    }
  }
}

TEST_CASE("single-agent spne is a per-node argmax") {
  GameConfig cfg;
  cfg.n_samples = 2;
  const Path p = testing::straight_path(0, 0, 0);
  const GameTree tree = build_game_tree({testing::state_on(p, 100, 8.0)}, {p}, cfg);
  const std::vector<double> g = {0.5};
  const SpneResult r = spne(tree, g);
  for (int id : tree.bottom_up()) {
    const GameNode& n = tree.node(id);
    const JointPolicy pol = [&](int x) { return r.joint[x]; };
    double best = -1e9;
    for (int a = 0; a < n.num_actions(0); ++a) {
      best = std::max(best, discounted_value(tree, id, a, pol, 0, 0.5));
    }
    CHECK(discounted_value(tree, id, r.joint[id], pol, 0, 0.5) ==
          doctest::Approx(best).epsilon(1e-12));
  }
}

// One-shot deviation check from plain play-outs.
bool subgame_perfect(const GameTree& tree, const SpneResult& r) {
  const JointPolicy pol = [&](int x) { return r.joint[x]; };
  for (const GameNode& n : tree.nodes()) {
    if (r.fallback[n.id]) continue;
    for (int i = 0; i < tree.num_agents(); ++i) {
      const double base = discounted_value(tree, n.id, r.joint[n.id], pol, i, r.gammas[i]);
      for (int a = 0; a < n.num_actions(i); ++a) {
        const int jt = n.with_action(r.joint[n.id], i, a);
        if (discounted_value(tree, n.id, jt, pol, i, r.gammas[i]) > base + 1e-9) return false;
      }
    }
  }
  return true;
}

TEST_CASE("spne passes the one-shot deviation check; satisficing sets contain it") {
  std::mt19937_64 rng(67);
  for (int trial = 0; trial < 25; ++trial) {
    const int stages = 1 + trial % 3;
    const GameTree tree = small_tree(rng, stages, trial % 2 == 0 ? 2 : 1);
    for (double g0 : {-1.0, 0.0, 0.5}) {
      for (double g1 : {-0.5, 1.0}) {
        const std::vector<double> g = {g0, g1};
        const SpneResult r = spne(tree, g);
        CHECK(subgame_perfect(tree, r));
        const SolutionSet ss = sspe_set(tree, r);
        const SolutionSet ms = mspe_set(tree, r);
        for (const GameNode& n : tree.nodes()) {
          for (int i = 0; i < 2; ++i) {
            const int star = n.action_of(r.joint[n.id], i);
            const auto& s = ss.admissible[n.id][i];
            CHECK(std::binary_search(s.begin(), s.end(), star));
            if (g[i] == -1.0) CHECK(static_cast<int>(s.size()) == n.num_actions(i));
            for (int a : ms.admissible[n.id][i]) {
              CHECK(n.maneuver(i, a) == n.maneuver(i, star));
            }
            CHECK(!ms.admissible[n.id][i].empty());
          }
        }
      }
    }
  }
}

TEST_CASE("mspe excludes a rolling stop") {
  // Agent 0: two waits and a proceed; agent 1 has a single action.
  const GameTree t = stage_game(payoff_node({{W, W, P}, {P}},
                                            {{0.9, 0.5}, {0.5, 0.5}, {0.7, 0.5}}));
  const std::vector<double> g = {0.0, 0.0};
  const SpneResult r = spne(t, g);
  CHECK(r.joint[0] == 0);
  const SolutionSet ms = mspe_set(t, r);
  CHECK(ms.admissible[0][0] == std::vector<int>{0});
  // Without an alternative maneuver every same-maneuver action qualifies.
  const GameTree t2 = stage_game(payoff_node({{W, W}, {P}}, {{0.9, 0.5}, {0.5, 0.5}}));
  CHECK(mspe_set(t2, spne(t2, g)).admissible[0][0] == std::vector<int>{0, 1});
}

TEST_CASE("sspe threshold") {
  // Safety varies; agent 0's equilibrium action has safety 0.6.
  GameNode n = make_node({{W, P, P}, {W}});
  const double safety[] = {0.6, 0.2, 0.5};
  const double progress[] = {0.1, 0.9, 0.8};
  for (int j = 0; j < 3; ++j) {
    n.safety(j, 0) = safety[j];
    n.progress(j, 0) = progress[j];
    n.safety(j, 1) = 1.0;
  }
  const GameTree t = stage_game(n);
  // gamma 0.55: action 0 is a safety-limited 0.6 > 0.55 → progress 0.1;
  // action 1 aggregates to 0.2; action 2 to 0.5. Best response is 2 (0.5).
  const std::vector<double> g = {0.55, 0.0};
  const SpneResult r = spne(t, g);
  CHECK(r.joint[0] == 2);
  // Threshold min(0.5, 0.55) = 0.5 admits actions 0 and 2.
  CHECK(sspe_set(t, r).admissible[0][0] == std::vector<int>{0, 2});
}

TEST_CASE("logit") {
  const std::vector<double> v = {0.8, 0.2};
  const auto p = logit(v, 1.0);
  CHECK(p[0] == doctest::Approx(0.6456563062257954).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(0.3543436937742045).epsilon(1e-12));
  const std::vector<double> eq = {0.3, 0.3};
  CHECK(logit(eq, 1.0) == std::vector<double>{0.5, 0.5});
  CHECK_THROWS_AS(logit(v, 0.0), Error);
}

TEST_CASE("qlk distributions") {
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 10; ++trial) {
    const GameTree tree = small_tree(rng, 2, 2);
    const std::vector<double> g = {0.0, 0.5};
    const SolutionSet tiny = qlk_response(tree, 1e-6, g);
    const SolutionSet one = qlk_response(tree, 1.0, g);
    const SolutionSet sharp = qlk_response(tree, 5.0, g);
    for (const GameNode& n : tree.nodes()) {
      for (int i = 0; i < 2; ++i) {
        const auto& p = one.probabilities[n.id][i];
        double sum = 0.0;
        for (double x : p) sum += x;
        CHECK(std::abs(sum - 1.0) < 1e-9);
        for (double x : tiny.probabilities[n.id][i]) {
          CHECK(std::abs(x - 1.0 / n.num_actions(i)) < 1e-3);
        }
        const int top = static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
        CHECK(sharp.probabilities[n.id][i][top] >= p[top] - 1e-12);
      }
    }
  }
}

TEST_CASE("solution json") {
  const GameTree t = stage_game(payoff_node(
      {{W, P}, {W, P}}, {{0.6, 0.6}, {0.0, 0.9}, {0.9, 0.0}, {0.3, 0.3}}));
  const std::vector<double> g = {0.0, 0.0};
  const auto j = nlohmann::json::parse(spne_set(t, spne(t, g)).to_json());
  CHECK(j["0"]["0"] == nlohmann::json::array({1}));
  CHECK(j["0"]["1"] == nlohmann::json::array({1}));
  const auto q = nlohmann::json::parse(qlk_response(t, 1.0, g).to_json());
  CHECK(q["0"]["0"].is_object());
  CHECK(q["0"]["0"]["0"].get<double>() + q["0"]["0"]["1"].get<double>() ==
        doctest::Approx(1.0));
}

}  // namespace
}  // namespace cogdrive

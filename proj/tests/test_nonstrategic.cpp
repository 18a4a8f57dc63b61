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
#include <set>

#include "doctest.h"

#include "cogdrive/errors.hpp"
#include "cogdrive/nonstrategic.hpp"
#include "test_support.hpp"

namespace cogdrive {
namespace {

using testing::make_node;
using testing::small_tree;
constexpr Maneuver W = Maneuver::kWait;
constexpr Maneuver P = Maneuver::kProceed;

// Direct reading of the two preference conditions and the support rule.
std::vector<int> reference_support(AutomatonKind kind, double g, const GameNode& n, int i,
                                   bool ge) {
  std::vector<int> ws, ps;
  double mw = -9, mp = -9;
  for (int a = 0; a < n.num_actions(i); ++a) {
    if (n.maneuver(i, a) == W) {
      ws.push_back(a);
      mw = std::max(mw, n.worst_safety[i][a]);
    } else {
      ps.push_back(a);
      mp = std::max(mp, n.worst_safety[i][a]);
    }
  }
  auto filt = [&](const std::vector<int>& s) {
    std::vector<int> f;
    for (int a : s) {
      if (n.worst_safety[i][a] >= g) f.push_back(a);
    }
    return f.empty() ? s : f;
  };
  if (kind == AutomatonKind::kAC) {
    const bool wait = !ws.empty() && (ge ? mw >= g : mw <= g);
    if (wait) return filt(ws);
    return ps.empty() ? ws : ps;
  }
  const bool go = !ps.empty() && mp > g;
  if (go) return filt(ps);
  return ws.empty() ? ps : ws;
}

GameNode two_agent_node(const std::vector<Maneuver>& own, const std::vector<double>& ws) {
  GameNode n = make_node({own, {P}});
  n.worst_safety[0] = ws;
  return n;
}

TEST_CASE("preference condition examples") {
  const GameConfig cfg;
  const GameNode wait_set = two_agent_node({W, W, P}, {0.9, 0.7, 0.1});
  CHECK_FALSE(preference_condition(AutomatonKind::kAC, wait_set, 0, 0.5, cfg));
  CHECK(preference_condition(AutomatonKind::kAC, wait_set, 0, 0.95, cfg));
  const GameNode proceed_set = two_agent_node({W, P}, {0.6, 0.2});
  CHECK(preference_condition(AutomatonKind::kNAC, proceed_set, 0, 0.0, cfg));
  CHECK_FALSE(preference_condition(AutomatonKind::kNAC, proceed_set, 0, 0.2, cfg));

  const GameNode no_wait = two_agent_node({P}, {0.3});
  CHECK_FALSE(preference_condition(AutomatonKind::kAC, no_wait, 0, 1.0, cfg));
  const GameNode no_proceed = two_agent_node({W}, {0.3});
  CHECK_FALSE(preference_condition(AutomatonKind::kNAC, no_proceed, 0, -1.0, cfg));

  GameConfig flipped;
  flipped.flags.ac_condition_ge = true;
  CHECK(preference_condition(AutomatonKind::kAC, wait_set, 0, 0.5, flipped));
  CHECK_FALSE(preference_condition(AutomatonKind::kAC, wait_set, 0, 0.95, flipped));
}

TEST_CASE("step automaton supports") {
  const GameConfig cfg;
  SUBCASE("stay stopped") {
    const GameNode n = two_agent_node({W, P, P}, {-0.2, 0.5, 0.4});
    const AutomatonStep st = step_automaton(AutomatonKind::kAC, 0.0, n, 0, cfg);
    CHECK(st.state == AutomatonState::kW);
    CHECK(st.support == std::vector<int>{0});
  }
  SUBCASE("AC with condition false proceeds on every proceed trajectory") {
    const GameNode n = two_agent_node({W, W, P, P}, {0.9, 0.7, 0.1, -0.3});
    const AutomatonStep st = step_automaton(AutomatonKind::kAC, 0.5, n, 0, cfg);
    CHECK(st.state == AutomatonState::kP);
    CHECK(st.support == std::vector<int>{2, 3});
  }
  SUBCASE("NAC filters proceed trajectories by safety") {
    const GameNode n = two_agent_node({W, P, P, P}, {0.9, 0.1, 0.6, 0.3});
    const AutomatonStep st = step_automaton(AutomatonKind::kNAC, 0.25, n, 0, cfg);
    CHECK(st.state == AutomatonState::kP);
    CHECK(st.support == std::vector<int>{2, 3});
  }
  SUBCASE("a missing maneuver forces the other one") {
    const GameNode n = two_agent_node({W, W}, {0.9, 0.7});
    const AutomatonStep st = step_automaton(AutomatonKind::kAC, 0.5, n, 0, cfg);
    CHECK(st.state == AutomatonState::kW);
    CHECK(st.support == std::vector<int>{0, 1});
  }
  SUBCASE("no trajectory at all") {
    GameNode n = two_agent_node({W}, {0.0});
    n.actions[0].clear();
    n.radix[0] = 0;
    CHECK_THROWS_AS(step_automaton(AutomatonKind::kAC, 0.5, n, 0, cfg), Error);
  }
}

TEST_CASE("step automaton equals the reference on random nodes") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> sz(1, 6);
  std::bernoulli_distribution coin(0.5);
  const std::vector<double> gammas = {-1.0, -0.5, 0.0, 0.5, 1.0};
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Maneuver> ms(sz(rng));
    std::vector<double> ws;
    for (auto& m : ms) {
      m = coin(rng) ? W : P;
      // Snap some values onto the grid to exercise equality edges.
      ws.push_back(trial % 3 == 0 ? gammas[sz(rng) % 5] : u(rng));
    }
    const GameNode n = two_agent_node(ms, ws);
    for (bool ge : {false, true}) {
      GameConfig cfg;
      cfg.flags.ac_condition_ge = ge;
      for (auto kind : {AutomatonKind::kAC, AutomatonKind::kNAC}) {
        for (double g : gammas) {
          const AutomatonStep st = step_automaton(kind, g, n, 0, cfg);
          CHECK(st.support == reference_support(kind, g, n, 0, ge));
          CHECK(!st.support.empty());
          // Single maneuver per support, matching the state.
          for (int a : st.support) {
            CHECK((n.maneuver(0, a) == W) == (st.state == AutomatonState::kW));
          }
        }
      }
    }
  }
}

TEST_CASE("trace is the product of stage supports") {
  const GameConfig cfg;
  const GameNode a = two_agent_node({W, W, P}, {0.1, 0.2, 0.9});    // AC(0.5) waits: {0,1}
  const GameNode b = two_agent_node({W, P, P, P}, {0.8, 0.1, 0.2, 0.3});  // AC(0.5) proceeds
  const GameNode* one[] = {&a};
  CHECK(trace(AutomatonKind::kAC, 0.5, one, 0, cfg).size() == 2);
  const GameNode* two[] = {&a, &b};
  const auto t = trace(AutomatonKind::kAC, 0.5, two, 0, cfg);
  CHECK(t.size() == 6);
  CHECK(std::set<ActionSequence>(t.begin(), t.end()).size() == 6);
}

// Random play-out of level-0 agents along a tree.

int sample(std::mt19937_64& rng, const std::vector<int>& s) {
  return s[rng() % s.size()];
}

TEST_CASE("sampled level-0 play is in its own trace and interval") {
  std::mt19937_64 rng(31);
  const std::vector<double> gammas = kDefaultTypeGrid;
  for (int trial = 0; trial < 40; ++trial) {
    const GameTree tree = small_tree(rng, 3, 2);
    const GameConfig& cfg = tree.config();
    for (auto kind : {AutomatonKind::kAC, AutomatonKind::kNAC}) {
      for (double g : gammas) {
        int cur = tree.root();
        std::vector<Interval> seen;
        while (true) {
          const GameNode& n = tree.node(cur);
          std::vector<int> acts(2);
          for (int i = 0; i < 2; ++i) {
            acts[i] = sample(rng, step_automaton(kind, g, n, i, cfg).support);
          }
          const int j = n.encode(acts);
          const History h = [&] {
            History hh = tree_history(tree, cur);
            HistoryStep st{&tree, cur, acts, {n.maneuver(0, acts[0]), n.maneuver(1, acts[1])}};
            hh.push_back(st);
            return hh;
          }();
          for (int i = 0; i < 2; ++i) {
            CHECK(in_trace(kind, g, h, i, cfg));
            const Interval iv = consistent_interval(kind, h, i, cfg);
            CHECK(iv.contains(g));
          }
          const Interval iv0 = consistent_interval(kind, h, 0, cfg);
          if (!seen.empty()) {
            CHECK(iv0.lo >= seen.back().lo);
            CHECK(iv0.hi <= seen.back().hi);
          }
          seen.push_back(iv0);
          if (n.children[j] < 0) break;
          cur = n.children[j];
        }
      }
    }
  }
}

TEST_CASE("interval example") {
  const GameConfig cfg;
  const History empty;
  const Interval full = consistent_interval(AutomatonKind::kAC, empty, 0, cfg);
  CHECK(full == Interval{});
  CHECK(full.grid_members(kDefaultTypeGrid).size() == 5);

  // Root where agent 0 waited (max wait safety 0.4), then a child where it
  // proceeded (max wait safety 0.8).
  GameNode root = two_agent_node({W, P}, {0.4, 0.9});
  GameNode child = two_agent_node({W, W, P}, {0.8, 0.3, 0.9});
  root.children = {1, -1};
  const GameTree tree = GameTree::assemble(cfg, 2, {root, child});
  const History h = {{&tree, 0, {-1, -1}, {W, P}}, {&tree, 1, {-1, -1}, {P, P}}};
  const Interval iv = consistent_interval(AutomatonKind::kAC, h, 0, cfg);
  CHECK(iv == Interval{0.4, 0.8, true, false});
  CHECK(iv.grid_members(kDefaultTypeGrid) == std::vector<double>{0.5});
  CHECK(iv.contains(0.4));
  CHECK_FALSE(iv.contains(0.8));
  CHECK(Interval{0.5, 0.5, true, false}.empty());
  CHECK_FALSE(Interval{0.5, 0.5, true, true}.empty());

  // The NAC reading of the same play uses proceed safeties: [0.9, 0.9).
  CHECK(consistent_interval(AutomatonKind::kNAC, h, 0, cfg).empty());
}

TEST_CASE("interval agrees with maneuver-level trace membership") {
  std::mt19937_64 rng(41);
  std::vector<double> gammas;
  for (int k = -40; k <= 40; ++k) gammas.push_back(k / 40.0);
  for (int trial = 0; trial < 40; ++trial) {
    const GameTree tree = small_tree(rng, 3, 2);
    for (bool ge : {false, true}) {
      GameConfig cfg = tree.config();
      cfg.flags.ac_condition_ge = ge;
      // Walk a random path; record every maneuver pattern for agent 0.
      int cur = tree.root();
      History h;
      while (true) {
        const GameNode& n = tree.node(cur);
        const int j = static_cast<int>(rng() % n.num_joints());
        const auto acts = n.decode(j);
        HistoryStep st{&tree, cur, {-1, -1}, {n.maneuver(0, acts[0]), n.maneuver(1, acts[1])}};
        // Also try the flipped maneuver when the node offers it.
        if (rng() % 2 == 0) {
          const Maneuver f = st.maneuvers[0] == W ? P : W;
          if (has_maneuver(n, 0, f)) st.maneuvers[0] = f;
        }
        h.push_back(st);
        for (auto kind : {AutomatonKind::kAC, AutomatonKind::kNAC}) {
          const Interval iv = consistent_interval(kind, h, 0, cfg);
          std::vector<double> probe = gammas;
          for (const auto& s : h) {
            for (Maneuver m : {W, P}) {
              if (auto v = max_step_safety(s.game_node(), 0, m)) {
                if (*v >= -1.0 && *v <= 1.0) probe.push_back(*v);
              }
            }
          }
          for (double g : probe) CHECK(iv.contains(g) == in_trace(kind, g, h, 0, cfg));
        }
        if (n.children[j] < 0) break;
        cur = n.children[j];
      }
    }
  }
}

TEST_CASE("switching between AC at 1 and NAC at -1 covers every maneuver sequence") {
  std::mt19937_64 rng(43);
  const GameConfig base;
  for (int trial = 0; trial < 20; ++trial) {
    const GameTree tree = small_tree(rng, 3, 2);
    for (const GameNode& n : tree.nodes()) {
      for (int i = 0; i < 2; ++i) {
        for (Maneuver m : {W, P}) {
          if (!has_maneuver(n, i, m)) continue;
          const auto kind = m == W ? AutomatonKind::kAC : AutomatonKind::kNAC;
          const double g = m == W ? 1.0 : -1.0;
          const AutomatonStep st = step_automaton(kind, g, n, i, base);
          CHECK(n.maneuver(i, st.support.front()) == m);
        }
      }
    }
  }
}

TEST_CASE("maxmax") {
  SUBCASE("single own action") {
    GameNode n = make_node({{W}, {W, P}});
    CHECK(maxmax_action(n, 0, 0.0) == 0);
  }
  SUBCASE("dominant action") {
    GameNode n = make_node({{W, P, P}, {W, P}});
    for (int j = 0; j < n.num_joints(); ++j) {
      n.safety(j, 0) = 0.9;
      n.progress(j, 0) = n.action_of(j, 0) == 2 ? 0.8 : 0.3;
    }
    CHECK(maxmax_action(n, 0, 0.0) == 2);
  }
  SUBCASE("random nodes against brute force") {
    std::mt19937_64 rng(47);
    std::uniform_real_distribution<double> u(-1.0, 1.0), p(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
      const int a = 1 + static_cast<int>(rng() % 4), b = 1 + static_cast<int>(rng() % 4);
      GameNode n = make_node({std::vector<Maneuver>(a, P), std::vector<Maneuver>(b, W)});
      for (int j = 0; j < n.num_joints(); ++j) {
        n.safety(j, 0) = u(rng);
        n.progress(j, 0) = p(rng);
      }
      const double g = u(rng);
      int best = -1;
      double best_v = -1e9;
      for (int x = 0; x < a; ++x) {
        double m = -1e9;
        for (int y = 0; y < b; ++y) {
          const int j = x * b + y;
          m = std::max(m, aggregate(n.safety(j, 0), n.progress(j, 0), g));
        }
        if (m > best_v) {
          best_v = m;
          best = x;
        }
      }
      CHECK(maxmax_action(n, 0, g) == best);
    }
  }
}

TEST_CASE("switch script") {
  Level0Agent ag;
  ag.switch_policy.entries = {{1, AutomatonKind::kNAC}, {2, AutomatonKind::kAC}};
  ag.apply_switch(0);
  CHECK(ag.kind == AutomatonKind::kAC);
  ag.apply_switch(1);
  CHECK(ag.kind == AutomatonKind::kNAC);
  CHECK(ag.switch_policy.at(1) == AutomatonKind::kNAC);
  CHECK(ag.switch_policy.at(5) == AutomatonKind::kAC);
  CHECK_FALSE(ag.switch_policy.at(0).has_value());
  CHECK(ParseAutomatonKind("nac") == AutomatonKind::kNAC);
  CHECK_THROWS_AS(ParseAutomatonKind("x"), Error);
}

}  // namespace
}  // namespace cogdrive

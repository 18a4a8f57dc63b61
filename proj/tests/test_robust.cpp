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
#include "json.hpp"

#include "cogdrive/errors.hpp"
#include "cogdrive/robust.hpp"
#include "test_support.hpp"

namespace cogdrive {
namespace {

using testing::small_tree;

bool contains(const BeliefSet& s, const AugmentedType& t) {
  return std::find(s.begin(), s.end(), t) != s.end();
}

TEST_CASE("type expansion") {
  const BeliefSet full = expand_types(kDefaultTypeGrid);
  CHECK(full.size() == 25);
  std::set<std::string> labels;
  for (const auto& t : full) labels.insert(t.label());
  CHECK(labels.size() == 25);
  const std::vector<double> one = {0.5};
  CHECK(expand_types(one).size() == 5);
  CHECK_THROWS_AS(expand_types(std::vector<double>{}), Error);
}

// Opponent behaviour under a known augmented type, with the robust agent 0
// playing uniformly at random.
int simulated_action(SolverPool& pool, const GameTree& tree, int node, const History& h,
                     const AugmentedType& t, double gamma_r, std::mt19937_64& rng) {
  const GameConfig& cfg = tree.config();
  const GameNode& n = tree.node(node);
  switch (t.model) {
    case OpponentModel::kAC:
    case OpponentModel::kNAC: {
      const auto k = t.model == OpponentModel::kAC ? AutomatonKind::kAC : AutomatonKind::kNAC;
      const auto sup = step_automaton(k, t.gamma, n, 1, cfg).support;
      return sup[rng() % sup.size()];
    }
    case OpponentModel::kLevel1: {
      const auto b = level1_beliefs(h, 1, 2, cfg);
      return pool.of(tree).level1(node, 1, t.gamma, b).choice(node);
    }
    case OpponentModel::kSSPE:
    case OpponentModel::kMSPE: {
      const std::vector<double> g = {gamma_r, t.gamma};
      const auto& s = t.model == OpponentModel::kSSPE ? pool.of(tree).sspe(g)
                                                      : pool.of(tree).mspe(g);
      const auto& set = s.admissible[node][1];
      return set[rng() % set.size()];
    }
  }
  return 0;
}

TEST_CASE("filter keeps the generating type at every prefix and only shrinks") {
  std::mt19937_64 rng(73);
  const RobustContext ctx{0, 0.5, 0};
  for (int trial = 0; trial < 6; ++trial) {
    const GameTree tree = small_tree(rng, 3, 1 + trial % 2);
    SolverPool pool;
    CHECK(filter_consistent(pool, {}, 1, ctx, kDefaultTypeGrid).size() == 25);
    for (const AugmentedType& t : expand_types(kDefaultTypeGrid)) {
      int cur = 0;
      History h;
      BeliefSet prev = expand_types(kDefaultTypeGrid);
      while (true) {
        const GameNode& n = tree.node(cur);
        const int own = static_cast<int>(rng() % n.num_actions(0));
        const int opp = simulated_action(pool, tree, cur, h, t, ctx.gamma, rng);
        const std::vector<int> acts = {own, opp};
        h.push_back({&tree, cur, acts, {n.maneuver(0, own), n.maneuver(1, opp)}});
        const BeliefSet b = filter_consistent(pool, h, 1, ctx, kDefaultTypeGrid);
        CHECK(contains(b, t));
        for (const auto& x : b) CHECK(contains(prev, x));
        prev = b;
        const int j = n.encode(acts);
        if (n.children[j] < 0) break;
        cur = n.children[j];
      }
    }
  }
}

TEST_CASE("an adversarial history empties the belief and triggers maxmin") {
  // Without gamma = -1 the permissive SSPE hypothesis is gone, so a search
  // over random plays finds a history no hypothesis explains.
  std::mt19937_64 rng(79);
  const std::vector<double> grid = {0.5, 1.0};
  const RobustContext ctx{0, 0.0, 0};
  bool found = false;
  for (int trial = 0; trial < 200 && !found; ++trial) {
    GameConfig cfg;
    cfg.type_grid = grid;
    cfg.n_samples = 2;
    cfg.horizon = 3 * cfg.period;
    auto f = testing::random_crossing(rng);
    const GameTree tree = build_game_tree(f.states, f.paths, cfg);
    SolverPool pool;
    int cur = 0;
    History h;
    while (!found) {
      const GameNode& n = tree.node(cur);
      const int j = static_cast<int>(rng() % n.num_joints());
      const auto acts = n.decode(j);
      h.push_back({&tree, cur, acts, {n.maneuver(0, acts[0]), n.maneuver(1, acts[1])}});
      if (n.children[j] < 0) break;
      cur = n.children[j];
      if (filter_consistent(pool, h, 1, ctx, grid).empty()) {
        found = true;
        const RobustDecision d = robust_response(pool, tree, cur, h, ctx);
        CHECK(d.fallback[1]);
        // Maxmin over every opponent action.
        const GameNode& x = tree.node(cur);
        double best = -1e9;
        for (int a = 0; a < x.num_actions(0); ++a) best = std::max(best, d.maxmin[a]);
        CHECK(d.score[d.action] == doctest::Approx(best).epsilon(1e-12));
        // With slack for every stage the belief is full again.
        RobustContext loose = ctx;
        loose.slack = static_cast<int>(h.size());
        CHECK(filter_consistent(pool, h, 1, loose, grid).size() == 10);
      }
    }
  }
  CHECK(found);
}

TEST_CASE("robust response on stage games equals max-inf-max enumeration") {
  std::mt19937_64 rng(83);
  for (int trial = 0; trial < 40; ++trial) {
    const GameTree tree = small_tree(rng, 1, 3);
    const GameNode& n = tree.node(0);
    SolverPool pool;
    const RobustContext ctx{0, kDefaultTypeGrid[trial % 5], 0};
    const RobustDecision d = robust_response(pool, tree, 0, {}, ctx);
    const JointPolicy none = [](int) { return -1; };
    std::vector<double> score(n.num_actions(0), 1e9);
    double maxmin_top = -1e9;
    std::set<int> all_pred;
    for (const auto& b : expand_types(kDefaultTypeGrid)) {
      const auto sets = predicted_sets(pool, tree, 0, {}, 1, b, ctx);
      for (int a = 0; a < n.num_actions(0); ++a) {
        double m = -1e9;
        for (int o : sets[0]) {
          m = std::max(m, discounted_value(tree, 0, n.encode(std::vector<int>{a, o}), none, 0,
                                           ctx.gamma));
          all_pred.insert(o);
        }
        score[a] = std::min(score[a], m);
      }
    }
    for (int a = 0; a < n.num_actions(0); ++a) {
      double mm = 1e9;
      for (int o : all_pred) {
        mm = std::min(mm, discounted_value(tree, 0, n.encode(std::vector<int>{a, o}), none, 0,
                                           ctx.gamma));
      }
      maxmin_top = std::max(maxmin_top, mm);
      CHECK(d.score[a] == doctest::Approx(score[a]).epsilon(1e-12));
    }
    const double top = *std::max_element(score.begin(), score.end());
    CHECK(d.score[d.action] == doctest::Approx(top).epsilon(1e-12));
    CHECK(d.score[d.action] >= maxmin_top - 1e-12);
    for (const auto& e : d.breakdown) {
      for (int a = 0; a < n.num_actions(0); ++a) CHECK(d.score[a] <= e.value[a] + 1e-12);
    }
    const auto j = nlohmann::json::parse(d.to_json());
    CHECK(j["action"] == d.action);
  }
}

TEST_CASE("robust score dominates maxmin along plays") {
  std::mt19937_64 rng(89);
  for (int trial = 0; trial < 4; ++trial) {
    const GameTree tree = small_tree(rng, 3, 1);
    SolverPool pool;
    const RobustContext ctx{0, 0.0, 0};
    int cur = 0;
    History h;
    while (true) {
      const RobustDecision d = robust_response(pool, tree, cur, h, ctx);
      const double mm = *std::max_element(d.maxmin.begin(), d.maxmin.end());
      CHECK(d.score[d.action] >= mm - 1e-12);
      const GameNode& n = tree.node(cur);
      const int opp = static_cast<int>(rng() % n.num_actions(1));
      const std::vector<int> acts = {d.action, opp};
      h.push_back({&tree, cur, acts, {n.maneuver(0, acts[0]), n.maneuver(1, acts[1])}});
      const int j = n.encode(acts);
      if (n.children[j] < 0) break;
      cur = n.children[j];
    }
  }
}

TEST_CASE("belief set json") {
  const BeliefSet b = {{OpponentModel::kAC, 0.5}, {OpponentModel::kMSPE, -1.0}};
  const auto j = nlohmann::json::parse(to_json(b));
  CHECK(j.size() == 2);
  CHECK(j[0]["model"] == "AC");
  CHECK(j[1]["gamma"] == -1.0);
}

}  // namespace
}  // namespace cogdrive

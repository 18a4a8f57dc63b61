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

#include "cogdrive/oracle.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <string>

#include "cogdrive/errors.hpp"

namespace cogdrive::oracle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

JointPolicy follow(const StrategyProfile& p) {
  return [&p](int node) { return p[node]; };
}

void require_per_step(const GameTree& tree) {
  if (tree.config().aggregation != Aggregation::kPerStep) {
    throw Error(ErrorKind::kPrecondition, "oracle covers per-step aggregation only");
  }
}

double weight(const GameTree& tree, int depth) {
  const GameConfig& cfg = tree.config();
  double w = 0.0, p = 1.0;
  for (int k = 1; k <= tree.stages() - depth + cfg.continuation_stages; ++k) {
    p *= cfg.delta;
    w += p;
  }
  return w;
}

}  // namespace

long long profile_count(const GameTree& tree) {
  long long c = 1;
  for (const GameNode& n : tree.nodes()) {
    c *= n.num_joints();
    if (c > kMaxProfiles) return kMaxProfiles + 1;
  }
  return c;
}

void enumerate_profiles(const GameTree& tree,
                        const std::function<void(const StrategyProfile&)>& visit) {
  if (profile_count(tree) > kMaxProfiles) {
    throw Error(ErrorKind::kTooLarge, "more than 1e7 profiles");
  }
  StrategyProfile p(tree.size(), 0);
  while (true) {
    visit(p);
    int i = tree.size() - 1;
    for (; i >= 0; --i) {
      if (++p[i] < tree.node(i).num_joints()) break;
      p[i] = 0;
    }
    if (i < 0) return;
  }
}

bool is_total(const GameTree& tree, const StrategyProfile& profile) {
  if (static_cast<int>(profile.size()) != tree.size()) return false;
  for (int i = 0; i < tree.size(); ++i) {
    if (profile[i] < 0 || profile[i] >= tree.node(i).num_joints()) return false;
  }
  return true;
}

bool is_subgame_perfect(const GameTree& tree, const StrategyProfile& profile,
                        std::span<const double> gammas) {
  if (!is_total(tree, profile)) return false;
  const JointPolicy pol = follow(profile);
  for (const GameNode& n : tree.nodes()) {
    for (int i = 0; i < n.num_agents(); ++i) {
      const double base = discounted_value(tree, n.id, profile[n.id], pol, i, gammas[i]);
      for (int a = 0; a < n.num_actions(i); ++a) {
        const int jt = n.with_action(profile[n.id], i, a);
        if (discounted_value(tree, n.id, jt, pol, i, gammas[i]) > base + kTolerance) {
          return false;
        }
      }
    }
  }
  return true;
}

std::vector<StrategyProfile> oracle_spne(const GameTree& tree,
                                         std::span<const double> gammas) {
  std::vector<StrategyProfile> out;
  enumerate_profiles(tree, [&](const StrategyProfile& p) {
    if (is_subgame_perfect(tree, p, gammas)) out.push_back(p);
  });
  return out;
}

ActionSets oracle_sspe(const GameTree& tree, const StrategyProfile& eq,
                       std::span<const double> gammas) {
  const bool step_level = tree.config().flags.sspe_step_level;
  const JointPolicy pol = follow(eq);
  ActionSets out(tree.size(), std::vector<std::vector<int>>(tree.num_agents()));
  for (const GameNode& n : tree.nodes()) {
    for (int i = 0; i < n.num_agents(); ++i) {
      auto safety = [&](int jt) {
        return step_level ? n.safety(jt, i)
                          : discounted_value(tree, n.id, jt, pol, i, gammas[i], true);
      };
      const double thr = std::min(safety(eq[n.id]), gammas[i]);
      for (int a = 0; a < n.num_actions(i); ++a) {
        if (safety(n.with_action(eq[n.id], i, a)) >= thr - kTolerance) {
          out[n.id][i].push_back(a);
        }
      }
    }
  }
  return out;
}

ActionSets oracle_mspe(const GameTree& tree, const StrategyProfile& eq,
                       std::span<const double> gammas) {
  const bool lhs_safety = tree.config().flags.mspe_lhs_safety;
  const JointPolicy pol = follow(eq);
  ActionSets out(tree.size(), std::vector<std::vector<int>>(tree.num_agents()));
  for (const GameNode& n : tree.nodes()) {
    for (int i = 0; i < n.num_agents(); ++i) {
      const int star = n.action_of(eq[n.id], i);
      const Maneuver m = n.maneuver(i, star);
      double best_other = -kInf;
      for (int b = 0; b < n.num_actions(i); ++b) {
        if (n.maneuver(i, b) == m) continue;
        best_other = std::max(best_other, discounted_value(tree, n.id, n.with_action(eq[n.id], i, b),
                                                           pol, i, gammas[i]));
      }
      for (int a = 0; a < n.num_actions(i); ++a) {
        if (n.maneuver(i, a) != m) continue;
        const double lhs = discounted_value(tree, n.id, n.with_action(eq[n.id], i, a), pol, i,
                                            gammas[i], lhs_safety);
        if (lhs > best_other + kTolerance) out[n.id][i].push_back(a);
      }
      if (out[n.id][i].empty()) out[n.id][i].push_back(star);
    }
  }
  return out;
}

std::vector<int> oracle_automaton(Kind kind, double gamma, const GameNode& node,
                                  int agent, const GameConfig& cfg) {
  std::vector<int> waits, proceeds;
  double best_wait = -kInf, best_proceed = -kInf;
  for (int a = 0; a < node.num_actions(agent); ++a) {
    const double s = node.worst_safety[agent][a];
    if (node.maneuver(agent, a) == Maneuver::kWait) {
      waits.push_back(a);
      best_wait = std::max(best_wait, s);
    } else {
      proceeds.push_back(a);
      best_proceed = std::max(best_proceed, s);
    }
  }
  auto at_least_gamma = [&](const std::vector<int>& set) {
    std::vector<int> kept;
    for (int a : set) {
      if (node.worst_safety[agent][a] >= gamma) kept.push_back(a);
    }
    return kept.empty() ? set : kept;
  };
  if (kind == Kind::kAC) {
    const bool phi = !waits.empty() &&
                     (cfg.flags.ac_condition_ge ? best_wait >= gamma : best_wait <= gamma);
    if (phi) return at_least_gamma(waits);
    return proceeds.empty() ? waits : proceeds;
  }
  const bool phi = !proceeds.empty() && best_proceed > gamma;
  if (phi) return at_least_gamma(proceeds);
  return waits.empty() ? proceeds : waits;
}

namespace {

struct TypeHyp {
  Kind kind;
  double gamma;
};

// Level-0 types of `observed` whose traces hold the maneuvers seen on the
// first `steps` steps of `h`.
std::vector<TypeHyp> trace_consistent(const History& h, std::size_t steps, int observed,
                                      const GameConfig& cfg) {
  std::vector<TypeHyp> out;
  for (Kind k : {Kind::kAC, Kind::kNAC}) {
    for (double g : cfg.type_grid) {
      bool ok = true;
      for (std::size_t s = 0; s < steps && ok; ++s) {
        const GameNode& n = h[s].game_node();
        const auto sup = oracle_automaton(k, g, n, observed, cfg);
        ok = n.maneuver(observed, sup.front()) == h[s].maneuvers[observed];
      }
      if (ok) out.push_back({k, g});
    }
  }
  return out;
}

std::vector<TypeHyp> level1_types(const History& h, int observed, const GameConfig& cfg) {
  for (std::size_t steps = h.size() + 1; steps-- > 0;) {
    auto t = trace_consistent(h, steps, observed, cfg);
    if (!t.empty()) return t;
  }
  return {};
}

struct PathSearch {
  const GameTree& tree;
  int agent;
  double gamma;
  int start;
  const std::vector<std::vector<TypeHyp>>& types;
  std::map<int, int> path;  // node -> joint
  std::vector<double> best;

  std::vector<int> consistent(const GameNode& n, int j) const {
    std::set<int> s;
    for (const TypeHyp& t : types[j]) {
      for (int a : oracle_automaton(t.kind, t.gamma, n, j, tree.config())) s.insert(a);
    }
    return {s.begin(), s.end()};
  }

  void visit(int x, int first_own) {
    const GameNode& n = tree.node(x);
    const int na = n.num_agents();
    std::vector<std::vector<int>> opts(na);
    for (int j = 0; j < na; ++j) {
      if (j == agent) {
        for (int a = 0; a < n.num_actions(j); ++a) opts[j].push_back(a);
      } else {
        opts[j] = consistent(n, j);
      }
    }
    std::vector<std::size_t> pos(na, 0);
    std::vector<int> acts(na);
    while (true) {
      for (int j = 0; j < na; ++j) acts[j] = opts[j][pos[j]];
      const int jt = n.encode(acts);
      const int own = x == start ? acts[agent] : first_own;
      path[x] = jt;
      if (n.children[jt] >= 0) {
        visit(n.children[jt], own);
      } else {
        const JointPolicy pol = [this](int id) { return path.at(id); };
        const double v = discounted_value(tree, start, path.at(start), pol, agent, gamma);
        best[own] = std::max(best[own], v);
      }
      int j = na - 1;
      for (; j >= 0; --j) {
        if (++pos[j] < opts[j].size()) break;
        pos[j] = 0;
      }
      if (j < 0) break;
    }
    path.erase(x);
  }
};

}  // namespace

std::vector<int> oracle_level1(const GameTree& tree, int belief_node, int at, int agent,
                               double gamma) {
  if (tree.config().flags.l1_expectation) {
    throw Error(ErrorKind::kPrecondition, "oracle covers the max-pair level-1 only");
  }
  const History h = tree_history(tree, belief_node);
  std::vector<std::vector<TypeHyp>> types(tree.num_agents());
  for (int j = 0; j < tree.num_agents(); ++j) {
    if (j != agent) types[j] = level1_types(h, j, tree.config());
  }
  PathSearch search{tree, agent, gamma, at, types, {}, {}};
  search.best.assign(tree.node(at).num_actions(agent), -kInf);
  search.visit(at, -1);
  const double top = *std::max_element(search.best.begin(), search.best.end());
  std::vector<int> out;
  for (std::size_t a = 0; a < search.best.size(); ++a) {
    if (search.best[a] >= top - kTieEps) out.push_back(static_cast<int>(a));
  }
  return out;
}

namespace {

struct RobustSearch {
  const GameTree& tree;
  int r;
  int j;
  double gamma_r;
  int decision;
  const EquilibriumFn& equilibrium;
  std::map<std::pair<int, double>, ActionSets> sspe, mspe;
  std::map<std::tuple<int, int, double>, std::vector<int>> l1;

  const ActionSets& sets(Hypothesis m, double g) {
    auto& cache = m == Hypothesis::kSSPE ? sspe : mspe;
    const auto key = std::make_pair(0, g);
    auto it = cache.find(key);
    if (it == cache.end()) {
      std::vector<double> types(2);
      types[r] = gamma_r;
      types[j] = g;
      const StrategyProfile eq = equilibrium(types);
      it = cache.emplace(key, m == Hypothesis::kSSPE ? oracle_sspe(tree, eq, types)
                                                     : oracle_mspe(tree, eq, types)).first;
    }
    return it->second;
  }

  std::vector<int> predicted(Hypothesis m, double g, int belief_node, int x) {
    const GameConfig& cfg = tree.config();
    switch (m) {
      case Hypothesis::kAC: return oracle_automaton(Kind::kAC, g, tree.node(x), j, cfg);
      case Hypothesis::kNAC: return oracle_automaton(Kind::kNAC, g, tree.node(x), j, cfg);
      case Hypothesis::kLevel1: {
        const auto key = std::make_tuple(belief_node, x, g);
        auto it = l1.find(key);
        if (it == l1.end()) {
          it = l1.emplace(key, oracle_level1(tree, belief_node, x, j, g)).first;
        }
        return it->second;
      }
      case Hypothesis::kSSPE:
      case Hypothesis::kMSPE: return sets(m, g)[x][j];
    }
    return {};
  }

  // Normalized robust value of node x; fills `score` at the decision node.
  double value(int x, const std::vector<std::pair<Hypothesis, double>>& kept,
               std::vector<double>* score) {
    const GameNode& n = tree.node(x);
    const GameConfig& cfg = tree.config();
    const double w = weight(tree, n.depth);
    std::vector<double> child_value(n.num_joints(), 0.0);
    std::vector<char> child_done(n.num_joints(), 0);
    auto joint_value = [&](int jt) {
      const int c = n.children[jt];
      double rest;
      if (c >= 0) {
        if (!child_done[jt]) {
          child_value[jt] = value(c, kept, nullptr) * weight(tree, n.depth + 1);
          child_done[jt] = 1;
        }
        rest = child_value[jt];
      } else {
        double tw = 0.0, p = 1.0;
        for (int k = 1; k <= tree.stages() - n.depth - 1 + cfg.continuation_stages; ++k) {
          p *= cfg.delta;
          tw += p;
        }
        rest = tw * aggregate(n.cont_safety(jt, r), n.cont_progress(jt, r), gamma_r);
      }
      return cfg.delta * (aggregate(n.safety(jt, r), n.progress(jt, r), gamma_r) + rest) / w;
    };
    std::vector<std::vector<int>> hyp_sets;
    if (kept.empty()) {
      for (int o = 0; o < n.num_actions(j); ++o) hyp_sets.push_back({o});
    } else {
      for (const auto& [m, g] : kept) hyp_sets.push_back(predicted(m, g, decision, x));
    }
    std::vector<double> sc(n.num_actions(r), kInf);
    std::vector<int> acts(2);
    for (int a = 0; a < n.num_actions(r); ++a) {
      acts[r] = a;
      for (const auto& set : hyp_sets) {
        double m = -kInf;
        for (int o : set) {
          acts[j] = o;
          m = std::max(m, joint_value(n.encode(acts)));
        }
        sc[a] = std::min(sc[a], m);
      }
    }
    const double top = *std::max_element(sc.begin(), sc.end());
    if (score) *score = sc;
    // The value carried upward is that of the lowest near-best action.
    for (double s : sc) {
      if (s >= top - kTieEps) return s;
    }
    return top;
  }
};

}  // namespace

RobustOracleResult oracle_robust(const GameTree& tree, int node, int agent, double gamma,
                                 const EquilibriumFn& equilibrium, int slack) {
  require_per_step(tree);
  if (tree.num_agents() != 2) {
    throw Error(ErrorKind::kPrecondition, "robust oracle covers two agents");
  }
  const int j = 1 - agent;
  RobustSearch rs{tree, agent, j, gamma, node, equilibrium, {}, {}, {}};
  const History h = tree_history(tree, node);
  std::vector<std::pair<Hypothesis, double>> kept;
  for (Hypothesis m : {Hypothesis::kAC, Hypothesis::kNAC, Hypothesis::kLevel1,
                       Hypothesis::kSSPE, Hypothesis::kMSPE}) {
    for (double g : tree.config().type_grid) {
      int misses = 0;
      for (const HistoryStep& step : h) {
        const auto set = rs.predicted(m, g, step.node, step.node);
        if (std::find(set.begin(), set.end(), step.actions[j]) == set.end()) ++misses;
      }
      if (misses <= slack) kept.emplace_back(m, g);
    }
  }
  RobustOracleResult res;
  res.surviving.assign(2, 0);
  res.surviving[j] = static_cast<int>(kept.size());
  rs.value(node, kept, &res.score);
  const double top = *std::max_element(res.score.begin(), res.score.end());
  while (res.score[res.action] < top - kTieEps) ++res.action;
  return res;
}

std::vector<int> oracle_filter(Concept which, const Instance& in) {
  const GameTree& tree = *in.tree;
  switch (which) {
    case Concept::kSSPE: return oracle_sspe(tree, in.equilibrium, in.gammas)[in.node][in.agent];
    case Concept::kMSPE: return oracle_mspe(tree, in.equilibrium, in.gammas)[in.node][in.agent];
    case Concept::kL1:
      return oracle_level1(tree, in.node, in.node, in.agent, in.gammas[in.agent]);
    case Concept::kAC:
      return oracle_automaton(Kind::kAC, in.gammas[in.agent], tree.node(in.node), in.agent,
                              tree.config());
    case Concept::kNAC:
      return oracle_automaton(Kind::kNAC, in.gammas[in.agent], tree.node(in.node), in.agent,
                              tree.config());
    case Concept::kRobust:
      return {oracle_robust(tree, in.node, in.agent, in.gammas[in.agent], in.equilibrium_fn)
                  .action};
  }
  return {};
}

}  // namespace cogdrive::oracle

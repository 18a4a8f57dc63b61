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

#include "cogdrive/strategic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "cogdrive/errors.hpp"
#include "json.hpp"

namespace cogdrive {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Odometer over the cartesian product of per-agent choice lists; the slot of
// `skip` is held at `fixed`.
class ComboIter {
 public:
  ComboIter(const std::vector<std::vector<int>>& choices, int skip)
      : choices_(choices), skip_(skip), pos_(choices.size(), 0) {
    for (std::size_t i = 0; i < choices_.size(); ++i) {
      if (static_cast<int>(i) != skip_ && choices_[i].empty()) done_ = true;
    }
  }
  bool done() const { return done_; }
  // Fills `acts` for every agent but `skip`.
  void fill(std::vector<int>& acts) const {
    for (std::size_t i = 0; i < choices_.size(); ++i) {
      if (static_cast<int>(i) != skip_) acts[i] = choices_[i][pos_[i]];
    }
  }
  void next() {
    for (int i = static_cast<int>(choices_.size()) - 1; i >= 0; --i) {
      if (i == skip_) continue;
      if (++pos_[i] < choices_[i].size()) return;
      pos_[i] = 0;
    }
    done_ = true;
  }

 private:
  const std::vector<std::vector<int>>& choices_;
  int skip_;
  std::vector<std::size_t> pos_;
  bool done_ = false;
};

std::vector<char> subtree_mask(const GameTree& tree, int from) {
  std::vector<char> mask(tree.size(), 0);
  std::vector<int> stack = {from};
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    mask[id] = 1;
    for (int c : tree.node(id).children) {
      if (c >= 0) stack.push_back(c);
    }
  }
  return mask;
}

}  // namespace

bool BeliefL1::grid_empty(std::span<const double> grid) const {
  return ac.grid_members(grid).empty() && nac.grid_members(grid).empty();
}

BeliefL1 update_consistent_belief(const History& history, int observed,
                                  const GameConfig& cfg) {
  return {consistent_interval(AutomatonKind::kAC, history, observed, cfg),
          consistent_interval(AutomatonKind::kNAC, history, observed, cfg)};
}

std::vector<BeliefL1> beliefs_about_others(const History& history, int agent,
                                           int num_agents, const GameConfig& cfg) {
  std::vector<BeliefL1> out(num_agents);
  for (int j = 0; j < num_agents; ++j) {
    if (j != agent) out[j] = update_consistent_belief(history, j, cfg);
  }
  return out;
}

std::vector<BeliefL1> level1_beliefs(const History& history, int agent, int num_agents,
                                     const GameConfig& cfg) {
  std::vector<BeliefL1> out(num_agents);
  for (int j = 0; j < num_agents; ++j) {
    if (j == agent) continue;
    for (std::size_t k = history.size() + 1; k-- > 0;) {
      const History prefix(history.begin(), history.begin() + static_cast<long>(k));
      const BeliefL1 b = update_consistent_belief(prefix, j, cfg);
      if (!b.grid_empty(cfg.type_grid)) {
        out[j] = b;
        break;
      }
    }
  }
  return out;
}

std::vector<int> level0_consistent_actions(const GameNode& node, int agent,
                                           const BeliefL1& belief,
                                           const GameConfig& cfg) {
  const auto ac = belief.ac.grid_members(cfg.type_grid);
  const auto nac = belief.nac.grid_members(cfg.type_grid);
  if (ac.empty() && nac.empty()) {
    throw Error(ErrorKind::kEmptyBelief,
                "agent " + std::to_string(agent) + " fits no level-0 type");
  }
  std::set<int> acts;
  for (double g : ac) {
    for (int a : step_automaton(AutomatonKind::kAC, g, node, agent, cfg).support) {
      acts.insert(a);
    }
  }
  for (double g : nac) {
    for (int a : step_automaton(AutomatonKind::kNAC, g, node, agent, cfg).support) {
      acts.insert(a);
    }
  }
  return {acts.begin(), acts.end()};
}

PairChoice best_response_pair(const Eigen::ArrayXXd& values, bool expectation) {
  if (values.rows() == 0 || values.cols() == 0) {
    throw Error(ErrorKind::kPrecondition, "empty response matrix");
  }
  Eigen::ArrayXd row = expectation ? Eigen::ArrayXd(values.rowwise().mean())
                                   : Eigen::ArrayXd(values.rowwise().maxCoeff());
  PairChoice pc;
  pc.value = row.maxCoeff();
  for (int r = 0; r < row.size(); ++r) {
    if (row(r) >= pc.value - kTieEps) pc.ties.push_back(r);
  }
  pc.own = pc.ties.front();
  pc.opp = -1;
  if (!expectation) {
    for (int c = 0; c < values.cols(); ++c) {
      if (values(pc.own, c) >= row(pc.own) - kTieEps) {
        pc.opp = c;
        break;
      }
    }
  }
  return pc;
}

Level1Plan level1_plan(const GameTree& tree, int from, int agent, double gamma,
                       const std::vector<BeliefL1>& beliefs) {
  const GameConfig& cfg = tree.config();
  const bool expectation = cfg.flags.l1_expectation;
  const int n = tree.num_agents();
  Level1Plan plan;
  plan.from = from;
  plan.reached = subtree_mask(tree, from);
  plan.ties.assign(tree.size(), {});
  plan.sums.assign(tree.size(), {});
  std::vector<std::vector<int>> choices(n);
  std::vector<int> acts(n);
  for (int id : tree.bottom_up()) {
    if (!plan.reached[id]) continue;
    const GameNode& node = tree.node(id);
    for (int j = 0; j < n; ++j) {
      if (j != agent) choices[j] = level0_consistent_actions(node, j, beliefs[j], cfg);
    }
    int combos = 1;
    for (int j = 0; j < n; ++j) {
      if (j != agent) combos *= static_cast<int>(choices[j].size());
    }
    const int own = node.num_actions(agent);
    Eigen::ArrayXXd values(own, expectation ? 1 : combos);
    std::vector<std::vector<ValueSums>> sums(own, std::vector<ValueSums>(combos));
    for (int a = 0; a < own; ++a) {
      acts[agent] = a;
      int c = 0;
      ValueSums mean;
      for (ComboIter it(choices, agent); !it.done(); it.next(), ++c) {
        it.fill(acts);
        const int jt = node.encode(acts);
        const int child = node.children[jt];
        sums[a][c] = tree.joint_sums(node, jt, agent, gamma,
                                     child >= 0 ? &plan.sums[child] : nullptr);
        if (expectation) {
          mean += sums[a][c] * (1.0 / combos);
        } else {
          values(a, c) = tree.score(node.depth, sums[a][c], gamma);
        }
      }
      if (expectation) {
        values(a, 0) = tree.score(node.depth, mean, gamma);
        sums[a][0] = mean;
      }
    }
    const PairChoice pc = best_response_pair(values, false);
    plan.ties[id] = pc.ties;
    // Carry the exact maximum so near-ties do not accumulate across stages.
    Eigen::Index br = 0, bc = 0;
    values.maxCoeff(&br, &bc);
    plan.sums[id] = sums[br][bc];
  }
  return plan;
}

int level1_response(const GameTree& tree, int node, int agent, double gamma) {
  const History h = tree_history(tree, node);
  const auto beliefs = level1_beliefs(h, agent, tree.num_agents(), tree.config());
  return level1_plan(tree, node, agent, gamma, beliefs).choice(node);
}

bool SpneResult::any_fallback() const {
  return std::any_of(fallback.begin(), fallback.end(), [](char c) { return c != 0; });
}

SpneResult spne(const GameTree& tree, std::span<const double> gammas,
                bool allow_fallback) {
  const int n = tree.num_agents();
  if (static_cast<int>(gammas.size()) != n) {
    throw Error(ErrorKind::kPrecondition, "one type per agent required");
  }
  SpneResult res;
  res.gammas.assign(gammas.begin(), gammas.end());
  res.joint.assign(tree.size(), -1);
  res.sums.assign(tree.size(), std::vector<ValueSums>(n));
  res.fallback.assign(tree.size(), 0);
  for (int id : tree.bottom_up()) {
    const GameNode& node = tree.node(id);
    const int J = node.num_joints();
    std::vector<std::vector<ValueSums>> vs(J, std::vector<ValueSums>(n));
    Eigen::ArrayXXd u(J, n);
    for (int j = 0; j < J; ++j) {
      const int child = node.children[j];
      for (int i = 0; i < n; ++i) {
        vs[j][i] = tree.joint_sums(node, j, i, gammas[i],
                                   child >= 0 ? &res.sums[child][i] : nullptr);
        u(j, i) = tree.score(node.depth, vs[j][i], gammas[i]);
      }
    }
    int best = -1;
    double best_sum = -kInf;
    int least = -1;
    double least_regret = kInf;
    for (int j = 0; j < J; ++j) {
      double regret = 0.0;
      for (int i = 0; i < n; ++i) {
        double dev = -kInf;
        for (int a = 0; a < node.num_actions(i); ++a) {
          dev = std::max(dev, u(node.with_action(j, i, a), i));
        }
        regret = std::max(regret, dev - u(j, i));
      }
      if (regret <= kTieEps) {
        const double sum = u.row(j).sum();
        if (best < 0 || sum > best_sum + kTieEps) {
          best = j;
          best_sum = sum;
        }
      }
      if (regret < least_regret - kTieEps) {
        least = j;
        least_regret = regret;
      }
    }
    if (best < 0) {
      if (!allow_fallback) {
        throw Error(ErrorKind::kNoPureEquilibrium,
                    "stage game at node " + std::to_string(id) + " has no pure equilibrium");
      }
      best = least;
      res.fallback[id] = 1;
    }
    res.joint[id] = best;
    res.sums[id] = vs[best];
  }
  return res;
}

namespace {

SolutionSet empty_solution(const GameTree& tree, const std::string& model) {
  SolutionSet s;
  s.model = model;
  s.admissible.assign(tree.size(), std::vector<std::vector<int>>(tree.num_agents()));
  return s;
}

// Sums for `agent` deviating to `action` from the equilibrium joint at `node`.
ValueSums deviation_sums(const GameTree& tree, const SpneResult& eq, const GameNode& node,
                         int agent, int action) {
  const int jt = node.with_action(eq.joint[node.id], agent, action);
  const int child = node.children[jt];
  return tree.joint_sums(node, jt, agent, eq.gammas[agent],
                         child >= 0 ? &eq.sums[child][agent] : nullptr);
}

void add_fallback_flags(const SpneResult& eq, SolutionSet& s) {
  for (std::size_t id = 0; id < eq.fallback.size(); ++id) {
    if (eq.fallback[id]) s.flagged.push_back(static_cast<int>(id));
  }
}

}  // namespace

SolutionSet spne_set(const GameTree& tree, const SpneResult& eq) {
  SolutionSet s = empty_solution(tree, "spne");
  for (const GameNode& node : tree.nodes()) {
    for (int i = 0; i < tree.num_agents(); ++i) {
      s.admissible[node.id][i] = {node.action_of(eq.joint[node.id], i)};
    }
  }
  add_fallback_flags(eq, s);
  return s;
}

SolutionSet sspe_set(const GameTree& tree, const SpneResult& eq) {
  const bool step_level = tree.config().flags.sspe_step_level;
  SolutionSet s = empty_solution(tree, "sspe");
  for (const GameNode& node : tree.nodes()) {
    const int eqj = eq.joint[node.id];
    for (int i = 0; i < tree.num_agents(); ++i) {
      const double star = step_level ? node.safety(eqj, i)
                                     : tree.normalized_safety(node.depth, eq.sums[node.id][i]);
      const double thr = std::min(star, eq.gammas[i]);
      for (int a = 0; a < node.num_actions(i); ++a) {
        const double v =
            step_level ? node.safety(node.with_action(eqj, i, a), i)
                       : tree.normalized_safety(node.depth, deviation_sums(tree, eq, node, i, a));
        if (v >= thr - kValueTol) s.admissible[node.id][i].push_back(a);
      }
    }
  }
  add_fallback_flags(eq, s);
  return s;
}

SolutionSet mspe_set(const GameTree& tree, const SpneResult& eq) {
  const bool lhs_safety = tree.config().flags.mspe_lhs_safety;
  SolutionSet s = empty_solution(tree, "mspe");
  std::set<int> flagged;
  for (std::size_t id = 0; id < eq.fallback.size(); ++id) {
    if (eq.fallback[id]) flagged.insert(static_cast<int>(id));
  }
  for (const GameNode& node : tree.nodes()) {
    for (int i = 0; i < tree.num_agents(); ++i) {
      const int star = node.action_of(eq.joint[node.id], i);
      const Maneuver m = node.maneuver(i, star);
      const int na = node.num_actions(i);
      std::vector<double> value(na), lhs(na);
      double rhs = -kInf;
      for (int a = 0; a < na; ++a) {
        const ValueSums vs = deviation_sums(tree, eq, node, i, a);
        value[a] = tree.score(node.depth, vs, eq.gammas[i]);
        lhs[a] = lhs_safety ? tree.normalized_safety(node.depth, vs) : value[a];
        if (node.maneuver(i, a) != m) rhs = std::max(rhs, value[a]);
      }
      auto& out = s.admissible[node.id][i];
      for (int a = 0; a < na; ++a) {
        if (node.maneuver(i, a) == m && lhs[a] > rhs + kValueTol) out.push_back(a);
      }
      if (out.empty()) {
        out.push_back(star);
        flagged.insert(node.id);
      }
    }
  }
  s.flagged.assign(flagged.begin(), flagged.end());
  return s;
}

std::vector<double> logit(std::span<const double> values, double lambda) {
  if (!(lambda > 0.0)) throw Error(ErrorKind::kPrecondition, "logit precision must be > 0");
  if (values.empty()) return {};
  const double top = *std::max_element(values.begin(), values.end());
  std::vector<double> p(values.size());
  double z = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    p[k] = std::exp(lambda * (values[k] - top));
    z += p[k];
  }
  for (double& x : p) x /= z;
  return p;
}

SolutionSet qlk_response(const GameTree& tree, double lambda,
                         std::span<const double> gammas) {
  const int n = tree.num_agents();
  if (static_cast<int>(gammas.size()) != n) {
    throw Error(ErrorKind::kPrecondition, "one type per agent required");
  }
  SolutionSet s = empty_solution(tree, "qlk");
  s.probabilities.assign(tree.size(), std::vector<std::vector<double>>(n));
  std::vector<std::vector<int>> level0(n);
  std::vector<int> acts(n);
  for (int i = 0; i < n; ++i) {
    std::vector<ValueSums> expected(tree.size());
    for (int id : tree.bottom_up()) {
      const GameNode& node = tree.node(id);
      double weight = 1.0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        level0[j] = maxmax_argmax(node, j, gammas[j]);
        weight /= static_cast<double>(level0[j].size());
      }
      const int na = node.num_actions(i);
      std::vector<ValueSums> ev(na);
      std::vector<double> score(na);
      for (int a = 0; a < na; ++a) {
        acts[i] = a;
        for (ComboIter it(level0, i); !it.done(); it.next()) {
          it.fill(acts);
          const int jt = node.encode(acts);
          const int child = node.children[jt];
          ev[a] += tree.joint_sums(node, jt, i, gammas[i],
                                   child >= 0 ? &expected[child] : nullptr) * weight;
        }
        score[a] = tree.score(node.depth, ev[a], gammas[i]);
      }
      const std::vector<double> p = logit(score, lambda);
      ValueSums v;
      for (int a = 0; a < na; ++a) {
        v += ev[a] * p[a];
        if (p[a] > 0.0) s.admissible[id][i].push_back(a);
      }
      expected[id] = v;
      s.probabilities[id][i] = p;
    }
  }
  return s;
}

SolverCache::Equilibrium& SolverCache::entry(std::span<const double> gammas) {
  std::vector<double> key(gammas.begin(), gammas.end());
  auto it = eq_.find(key);
  if (it == eq_.end()) {
    it = eq_.emplace(std::move(key), Equilibrium{spne(*tree_, gammas), {}, {}}).first;
  }
  return it->second;
}

const SpneResult& SolverCache::equilibrium(std::span<const double> gammas) {
  return entry(gammas).eq;
}

const SolutionSet& SolverCache::sspe(std::span<const double> gammas) {
  Equilibrium& e = entry(gammas);
  if (!e.sspe) e.sspe = sspe_set(*tree_, e.eq);
  return *e.sspe;
}

const SolutionSet& SolverCache::mspe(std::span<const double> gammas) {
  Equilibrium& e = entry(gammas);
  if (!e.mspe) e.mspe = mspe_set(*tree_, e.eq);
  return *e.mspe;
}

const Level1Plan& SolverCache::level1(int from, int agent, double gamma,
                                      const std::vector<BeliefL1>& beliefs) {
  std::vector<double> key = {static_cast<double>(from), static_cast<double>(agent), gamma};
  for (const BeliefL1& b : beliefs) {
    for (const Interval& iv : {b.ac, b.nac}) {
      key.insert(key.end(), {iv.lo, iv.hi, iv.lo_closed ? 1.0 : 0.0, iv.hi_closed ? 1.0 : 0.0});
    }
  }
  auto it = l1_.find(key);
  if (it == l1_.end()) {
    it = l1_.emplace(std::move(key), level1_plan(*tree_, from, agent, gamma, beliefs)).first;
  }
  return it->second;
}

SolverCache& SolverPool::of(const GameTree& tree) {
  auto& slot = caches_[&tree];
  if (!slot) slot = std::make_unique<SolverCache>(tree);
  return *slot;
}

std::string SolutionSet::to_json() const {
  nlohmann::ordered_json root = nlohmann::ordered_json::object();
  for (std::size_t id = 0; id < admissible.size(); ++id) {
    nlohmann::ordered_json per_agent = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < admissible[id].size(); ++i) {
      if (probabilistic()) {
        nlohmann::ordered_json probs = nlohmann::ordered_json::object();
        const auto& p = probabilities[id][i];
        for (std::size_t a = 0; a < p.size(); ++a) probs[std::to_string(a)] = p[a];
        per_agent[std::to_string(i)] = probs;
      } else {
        per_agent[std::to_string(i)] = admissible[id][i];
      }
    }
    root[std::to_string(id)] = per_agent;
  }
  return root.dump(2);
}

}  // namespace cogdrive

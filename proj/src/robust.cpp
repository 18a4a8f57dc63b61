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

#include "cogdrive/robust.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <sstream>

#include "cogdrive/errors.hpp"
#include "cogdrive/nonstrategic.hpp"
#include "json.hpp"

namespace cogdrive {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Calls f(picks) for every element of the product of `lists`; the slot at
// `skip` is left untouched.
template <typename T, typename F>
void for_each_product(const std::vector<std::vector<T>>& lists, int skip,
                      std::vector<T>& picks, F&& f) {
  const int n = static_cast<int>(lists.size());
  std::vector<std::size_t> pos(n, 0);
  for (int i = 0; i < n; ++i) {
    if (i != skip && lists[i].empty()) return;
  }
  while (true) {
    for (int i = 0; i < n; ++i) {
      if (i != skip) picks[i] = lists[i][pos[i]];
    }
    f(picks);
    int i = n - 1;
    for (; i >= 0; --i) {
      if (i == skip) continue;
      if (++pos[i] < lists[i].size()) break;
      pos[i] = 0;
    }
    if (i < 0) return;
  }
}

std::vector<char> subtree(const GameTree& tree, int from) {
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

std::vector<double> hypothesis_types(const GameTree& tree, int observed, double gamma,
                                     const RobustContext& ctx) {
  std::vector<double> types(tree.num_agents(), gamma);
  types[ctx.robust_agent] = ctx.gamma;
  types[observed] = gamma;
  return types;
}

// Predictions for one node, or for every node of the subtree when `all`.
std::vector<std::vector<int>> predict(SolverPool& pool, const GameTree& tree, int node,
                                      const History& prefix, int observed,
                                      const AugmentedType& beta, const RobustContext& ctx,
                                      bool all) {
  const GameConfig& cfg = tree.config();
  std::vector<std::vector<int>> out(tree.size());
  const std::vector<char> mask = all ? subtree(tree, node) : std::vector<char>{};
  auto want = [&](int x) { return all ? mask[x] != 0 : x == node; };
  switch (beta.model) {
    case OpponentModel::kAC:
    case OpponentModel::kNAC: {
      const AutomatonKind k =
          beta.model == OpponentModel::kAC ? AutomatonKind::kAC : AutomatonKind::kNAC;
      for (int x = 0; x < tree.size(); ++x) {
        if (want(x)) out[x] = step_automaton(k, beta.gamma, tree.node(x), observed, cfg).support;
      }
      break;
    }
    case OpponentModel::kLevel1: {
      const auto beliefs = level1_beliefs(prefix, observed, tree.num_agents(), cfg);
      const Level1Plan& plan = pool.of(tree).level1(node, observed, beta.gamma, beliefs);
      for (int x = 0; x < tree.size(); ++x) {
        if (want(x)) out[x] = plan.ties[x];
      }
      break;
    }
    case OpponentModel::kSSPE:
    case OpponentModel::kMSPE: {
      const auto types = hypothesis_types(tree, observed, beta.gamma, ctx);
      SolverCache& cache = pool.of(tree);
      const SolutionSet& sol =
          beta.model == OpponentModel::kSSPE ? cache.sspe(types) : cache.mspe(types);
      for (int x = 0; x < tree.size(); ++x) {
        if (want(x)) out[x] = sol.admissible[x][observed];
      }
      break;
    }
  }
  return out;
}

}  // namespace

const char* OpponentModelName(OpponentModel m) {
  switch (m) {
    case OpponentModel::kAC: return "AC";
    case OpponentModel::kNAC: return "NAC";
    case OpponentModel::kLevel1: return "level1";
    case OpponentModel::kSSPE: return "SSPE";
    case OpponentModel::kMSPE: return "MSPE";
  }
  return "?";
}

std::string AugmentedType::label() const {
  std::ostringstream os;
  os << OpponentModelName(model) << ':' << gamma;
  return os.str();
}

BeliefSet expand_types(std::span<const double> grid) {
  if (grid.empty()) throw Error(ErrorKind::kPrecondition, "empty type grid");
  BeliefSet out;
  for (OpponentModel m : {OpponentModel::kAC, OpponentModel::kNAC, OpponentModel::kLevel1,
                          OpponentModel::kSSPE, OpponentModel::kMSPE}) {
    for (double g : grid) out.push_back({m, g});
  }
  return out;
}

std::vector<std::vector<int>> predicted_sets(SolverPool& pool, const GameTree& tree,
                                             int node, const History& prefix,
                                             int observed, const AugmentedType& beta,
                                             const RobustContext& ctx) {
  return predict(pool, tree, node, prefix, observed, beta, ctx, true);
}

bool consistent(SolverPool& pool, const History& history, int observed,
                const AugmentedType& beta, const RobustContext& ctx) {
  int misses = 0;
  for (std::size_t k = 0; k < history.size(); ++k) {
    const HistoryStep& step = history[k];
    const History prefix(history.begin(), history.begin() + static_cast<long>(k));
    const auto sets =
        predict(pool, *step.tree, step.node, prefix, observed, beta, ctx, false);
    const std::vector<int>& set = sets[step.node];
    const int act = step.actions.empty() ? -1 : step.actions[observed];
    bool ok = false;
    if (act >= 0) {
      ok = std::binary_search(set.begin(), set.end(), act);
    } else {
      const GameNode& n = step.game_node();
      ok = std::any_of(set.begin(), set.end(), [&](int a) {
        return n.maneuver(observed, a) == step.maneuvers[observed];
      });
    }
    if (!ok && ++misses > ctx.slack) return false;
  }
  return true;
}

BeliefSet filter_consistent(SolverPool& pool, const History& history, int observed,
                            const RobustContext& ctx, std::span<const double> grid) {
  BeliefSet out;
  for (const AugmentedType& b : expand_types(grid)) {
    if (consistent(pool, history, observed, b, ctx)) out.push_back(b);
  }
  return out;
}

RobustDecision robust_response(SolverPool& pool, const GameTree& tree, int node,
                               const History& prefix, const RobustContext& ctx) {
  const int n = tree.num_agents();
  const int r = ctx.robust_agent;
  const GameConfig& cfg = tree.config();
  const GameNode& root = tree.node(node);
  if (root.num_actions(r) == 0) {
    throw Error(ErrorKind::kStuck, "robust agent has no trajectory");
  }
  RobustDecision dec;
  dec.beliefs.assign(n, {});
  dec.fallback.assign(n, 0);
  // hyp[j][b][x]: predicted set of opponent j under its b-th hypothesis.
  std::vector<std::vector<std::vector<std::vector<int>>>> hyp(n);
  for (int j = 0; j < n; ++j) {
    if (j == r) continue;
    dec.beliefs[j] = filter_consistent(pool, prefix, j, ctx, cfg.type_grid);
    if (dec.beliefs[j].empty()) {
      dec.fallback[j] = 1;
      continue;
    }
    for (const AugmentedType& b : dec.beliefs[j]) {
      hyp[j].push_back(predicted_sets(pool, tree, node, prefix, j, b, ctx));
    }
  }

  const std::vector<char> mask = subtree(tree, node);
  std::vector<ValueSums> sums(tree.size());
  std::vector<int> picks(n);
  for (int x : tree.bottom_up()) {
    if (!mask[x]) continue;
    const GameNode& nd = tree.node(x);
    const int J = nd.num_joints();
    std::vector<ValueSums> vs(J);
    std::vector<double> val(J);
    for (int jt = 0; jt < J; ++jt) {
      const int child = nd.children[jt];
      vs[jt] = tree.joint_sums(nd, jt, r, ctx.gamma, child >= 0 ? &sums[child] : nullptr);
      val[jt] = tree.score(nd.depth, vs[jt], ctx.gamma);
    }
    // Distinct predicted sets per opponent at this node.
    std::vector<std::vector<std::vector<int>>> distinct(n);
    std::vector<std::map<std::vector<int>, std::vector<std::string>>> labels(n);
    std::vector<std::vector<int>> unions(n);
    for (int j = 0; j < n; ++j) {
      if (j == r) continue;
      if (dec.fallback[j]) {
        for (int o = 0; o < nd.num_actions(j); ++o) {
          distinct[j].push_back({o});
          labels[j][{o}].push_back("maxmin");
        }
      } else {
        for (std::size_t b = 0; b < hyp[j].size(); ++b) {
          labels[j][hyp[j][b][x]].push_back(dec.beliefs[j][b].label());
        }
        for (const auto& [set, lab] : labels[j]) distinct[j].push_back(set);
      }
      std::vector<int> u;
      for (const auto& set : distinct[j]) u.insert(u.end(), set.begin(), set.end());
      std::sort(u.begin(), u.end());
      u.erase(std::unique(u.begin(), u.end()), u.end());
      unions[j] = std::move(u);
    }

    const int own = nd.num_actions(r);
    std::vector<double> score(own, kInf);
    std::vector<int> worst_joint(own, -1);
    // Enumerate combinations of distinct sets by index.
    std::vector<std::vector<int>> idx_lists(n);
    for (int j = 0; j < n; ++j) {
      if (j == r) continue;
      for (std::size_t k = 0; k < distinct[j].size(); ++k) idx_lists[j].push_back(static_cast<int>(k));
    }
    std::vector<int> idx(n);
    const bool at_root = x == node;
    for_each_product(idx_lists, r, idx, [&](const std::vector<int>& cidx) {
      std::vector<std::vector<int>> sets(n);
      for (int j = 0; j < n; ++j) {
        if (j != r) sets[j] = distinct[j][cidx[j]];
      }
      RobustDecision::Entry entry;
      for (int a = 0; a < own; ++a) {
        double inner = -kInf;
        int arg = -1;
        picks[r] = a;
        for_each_product(sets, r, picks, [&](const std::vector<int>& p) {
          const int jt = nd.encode(p);
          if (val[jt] > inner + kTieEps) {
            inner = val[jt];
            arg = jt;
          }
        });
        if (inner < score[a] - kTieEps) {
          score[a] = inner;
          worst_joint[a] = arg;
        }
        if (at_root) entry.value.push_back(inner);
      }
      if (at_root) {
        entry.hypotheses.assign(n, {});
        for (int j = 0; j < n; ++j) {
          if (j != r) entry.hypotheses[j] = labels[j][sets[j]];
        }
        dec.breakdown.push_back(std::move(entry));
      }
    });
    const double top = *std::max_element(score.begin(), score.end());
    int choice = 0;
    while (score[choice] < top - kTieEps) ++choice;
    sums[x] = vs[worst_joint[choice]];
    if (at_root) {
      dec.action = choice;
      dec.score = score;
      dec.maxmin.assign(own, kInf);
      for (int a = 0; a < own; ++a) {
        picks[r] = a;
        for_each_product(unions, r, picks, [&](const std::vector<int>& p) {
          dec.maxmin[a] = std::min(dec.maxmin[a], val[nd.encode(p)]);
        });
      }
    }
  }
  return dec;
}

std::string to_json(const BeliefSet& beliefs) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& b : beliefs) {
    arr.push_back({{"model", OpponentModelName(b.model)}, {"gamma", b.gamma}});
  }
  return arr.dump();
}

std::string RobustDecision::to_json() const {
  nlohmann::ordered_json j;
  j["action"] = action;
  j["score"] = score;
  j["maxmin"] = maxmin;
  nlohmann::ordered_json bel = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < beliefs.size(); ++i) {
    nlohmann::ordered_json labels = nlohmann::ordered_json::array();
    for (const auto& b : beliefs[i]) labels.push_back(b.label());
    bel.push_back({{"agent", i}, {"fallback", fallback[i] != 0}, {"types", labels}});
  }
  j["beliefs"] = bel;
  nlohmann::ordered_json br = nlohmann::ordered_json::array();
  for (const auto& e : breakdown) {
    br.push_back({{"hypotheses", e.hypotheses}, {"value", e.value}});
  }
  j["breakdown"] = br;
  return j.dump();
}

}  // namespace cogdrive

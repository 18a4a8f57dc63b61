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

#include <cstdio>
#include <sstream>

#include "json.hpp"

#include "cogdrive/errors.hpp"
#include "cogdrive/eval.hpp"
#include "cogdrive/nonstrategic.hpp"
#include "cogdrive/robust.hpp"

namespace cogdrive {

SolutionSet solve_model(const GameTree& tree, ModelId model, std::span<const double> types,
                        double lambda, bool allow_fallback) {
  const int n = tree.num_agents();
  if (static_cast<int>(types.size()) != n) {
    throw Error(ErrorKind::kConfig, "expected " + std::to_string(n) + " types, got " +
                                        std::to_string(types.size()));
  }
  for (double g : types) AgentType::checked(g);
  SolverPool pool;
  SolverCache& cache = pool.of(tree);
  if (!allow_fallback &&
      (model == ModelId::kSSPE || model == ModelId::kMSPE || model == ModelId::kRobust)) {
    spne(tree, types, false);
  }
  switch (model) {
    case ModelId::kSSPE: return cache.sspe(types);
    case ModelId::kMSPE: return cache.mspe(types);
    case ModelId::kQLk: return qlk_response(tree, lambda, types);
    default: break;
  }
  SolutionSet sol;
  sol.model = ModelIdName(model);
  sol.admissible.assign(tree.size(), std::vector<std::vector<int>>(n));
  const GameConfig& cfg = tree.config();
  for (const GameNode& node : tree.nodes()) {
    const History prefix = tree_history(tree, node.id);
    for (int i = 0; i < n; ++i) {
      auto& out = sol.admissible[node.id][i];
      const double g = types[i];
      switch (model) {
        case ModelId::kAC:
          out = step_automaton(AutomatonKind::kAC, g, node, i, cfg).support;
          break;
        case ModelId::kNAC:
          out = step_automaton(AutomatonKind::kNAC, g, node, i, cfg).support;
          break;
        case ModelId::kMaxmax:
          out = maxmax_argmax(node, i, g);
          break;
        case ModelId::kLevel1: {
          const auto beliefs = level1_beliefs(prefix, i, n, cfg);
          out = cache.level1(node.id, i, g, beliefs).ties[node.id];
          break;
        }
        case ModelId::kRobust: {
          const RobustContext ctx{i, g, cfg.flags.robust_slack};
          out = {robust_response(pool, tree, node.id, prefix, ctx).action};
          break;
        }
        default:
          break;
      }
    }
  }
  return sol;
}

std::string solution_json(const GameTree& tree, const SolutionSet& sol,
                          std::span<const double> types) {
  using ojson = nlohmann::ordered_json;
  ojson root;
  root["model"] = sol.model;
  root["types"] = std::vector<double>(types.begin(), types.end());
  root["agents"] = tree.num_agents();
  root["stages"] = tree.stages();
  ojson nodes = ojson::array();
  for (const GameNode& node : tree.nodes()) {
    ojson e;
    e["node"] = node.id;
    e["depth"] = node.depth;
    ojson hist = ojson::array();
    for (const HistoryStep& step : tree_history(tree, node.id)) {
      ojson h;
      h["actions"] = step.actions;
      std::vector<std::string> ms;
      for (Maneuver m : step.maneuvers) ms.emplace_back(ManeuverName(m));
      h["maneuvers"] = ms;
      hist.push_back(h);
    }
    e["history"] = hist;
    ojson agents = ojson::array();
    for (int i = 0; i < node.num_agents(); ++i) {
      ojson a;
      std::vector<std::string> ms;
      for (int k = 0; k < node.num_actions(i); ++k) ms.emplace_back(ManeuverName(node.maneuver(i, k)));
      a["maneuvers"] = ms;
      a["admissible"] = sol.admissible[node.id][i];
      if (sol.probabilistic()) a["probabilities"] = sol.probabilities[node.id][i];
      agents.push_back(a);
    }
    e["agents"] = agents;
    nodes.push_back(e);
  }
  root["nodes"] = nodes;
  root["flagged"] = sol.flagged;
  return root.dump(2) + "\n";
}

std::string solution_table(const GameTree& tree, const SolutionSet& sol) {
  std::ostringstream os;
  os << "node depth agent admissible\n";
  for (const GameNode& node : tree.nodes()) {
    for (int i = 0; i < node.num_agents(); ++i) {
      os << node.id << ' ' << node.depth << ' ' << i << ' ';
      const auto& set = sol.admissible[node.id][i];
      for (std::size_t k = 0; k < set.size(); ++k) {
        os << (k ? "," : "") << set[k] << ':' << ManeuverName(node.maneuver(i, set[k]));
      }
      if (sol.probabilistic()) {
        os << " p=";
        const auto& p = sol.probabilities[node.id][i];
        for (std::size_t k = 0; k < p.size(); ++k) {
          char buf[32];
          std::snprintf(buf, sizeof buf, "%s%.4f", k ? "," : "", p[k]);
          os << buf;
        }
      }
      os << '\n';
    }
  }
  return os.str();
}

}  // namespace cogdrive

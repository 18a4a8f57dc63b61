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

#ifndef COGDRIVE_ROBUST_HPP_
#define COGDRIVE_ROBUST_HPP_

#include <span>
#include <string>
#include <vector>

#include "cogdrive/game_core.hpp"
#include "cogdrive/strategic.hpp"

namespace cogdrive {

enum class OpponentModel { kAC, kNAC, kLevel1, kSSPE, kMSPE };

const char* OpponentModelName(OpponentModel m);

struct AugmentedType {
  OpponentModel model = OpponentModel::kAC;
  double gamma = 0.0;

  std::string label() const;
  bool operator==(const AugmentedType&) const = default;
};

using BeliefSet = std::vector<AugmentedType>;

// Models outer, grid inner, in declaration order.
BeliefSet expand_types(std::span<const double> grid);

// Who is reasoning and with what aspiration; the remaining fields tune the
// filter.
struct RobustContext {
  int robust_agent = 0;
  double gamma = 0.0;
  int slack = 0;  // tolerated inconsistent stages
};

// Actions `observed` is predicted to take at every node of the subtree at
// `node`, if it has augmented type `beta`. `prefix` is the history that led
// to `node`. Entries outside the subtree are empty.
std::vector<std::vector<int>> predicted_sets(SolverPool& pool, const GameTree& tree,
                                             int node, const History& prefix,
                                             int observed, const AugmentedType& beta,
                                             const RobustContext& ctx);

bool consistent(SolverPool& pool, const History& history, int observed,
                const AugmentedType& beta, const RobustContext& ctx);

BeliefSet filter_consistent(SolverPool& pool, const History& history, int observed,
                            const RobustContext& ctx, std::span<const double> grid);

struct RobustDecision {
  int action = 0;
  std::vector<double> score;   // per own action at the decision node
  std::vector<double> maxmin;  // per own action, over the union of predictions
  std::vector<BeliefSet> beliefs;  // per agent; own slot empty
  std::vector<char> fallback;      // per agent: empty belief, maxmin used
  // Per distinct combination of root predictions: contributing hypotheses and
  // the inner max for every own action.
  struct Entry {
    std::vector<std::vector<std::string>> hypotheses;  // per opponent
    std::vector<double> value;
  };
  std::vector<Entry> breakdown;

  std::string to_json() const;
};

// Robust choice of `ctx.robust_agent` at `node`, with `prefix` the history
// that led there.
RobustDecision robust_response(SolverPool& pool, const GameTree& tree, int node,
                               const History& prefix, const RobustContext& ctx);

std::string to_json(const BeliefSet& beliefs);

}  // namespace cogdrive

#endif  // COGDRIVE_ROBUST_HPP_

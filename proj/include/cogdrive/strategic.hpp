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

#ifndef COGDRIVE_STRATEGIC_HPP_
#define COGDRIVE_STRATEGIC_HPP_

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cogdrive/game_core.hpp"
#include "cogdrive/nonstrategic.hpp"

namespace cogdrive {

// A level-1 agent's belief about one level-0 opponent's automaton types.
struct BeliefL1 {
  Interval ac;
  Interval nac;

  bool grid_empty(std::span<const double> grid) const;
  bool operator==(const BeliefL1&) const = default;
};

BeliefL1 update_consistent_belief(const History& history, int observed,
                                  const GameConfig& cfg);

// Beliefs of `agent` about every other agent (its own slot is left default).
std::vector<BeliefL1> beliefs_about_others(const History& history, int agent,
                                           int num_agents, const GameConfig& cfg);

// Beliefs used by a level-1 agent: as above, except that an opponent whose
// belief holds no grid type keeps the last prefix belief that did.
std::vector<BeliefL1> level1_beliefs(const History& history, int agent, int num_agents,
                                     const GameConfig& cfg);

// Union of automaton supports over the grid types inside each interval.
// Throws Error(kEmptyBelief) when neither interval holds a grid type.
std::vector<int> level0_consistent_actions(const GameNode& node, int agent,
                                           const BeliefL1& belief,
                                           const GameConfig& cfg);

// Selection over an own x opponent value matrix: the best pair, or the best
// row mean when `expectation` is set. Ties go to the lowest (row, column).
struct PairChoice {
  int own = 0;
  int opp = 0;  // -1 in expectation mode
  double value = 0.0;
  std::vector<int> ties;  // rows within kTieEps of the best
};
PairChoice best_response_pair(const Eigen::ArrayXXd& values, bool expectation);

// Level-1 plan for one agent with beliefs frozen over the subtree at `from`.
struct Level1Plan {
  int from = 0;
  std::vector<std::vector<int>> ties;  // per node; empty outside the subtree
  std::vector<ValueSums> sums;         // per node, own continuation sums
  std::vector<char> reached;

  int choice(int node) const { return ties[node].front(); }
};

Level1Plan level1_plan(const GameTree& tree, int from, int agent, double gamma,
                       const std::vector<BeliefL1>& beliefs);

// Level-1 choice at `node` with beliefs inferred from the history up to it.
int level1_response(const GameTree& tree, int node, int agent, double gamma);

struct SpneResult {
  std::vector<double> gammas;
  std::vector<int> joint;                     // per node
  std::vector<std::vector<ValueSums>> sums;   // per node, per agent
  std::vector<char> fallback;                 // no pure equilibrium at node

  bool any_fallback() const;
};

// Backward induction over stage matrices of aggregated continuation values.
// Without `allow_fallback` a stage without a pure equilibrium throws
// Error(kNoPureEquilibrium); with it, the cell of least maximal regret is
// used and flagged.
SpneResult spne(const GameTree& tree, std::span<const double> gammas,
                bool allow_fallback = true);

struct SolutionSet {
  std::string model;
  // Per node, per agent, ascending admissible action ids.
  std::vector<std::vector<std::vector<int>>> admissible;
  // Per node, per agent, per action; only filled by probabilistic models.
  std::vector<std::vector<std::vector<double>>> probabilities;
  std::vector<int> flagged;  // nodes where a fallback was taken

  bool probabilistic() const { return !probabilities.empty(); }
  std::string to_json() const;
};

SolutionSet spne_set(const GameTree& tree, const SpneResult& eq);
SolutionSet sspe_set(const GameTree& tree, const SpneResult& eq);
SolutionSet mspe_set(const GameTree& tree, const SpneResult& eq);

std::vector<double> logit(std::span<const double> values, double lambda);

// Each agent as level-1 against maxmax level-0 opponents, solved backward.
SolutionSet qlk_response(const GameTree& tree, double lambda,
                         std::span<const double> gammas);

// Memoized solutions on one tree.
class SolverCache {
 public:
  explicit SolverCache(const GameTree& tree) : tree_(&tree) {}

  const GameTree& tree() const { return *tree_; }
  const SpneResult& equilibrium(std::span<const double> gammas);
  const SolutionSet& sspe(std::span<const double> gammas);
  const SolutionSet& mspe(std::span<const double> gammas);
  const Level1Plan& level1(int from, int agent, double gamma,
                           const std::vector<BeliefL1>& beliefs);

 private:
  struct Equilibrium {
    SpneResult eq;
    std::optional<SolutionSet> sspe;
    std::optional<SolutionSet> mspe;
  };
  Equilibrium& entry(std::span<const double> gammas);

  const GameTree* tree_;
  std::map<std::vector<double>, Equilibrium> eq_;
  std::map<std::vector<double>, Level1Plan> l1_;
};

// Caches keyed by tree identity, for histories that span several trees.
class SolverPool {
 public:
  SolverCache& of(const GameTree& tree);

 private:
  std::map<const GameTree*, std::unique_ptr<SolverCache>> caches_;
};

}  // namespace cogdrive

#endif  // COGDRIVE_STRATEGIC_HPP_

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

#ifndef COGDRIVE_ORACLE_HPP_
#define COGDRIVE_ORACLE_HPP_

#include <functional>
#include <span>
#include <vector>

#include "cogdrive/game_core.hpp"

// Brute-force references built only on the utility layer. Nothing here calls
// the solvers; they are compared against these results instead.
namespace cogdrive::oracle {

// Joint action id per node, defined at every node.
using StrategyProfile = std::vector<int>;
// Per node, per agent, ascending action ids.
using ActionSets = std::vector<std::vector<std::vector<int>>>;

inline constexpr long long kMaxProfiles = 10'000'000;
inline constexpr double kTolerance = 1e-9;

// Saturates at kMaxProfiles + 1.
long long profile_count(const GameTree& tree);

// Calls `visit` once per pure profile; throws Error(kTooLarge) beyond
// kMaxProfiles.
void enumerate_profiles(const GameTree& tree,
                        const std::function<void(const StrategyProfile&)>& visit);

bool is_total(const GameTree& tree, const StrategyProfile& profile);

// No agent gains from changing its own action at any single node.
bool is_subgame_perfect(const GameTree& tree, const StrategyProfile& profile,
                        std::span<const double> gammas);

std::vector<StrategyProfile> oracle_spne(const GameTree& tree,
                                         std::span<const double> gammas);

ActionSets oracle_sspe(const GameTree& tree, const StrategyProfile& eq,
                       std::span<const double> gammas);
ActionSets oracle_mspe(const GameTree& tree, const StrategyProfile& eq,
                       std::span<const double> gammas);

enum class Kind { kAC, kNAC };

// Automaton support read straight off the two preference conditions.
std::vector<int> oracle_automaton(Kind kind, double gamma, const GameNode& node,
                                  int agent, const GameConfig& cfg);

// Level-1 argmax set of `agent` at `at`, with beliefs taken from the tree
// path to `belief_node` (an ancestor of `at`, or `at` itself). Max-pair mode
// only.
std::vector<int> oracle_level1(const GameTree& tree, int belief_node, int at, int agent,
                               double gamma);

enum class Hypothesis { kAC, kNAC, kLevel1, kSSPE, kMSPE };

struct RobustOracleResult {
  int action = 0;
  std::vector<double> score;
  std::vector<int> surviving;  // per opponent, number of hypotheses kept
};

// Supplies an equilibrium profile for a type vector; the oracle checks it
// with is_subgame_perfect before use.
using EquilibriumFn = std::function<StrategyProfile(std::span<const double>)>;

// Robust choice of `agent` (two-agent trees) at `node`, history from the
// tree path.
RobustOracleResult oracle_robust(const GameTree& tree, int node, int agent, double gamma,
                                 const EquilibriumFn& equilibrium, int slack = 0);

enum class Concept { kSSPE, kMSPE, kL1, kAC, kNAC, kRobust };

struct Instance {
  const GameTree* tree = nullptr;
  int node = 0;
  int agent = 0;
  std::vector<double> gammas;  // one per agent
  StrategyProfile equilibrium;
  EquilibriumFn equilibrium_fn;
};

// Dispatches to the functions above; the result lists the admissible or
// chosen actions of `instance.agent` at `instance.node`.
std::vector<int> oracle_filter(Concept which, const Instance& instance);

}  // namespace cogdrive::oracle

#endif  // COGDRIVE_ORACLE_HPP_

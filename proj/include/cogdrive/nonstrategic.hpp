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

#ifndef COGDRIVE_NONSTRATEGIC_HPP_
#define COGDRIVE_NONSTRATEGIC_HPP_

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "cogdrive/game_core.hpp"

namespace cogdrive {

enum class AutomatonKind { kAC, kNAC };
enum class AutomatonState { kW, kP };

const char* AutomatonKindName(AutomatonKind k);
// Accepts "AC"/"NAC" in any case; throws Error(kConfig) otherwise.
AutomatonKind ParseAutomatonKind(const std::string& s);

// Ordered (stage, kind) entries; the last entry at or before a stage wins.
struct SwitchScript {
  std::vector<std::pair<int, AutomatonKind>> entries;

  std::optional<AutomatonKind> at(int stage) const;
};

struct Level0Agent {
  AutomatonKind kind = AutomatonKind::kAC;
  AgentType gamma;
  AutomatonState state = AutomatonState::kW;
  SwitchScript switch_policy;

  void apply_switch(int stage);
};

// Best worst-case step safety over the agent's trajectories of one maneuver,
// or nullopt when the node offers none.
std::optional<double> max_step_safety(const GameNode& node, int agent, Maneuver m);

bool has_maneuver(const GameNode& node, int agent, Maneuver m);

bool preference_condition(AutomatonKind kind, const GameNode& node, int agent,
                          double gamma, const GameConfig& cfg);

struct AutomatonStep {
  AutomatonState state = AutomatonState::kW;
  std::vector<int> support;  // action ids, ascending
};

AutomatonStep step_automaton(AutomatonKind kind, double gamma, const GameNode& node,
                             int agent, const GameConfig& cfg);
// Applies the agent's switch script for `stage`, evaluates, and records the
// resulting state on the agent.
AutomatonStep step_automaton(Level0Agent& agent, int stage, const GameNode& node,
                             int index, const GameConfig& cfg);

using ActionSequence = std::vector<int>;

std::vector<ActionSequence> trace(AutomatonKind kind, double gamma,
                                  std::span<const GameNode* const> nodes, int agent,
                                  const GameConfig& cfg);

// Membership of the observed agent's play in the trace. Steps with a known
// action id are matched on the id, others on the maneuver.
bool in_trace(AutomatonKind kind, double gamma, const History& history, int agent,
              const GameConfig& cfg);

// Half-open by default: [lo, hi). Closed flags select the bracket at each end.
struct Interval {
  double lo = -1.0;
  double hi = 1.0;
  bool lo_closed = true;
  bool hi_closed = true;

  bool contains(double g) const;
  bool empty() const;
  std::vector<double> grid_members(std::span<const double> grid) const;
  bool operator==(const Interval&) const = default;
};

// Interval of automaton types consistent with the agent's observed maneuvers.
Interval consistent_interval(AutomatonKind kind, const History& history, int agent,
                             const GameConfig& cfg);

// Step-level maxmax: the own actions whose best step aggregate over all other
// agents' joint choices is maximal.
std::vector<int> maxmax_argmax(const GameNode& node, int agent, double gamma);
int maxmax_action(const GameNode& node, int agent, double gamma);

}  // namespace cogdrive

#endif  // COGDRIVE_NONSTRATEGIC_HPP_

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

#include "cogdrive/nonstrategic.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <string>

#include "cogdrive/errors.hpp"

namespace cogdrive {

const char* AutomatonKindName(AutomatonKind k) {
  return k == AutomatonKind::kAC ? "AC" : "NAC";
}

AutomatonKind ParseAutomatonKind(const std::string& s) {
  std::string u;
  for (char c : s) u.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  if (u == "AC") return AutomatonKind::kAC;
  if (u == "NAC") return AutomatonKind::kNAC;
  throw Error(ErrorKind::kConfig, "unknown automaton '" + s + "' (expected AC or NAC)");
}

std::optional<AutomatonKind> SwitchScript::at(int stage) const {
  std::optional<AutomatonKind> out;
  int best = std::numeric_limits<int>::min();
  for (const auto& [s, k] : entries) {
    if (s <= stage && s >= best) {
      best = s;
      out = k;
    }
  }
  return out;
}

void Level0Agent::apply_switch(int stage) {
  for (const auto& [s, k] : switch_policy.entries) {
    if (s == stage) kind = k;
  }
}

bool has_maneuver(const GameNode& node, int agent, Maneuver m) {
  for (int a = 0; a < node.num_actions(agent); ++a) {
    if (node.maneuver(agent, a) == m) return true;
  }
  return false;
}

std::optional<double> max_step_safety(const GameNode& node, int agent, Maneuver m) {
  std::optional<double> best;
  for (int a = 0; a < node.num_actions(agent); ++a) {
    if (node.maneuver(agent, a) != m) continue;
    const double s = node.worst_safety[agent][a];
    if (!best || s > *best) best = s;
  }
  return best;
}

bool preference_condition(AutomatonKind kind, const GameNode& node, int agent,
                          double gamma, const GameConfig& cfg) {
  if (kind == AutomatonKind::kAC) {
    const auto w = max_step_safety(node, agent, Maneuver::kWait);
    if (!w) return false;
    return cfg.flags.ac_condition_ge ? *w >= gamma : *w <= gamma;
  }
  const auto p = max_step_safety(node, agent, Maneuver::kProceed);
  if (!p) return false;
  return *p > gamma;
}

namespace {

std::vector<int> maneuver_set(const GameNode& node, int agent, Maneuver m,
                              std::optional<double> min_safety) {
  std::vector<int> out;
  for (int a = 0; a < node.num_actions(agent); ++a) {
    if (node.maneuver(agent, a) != m) continue;
    if (min_safety && node.worst_safety[agent][a] < *min_safety) continue;
    out.push_back(a);
  }
  return out;
}

AutomatonStep enter(const GameNode& node, int agent, Maneuver m, double gamma,
                    bool filtered) {
  AutomatonStep st;
  st.state = m == Maneuver::kWait ? AutomatonState::kW : AutomatonState::kP;
  if (filtered) st.support = maneuver_set(node, agent, m, gamma);
  if (st.support.empty()) st.support = maneuver_set(node, agent, m, std::nullopt);
  return st;
}

}  // namespace

AutomatonStep step_automaton(AutomatonKind kind, double gamma, const GameNode& node,
                             int agent, const GameConfig& cfg) {
  const bool has_w = has_maneuver(node, agent, Maneuver::kWait);
  const bool has_p = has_maneuver(node, agent, Maneuver::kProceed);
  if (!has_w && !has_p) {
    throw Error(ErrorKind::kStuck, "agent " + std::to_string(agent) + " has no trajectory");
  }
  // Preferred maneuver when the condition holds, and the alternative.
  const Maneuver pref = kind == AutomatonKind::kAC ? Maneuver::kWait : Maneuver::kProceed;
  const Maneuver alt = kind == AutomatonKind::kAC ? Maneuver::kProceed : Maneuver::kWait;
  if (preference_condition(kind, node, agent, gamma, cfg)) {
    return enter(node, agent, pref, gamma, true);
  }
  if (has_maneuver(node, agent, alt)) return enter(node, agent, alt, gamma, false);
  return enter(node, agent, pref, gamma, false);
}

AutomatonStep step_automaton(Level0Agent& agent, int stage, const GameNode& node,
                             int index, const GameConfig& cfg) {
  agent.apply_switch(stage);
  AutomatonStep st = step_automaton(agent.kind, agent.gamma.gamma, node, index, cfg);
  agent.state = st.state;
  return st;
}

std::vector<ActionSequence> trace(AutomatonKind kind, double gamma,
                                  std::span<const GameNode* const> nodes, int agent,
                                  const GameConfig& cfg) {
  std::vector<ActionSequence> out = {{}};
  for (const GameNode* node : nodes) {
    const AutomatonStep st = step_automaton(kind, gamma, *node, agent, cfg);
    std::vector<ActionSequence> next;
    next.reserve(out.size() * st.support.size());
    for (const auto& prefix : out) {
      for (int a : st.support) {
        next.push_back(prefix);
        next.back().push_back(a);
      }
    }
    out = std::move(next);
  }
  return out;
}

bool in_trace(AutomatonKind kind, double gamma, const History& history, int agent,
              const GameConfig& cfg) {
  for (const HistoryStep& step : history) {
    const GameNode& node = step.game_node();
    const AutomatonStep st = step_automaton(kind, gamma, node, agent, cfg);
    const int act = step.actions.empty() ? -1 : step.actions[agent];
    if (act >= 0) {
      if (!std::binary_search(st.support.begin(), st.support.end(), act)) return false;
    } else if (node.maneuver(agent, st.support.front()) != step.maneuvers[agent]) {
      return false;
    }
  }
  return true;
}

bool Interval::contains(double g) const {
  const bool above = lo_closed ? g >= lo : g > lo;
  const bool below = hi_closed ? g <= hi : g < hi;
  return above && below;
}

bool Interval::empty() const {
  if (lo > hi) return true;
  return lo == hi && !(lo_closed && hi_closed);
}

std::vector<double> Interval::grid_members(std::span<const double> grid) const {
  std::vector<double> out;
  for (double g : grid) {
    if (contains(g)) out.push_back(g);
  }
  return out;
}

namespace {

void raise_lo(Interval& iv, double v, bool closed) {
  if (v > iv.lo) {
    iv.lo = v;
    iv.lo_closed = closed;
  } else if (v == iv.lo) {
    iv.lo_closed = iv.lo_closed && closed;
  }
}

void lower_hi(Interval& iv, double v, bool closed) {
  if (v < iv.hi) {
    iv.hi = v;
    iv.hi_closed = closed;
  } else if (v == iv.hi) {
    iv.hi_closed = iv.hi_closed && closed;
  }
}

}  // namespace

Interval consistent_interval(AutomatonKind kind, const History& history, int agent,
                             const GameConfig& cfg) {
  Interval iv;
  for (const HistoryStep& step : history) {
    const GameNode& node = step.game_node();
    const Maneuver seen = step.maneuvers[agent];
    const auto w = max_step_safety(node, agent, Maneuver::kWait);
    const auto p = max_step_safety(node, agent, Maneuver::kProceed);
    if ((seen == Maneuver::kWait && !w) || (seen == Maneuver::kProceed && !p)) {
      // No automaton produces a maneuver the node does not offer.
      iv.lo = 2.0;
      continue;
    }
    if (!w || !p) continue;  // forced choice carries no information
    const bool waited = seen == Maneuver::kWait;
    if (kind == AutomatonKind::kAC) {
      if (!cfg.flags.ac_condition_ge) {
        waited ? raise_lo(iv, *w, true) : lower_hi(iv, *w, false);
      } else {
        waited ? lower_hi(iv, *w, true) : raise_lo(iv, *w, false);
      }
    } else {
      waited ? raise_lo(iv, *p, true) : lower_hi(iv, *p, false);
    }
  }
  return iv;
}

std::vector<int> maxmax_argmax(const GameNode& node, int agent, double gamma) {
  const int na = node.num_actions(agent);
  std::vector<double> best(na, -std::numeric_limits<double>::infinity());
  for (int j = 0; j < node.num_joints(); ++j) {
    const int a = node.action_of(j, agent);
    best[a] = std::max(best[a], aggregate(node.safety(j, agent), node.progress(j, agent), gamma));
  }
  const double top = *std::max_element(best.begin(), best.end());
  std::vector<int> out;
  for (int a = 0; a < na; ++a) {
    if (best[a] >= top - kTieEps) out.push_back(a);
  }
  return out;
}

int maxmax_action(const GameNode& node, int agent, double gamma) {
  if (node.num_actions(agent) == 0) {
    throw Error(ErrorKind::kStuck, "agent " + std::to_string(agent) + " has no trajectory");
  }
  return maxmax_argmax(node, agent, gamma).front();
}

}  // namespace cogdrive

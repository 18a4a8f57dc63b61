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

#ifndef COGDRIVE_GAME_CORE_HPP_
#define COGDRIVE_GAME_CORE_HPP_

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "cogdrive/kinematics.hpp"

namespace cogdrive {

// Safety aspiration level.
struct AgentType {
  double gamma = 0.0;

  // Throws Error(kPrecondition) outside [-1, 1].
  static AgentType checked(double gamma);
  bool operator==(const AgentType&) const = default;
};

// Values closer than this are treated as tied when selecting argmax sets.
inline constexpr double kTieEps = 1e-12;
// Tolerance for set-membership inequalities on normalized values.
inline constexpr double kValueTol = 1e-9;

inline const std::vector<double> kDefaultTypeGrid = {-1.0, -0.5, 0.0, 0.5, 1.0};

enum class Aggregation {
  kPerStep,  // aggregate each step, then discount
  kAtEnd,    // discount safety and progress separately, aggregate the result
};

// Switches for the places where the model admits more than one reading.
struct ModelFlags {
  // Accommodating automaton waits iff max wait safety >= gamma (instead of <=).
  bool ac_condition_ge = false;
  // Level-1 averages over consistent level-0 actions instead of taking the max.
  bool l1_expectation = false;
  // MSPE compares the candidate's safety (not combined utility) on the left.
  bool mspe_lhs_safety = false;
  // SSPE compares step safety at the node instead of horizon safety.
  bool sspe_step_level = false;
  // Robust filter tolerates up to this many inconsistent stages.
  int robust_slack = 0;
};

struct GameConfig {
  double horizon = 6.0;  // seconds
  double period = 2.0;   // seconds
  double delta = 0.9;
  double alpha = 1.5;         // 1/m
  double d0 = 2.0;            // m
  double progress_cap = 28.0; // m
  int continuation_stages = 3;
  std::vector<double> type_grid = kDefaultTypeGrid;
  Aggregation aggregation = Aggregation::kPerStep;
  KinematicLimits limits;
  int n_samples = 3;
  double dt = kSampleStep;
  ModelFlags flags;

  int stages() const;
  void validate() const;
  // Sum of delta^k over the periods still ahead of a decision at `depth`,
  // continuation included.
  double total_weight(int depth) const;
};

struct StepUtilities {
  double safety = 0.0;    // [-1, 1]
  double progress = 0.0;  // [0, 1]
};

double safety_utility(double gap, const GameConfig& cfg);
double progress_utility(double length, const GameConfig& cfg);

// Safety against the nearest other agent and progress along own trajectory.
StepUtilities step_utilities(int agent, std::span<const Trajectory> joint,
                             const GameConfig& cfg);

// Lexicographic thresholding: safety while it is at or below gamma, else progress.
inline double aggregate(double safety, double progress, double gamma) {
  return safety <= gamma ? safety : progress;
}
inline double aggregate(const StepUtilities& u, double gamma) {
  return aggregate(u.safety, u.progress, gamma);
}

// Normalized discounted value of a sequence of stage aggregates followed by
// `continuation_stages` periods at `continuation`.
double discounted_value(std::span<const double> stage_values, double continuation,
                        int continuation_stages, double delta);

struct GameNode {
  int id = 0;
  int depth = 0;
  int parent = -1;
  int parent_joint = -1;
  std::vector<VehicleState> states;
  std::vector<std::vector<Trajectory>> actions;  // per agent
  std::vector<int> radix;                        // action count per agent
  std::vector<int> children;                     // per joint, -1 = leaf
  // joint x agent tables of raw step and continuation utilities.
  Eigen::ArrayXXd safety;
  Eigen::ArrayXXd progress;
  Eigen::ArrayXXd cont_safety;
  Eigen::ArrayXXd cont_progress;
  // Per agent, per own action: step safety against every trajectory any
  // other agent may take here (the worst case).
  std::vector<std::vector<double>> worst_safety;

  int num_agents() const { return static_cast<int>(states.size()); }
  int num_actions(int agent) const { return radix[agent]; }
  int num_joints() const { return static_cast<int>(children.size()); }
  int encode(std::span<const int> actions) const;
  std::vector<int> decode(int joint) const;
  // Joint with `agent`'s action replaced.
  int with_action(int joint, int agent, int action) const;
  int action_of(int joint, int agent) const;
  Maneuver maneuver(int agent, int action) const {
    return actions[agent][action].maneuver();
  }
};

// Simultaneous-move game tree over joint states. Leaves (depth K) are not
// materialized; a child index of -1 means the joint ends the tree.
// Unnormalized discounted sums of the aggregated value, safety and progress
// from some decision onward. Linear, so expectations may be taken directly.
struct ValueSums {
  double a = 0.0;
  double s = 0.0;
  double p = 0.0;

  ValueSums& operator+=(const ValueSums& o) {
    a += o.a;
    s += o.s;
    p += o.p;
    return *this;
  }
  ValueSums operator*(double k) const { return {a * k, s * k, p * k}; }
};

class GameTree {
 public:
  int num_agents() const { return num_agents_; }
  const GameConfig& config() const { return cfg_; }
  const std::vector<Path>& paths() const { return paths_; }
  const GameNode& node(int id) const { return nodes_[id]; }
  const std::vector<GameNode>& nodes() const { return nodes_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  int root() const { return 0; }
  int stages() const { return stages_; }
  long long leaf_count() const;
  // Nodes ordered so every child precedes its parent.
  const std::vector<int>& bottom_up() const { return bottom_up_; }

  // Unnormalized discounted sums from `joint` at `node` to the end, given
  // the child's unnormalized sums. `child_sum` is ignored at leaves.
  double joint_sum(const GameNode& node, int joint, double step_value,
                   double cont_value, double child_sum) const;
  double leaf_tail(const GameNode& node, double cont_value) const;

  // ValueSums of `agent` for `joint` at `node`; `child` is the continuation
  // from the child node and must be given unless the joint is a leaf.
  ValueSums joint_sums(const GameNode& node, int joint, int agent, double gamma,
                       const ValueSums* child) const;
  // Normalized value at a node of the given depth under the configured
  // aggregation mode.
  double score(int depth, const ValueSums& v, double gamma) const;
  double normalized_safety(int depth, const ValueSums& v) const;
  // Total discount weight ahead of a decision at `depth` in this tree.
  double total_weight(int depth) const;

  // Wraps hand-made nodes (ids, parents and children already consistent).
  // Used for fixtures whose utilities are set directly.
  static GameTree assemble(GameConfig cfg, int stages, std::vector<GameNode> nodes);

  friend GameTree build_game_tree(std::vector<VehicleState> initial,
                                  std::vector<Path> paths, const GameConfig& cfg,
                                  int stages);

 private:
  int num_agents_ = 0;
  int stages_ = 0;
  GameConfig cfg_;
  std::vector<Path> paths_;
  std::vector<GameNode> nodes_;
  std::vector<int> bottom_up_;
};

// Builds the full tree with `stages` periods (default K = horizon / period).
// A joint whose child would leave some agent without trajectories is valued
// as a leaf. Throws Error(kStuck) if that already happens at the root.
GameTree build_game_tree(std::vector<VehicleState> initial, std::vector<Path> paths,
                         const GameConfig& cfg, int stages = -1);

// One played stage. `tree` may differ between steps when a history is
// assembled from re-anchored observations.
struct HistoryStep {
  const GameTree* tree = nullptr;
  int node = 0;
  std::vector<int> actions;       // per agent, -1 when only the maneuver is known
  std::vector<Maneuver> maneuvers;

  const GameNode& game_node() const { return tree->node(node); }
};
using History = std::vector<HistoryStep>;

// Steps from the root down to (excluding) `node_id`.
History tree_history(const GameTree& tree, int node_id);

// Pure strategy profile: joint action at every decision node.
using JointPolicy = std::function<int(int node_id)>;

// Value of taking `joint` at `node_id` and following `policy` afterwards,
// for `agent` of type `gamma`. Normalized into the range of stage values.
// Per-step aggregation returns the combined value; `safety_only` returns the
// discounted safety instead. Throws Error(kMissingStrategy) when `policy`
// returns an invalid joint.
double discounted_value(const GameTree& tree, int node_id, int joint,
                        const JointPolicy& policy, int agent, double gamma,
                        bool safety_only = false);

}  // namespace cogdrive

#endif  // COGDRIVE_GAME_CORE_HPP_

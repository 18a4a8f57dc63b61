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

#include "cogdrive/game_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cogdrive/errors.hpp"

namespace cogdrive {

AgentType AgentType::checked(double gamma) {
  if (!(gamma >= -1.0 && gamma <= 1.0)) {
    throw Error(ErrorKind::kPrecondition, "agent type outside [-1, 1]");
  }
  return AgentType{gamma};
}

int GameConfig::stages() const {
  return static_cast<int>(std::lround(horizon / period));
}

void GameConfig::validate() const {
  const double ratio = horizon / period;
  if (!(period > 0.0) || std::abs(ratio - std::round(ratio)) > 1e-9 || ratio < 1.0) {
    throw Error(ErrorKind::kConfig, "horizon must be a positive multiple of period");
  }
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw Error(ErrorKind::kConfig, "discount must lie in (0, 1]");
  }
  if (!(alpha > 0.0) || !(progress_cap > 0.0)) {
    throw Error(ErrorKind::kConfig, "alpha and progress cap must be positive");
  }
  if (continuation_stages < 0 || n_samples < 1) {
    throw Error(ErrorKind::kConfig, "bad continuation stages or n_samples");
  }
  if (type_grid.empty()) throw Error(ErrorKind::kConfig, "empty type grid");
  for (double g : type_grid) {
    if (!(g >= -1.0 && g <= 1.0)) {
      throw Error(ErrorKind::kConfig, "type grid value outside [-1, 1]");
    }
  }
  limits.validate();
}

double GameConfig::total_weight(int depth) const {
  const int terms = stages() - depth + continuation_stages;
  double w = 0.0;
  double p = 1.0;
  for (int k = 1; k <= terms; ++k) {
    p *= delta;
    w += p;
  }
  return w;
}

double safety_utility(double gap, const GameConfig& cfg) {
  return 2.0 / (1.0 + std::exp(-cfg.alpha * (gap - cfg.d0))) - 1.0;
}

double progress_utility(double length, const GameConfig& cfg) {
  return std::min(length / cfg.progress_cap, 1.0);
}

StepUtilities step_utilities(int agent, std::span<const Trajectory> joint,
                             const GameConfig& cfg) {
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < joint.size(); ++j) {
    if (static_cast<int>(j) == agent) continue;
    gap = std::min(gap, min_gap(joint[agent], joint[j]));
  }
  return {safety_utility(gap, cfg), progress_utility(trajectory_length(joint[agent]), cfg)};
}

double discounted_value(std::span<const double> stage_values, double continuation,
                        int continuation_stages, double delta) {
  double num = 0.0;
  double den = 0.0;
  double p = 1.0;
  for (double v : stage_values) {
    p *= delta;
    num += p * v;
    den += p;
  }
  for (int k = 0; k < continuation_stages; ++k) {
    p *= delta;
    num += p * continuation;
    den += p;
  }
  return den > 0.0 ? num / den : 0.0;
}

// ---------------------------------------------------------------------------
// GameNode

int GameNode::encode(std::span<const int> acts) const {
  int j = 0;
  for (std::size_t i = 0; i < acts.size(); ++i) j = j * radix[i] + acts[i];
  return j;
}

std::vector<int> GameNode::decode(int joint) const {
  std::vector<int> acts(radix.size());
  for (int i = static_cast<int>(radix.size()) - 1; i >= 0; --i) {
    acts[i] = joint % radix[i];
    joint /= radix[i];
  }
  return acts;
}

int GameNode::action_of(int joint, int agent) const {
  for (int i = static_cast<int>(radix.size()) - 1; i > agent; --i) joint /= radix[i];
  return joint % radix[agent];
}

int GameNode::with_action(int joint, int agent, int action) const {
  int stride = 1;
  for (int i = static_cast<int>(radix.size()) - 1; i > agent; --i) stride *= radix[i];
  const int current = (joint / stride) % radix[agent];
  return joint + (action - current) * stride;
}

// ---------------------------------------------------------------------------
// GameTree

long long GameTree::leaf_count() const {
  long long n = 0;
  for (const auto& node : nodes_) {
    for (int c : node.children) n += (c < 0) ? 1 : 0;
  }
  return n;
}

double GameTree::leaf_tail(const GameNode& node, double cont_value) const {
  const int terms = stages_ - node.depth - 1 + cfg_.continuation_stages;
  double w = 0.0;
  double p = 1.0;
  for (int k = 1; k <= terms; ++k) {
    p *= cfg_.delta;
    w += p;
  }
  return w * cont_value;
}

double GameTree::joint_sum(const GameNode& node, int joint, double step_value,
                           double cont_value, double child_sum) const {
  const double rest =
      node.children[joint] < 0 ? leaf_tail(node, cont_value) : child_sum;
  return cfg_.delta * (step_value + rest);
}

namespace {

struct PairGaps {
  // gaps[i][j] is an actions_i x actions_j matrix.
  std::vector<std::vector<Eigen::MatrixXd>> step;
  std::vector<std::vector<Eigen::MatrixXd>> cont;
};

Eigen::MatrixXd gap_matrix(const std::vector<Trajectory>& a,
                           const std::vector<Trajectory>& b) {
  Eigen::MatrixXd g(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) g(i, j) = min_gap(a[i], b[j]);
  }
  return g;
}

// Continuation of one action at its final world velocity, sampled at the
// action's step.
struct Tail {
  Eigen::Vector2d start;
  Eigen::Vector2d vel;
};

Eigen::MatrixXd tail_gap_matrix(const std::vector<Tail>& a, const std::vector<Tail>& b,
                                int steps, double dt) {
  Eigen::MatrixXd g(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      double best = std::numeric_limits<double>::infinity();
      for (int k = 0; k <= steps; ++k) {
        const double t = k * dt;
        const Eigen::Vector2d pa = a[i].start + a[i].vel * t;
        const Eigen::Vector2d pb = b[j].start + b[j].vel * t;
        best = std::min(best, (pa - pb).norm());
      }
      g(i, j) = best;
    }
  }
  return g;
}

void fill_utilities(GameNode& node, const GameConfig& cfg) {
  const int n = node.num_agents();
  const double ext = cfg.continuation_stages * cfg.period;
  const int steps = static_cast<int>(std::lround(ext / cfg.dt));
  std::vector<std::vector<Tail>> tails(n);
  std::vector<std::vector<double>> length(n), cont_length(n);
  for (int i = 0; i < n; ++i) {
    for (const auto& traj : node.actions[i]) {
      length[i].push_back(trajectory_length(traj));
      if (ext > 0.0) {
        const Tail t{traj.end().position(), traj.end().world_velocity()};
        cont_length[i].push_back(t.vel.norm() * steps * traj.dt() / cfg.continuation_stages);
        tails[i].push_back(t);
      } else {
        cont_length[i].push_back(length[i].back());
      }
    }
  }
  PairGaps gaps;
  gaps.step.assign(n, std::vector<Eigen::MatrixXd>(n));
  gaps.cont.assign(n, std::vector<Eigen::MatrixXd>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      gaps.step[i][j] = gap_matrix(node.actions[i], node.actions[j]);
      gaps.step[j][i] = gaps.step[i][j].transpose();
      if (ext > 0.0) {
        gaps.cont[i][j] = tail_gap_matrix(tails[i], tails[j], steps, cfg.dt);
      } else {
        gaps.cont[i][j] = gaps.step[i][j];
      }
      gaps.cont[j][i] = gaps.cont[i][j].transpose();
    }
  }

  const int joints = node.num_joints();
  node.safety.resize(joints, n);
  node.progress.resize(joints, n);
  node.cont_safety.resize(joints, n);
  node.cont_progress.resize(joints, n);
  for (int jt = 0; jt < joints; ++jt) {
    const std::vector<int> acts = node.decode(jt);
    for (int i = 0; i < n; ++i) {
      double g = std::numeric_limits<double>::infinity();
      double gc = std::numeric_limits<double>::infinity();
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        g = std::min(g, gaps.step[i][j](acts[i], acts[j]));
        gc = std::min(gc, gaps.cont[i][j](acts[i], acts[j]));
      }
      node.safety(jt, i) = safety_utility(g, cfg);
      node.progress(jt, i) = progress_utility(length[i][acts[i]], cfg);
      node.cont_safety(jt, i) = safety_utility(gc, cfg);
      node.cont_progress(jt, i) = progress_utility(cont_length[i][acts[i]], cfg);
    }
  }

  node.worst_safety.assign(n, {});
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < node.num_actions(i); ++a) {
      double g = std::numeric_limits<double>::infinity();
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        g = std::min(g, gaps.step[i][j].row(a).minCoeff());
      }
      node.worst_safety[i].push_back(safety_utility(g, cfg));
    }
  }
}

}  // namespace

namespace {

// Fills per-agent action sets; returns false when some agent has none.
bool populate_actions(GameNode& node, const std::vector<Path>& paths,
                      const GameConfig& cfg) {
  const int n = node.num_agents();
  node.actions.assign(n, {});
  node.radix.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    for (Maneuver m : {Maneuver::kWait, Maneuver::kProceed}) {
      auto trajs = try_generate_trajectories(node.states[i], paths[i], m, cfg.limits,
                                             cfg.n_samples, cfg.period, cfg.dt);
      for (auto& t : trajs) node.actions[i].push_back(std::move(t));
    }
    node.radix[i] = static_cast<int>(node.actions[i].size());
    if (node.radix[i] == 0) return false;
  }
  return true;
}

}  // namespace

GameTree build_game_tree(std::vector<VehicleState> initial, std::vector<Path> paths,
                         const GameConfig& cfg, int stages) {
  cfg.validate();
  if (initial.empty() || initial.size() != paths.size()) {
    throw Error(ErrorKind::kPrecondition, "one path per agent required");
  }
  GameTree tree;
  tree.num_agents_ = static_cast<int>(initial.size());
  tree.stages_ = stages > 0 ? stages : cfg.stages();
  tree.cfg_ = cfg;
  tree.paths_ = std::move(paths);

  GameNode root;
  root.states = std::move(initial);
  if (!populate_actions(root, tree.paths_, cfg)) {
    throw Error(ErrorKind::kStuck, "an agent has no trajectory at the root");
  }
  tree.nodes_.push_back(std::move(root));

  // Children are appended while iterating, so index rather than hold refs.
  for (std::size_t head = 0; head < tree.nodes_.size(); ++head) {
    tree.nodes_[head].id = static_cast<int>(head);
    int joints = 1;
    for (int r : tree.nodes_[head].radix) joints *= r;
    tree.nodes_[head].children.assign(joints, -1);
    fill_utilities(tree.nodes_[head], cfg);
    if (tree.nodes_[head].depth + 1 >= tree.stages_) continue;

    for (int jt = 0; jt < joints; ++jt) {
      const GameNode& node = tree.nodes_[head];
      const std::vector<int> acts = node.decode(jt);
      GameNode child;
      child.depth = node.depth + 1;
      child.parent = static_cast<int>(head);
      child.parent_joint = jt;
      for (int i = 0; i < tree.num_agents_; ++i) {
        child.states.push_back(node.actions[i][acts[i]].end());
      }
      // A stuck agent ends the branch: the joint is valued as a leaf.
      if (!populate_actions(child, tree.paths_, cfg)) continue;
      const int child_id = static_cast<int>(tree.nodes_.size());
      tree.nodes_.push_back(std::move(child));
      tree.nodes_[head].children[jt] = child_id;
    }
  }
  tree.bottom_up_.resize(tree.nodes_.size());
  for (std::size_t i = 0; i < tree.nodes_.size(); ++i) {
    tree.bottom_up_[i] = static_cast<int>(tree.nodes_.size() - 1 - i);
  }
  return tree;
}

ValueSums GameTree::joint_sums(const GameNode& node, int joint, int agent, double gamma,
                              const ValueSums* child) const {
  const double us = node.safety(joint, agent);
  const double up = node.progress(joint, agent);
  ValueSums rest;
  if (node.children[joint] < 0) {
    const double cs = node.cont_safety(joint, agent);
    const double cp = node.cont_progress(joint, agent);
    rest = {leaf_tail(node, aggregate(cs, cp, gamma)), leaf_tail(node, cs),
            leaf_tail(node, cp)};
  } else {
    if (child == nullptr) {
      throw Error(ErrorKind::kMissingStrategy,
                  "no continuation below node " + std::to_string(node.id));
    }
    rest = *child;
  }
  const double d = cfg_.delta;
  return {d * (aggregate(us, up, gamma) + rest.a), d * (us + rest.s), d * (up + rest.p)};
}

double GameTree::total_weight(int depth) const {
  const int terms = stages_ - depth + cfg_.continuation_stages;
  double w = 0.0;
  double p = 1.0;
  for (int k = 1; k <= terms; ++k) {
    p *= cfg_.delta;
    w += p;
  }
  return w;
}

double GameTree::score(int depth, const ValueSums& v, double gamma) const {
  const double w = total_weight(depth);
  if (cfg_.aggregation == Aggregation::kAtEnd) return aggregate(v.s / w, v.p / w, gamma);
  return v.a / w;
}

double GameTree::normalized_safety(int depth, const ValueSums& v) const {
  return v.s / total_weight(depth);
}

GameTree GameTree::assemble(GameConfig cfg, int stages, std::vector<GameNode> nodes) {
  if (nodes.empty()) throw Error(ErrorKind::kPrecondition, "tree needs a root");
  GameTree tree;
  tree.num_agents_ = nodes.front().num_agents();
  tree.stages_ = stages;
  tree.cfg_ = std::move(cfg);
  tree.paths_.assign(tree.num_agents_, Path());
  tree.nodes_ = std::move(nodes);
  // Breadth-first from the root so reversing yields children before parents.
  std::vector<int> order = {0};
  for (std::size_t h = 0; h < order.size(); ++h) {
    GameNode& n = tree.nodes_[order[h]];
    n.id = order[h];
    for (int c : n.children) {
      if (c >= 0) {
        tree.nodes_[c].parent = n.id;
        tree.nodes_[c].depth = n.depth + 1;
        order.push_back(c);
      }
    }
  }
  for (GameNode& n : tree.nodes_) {
    for (int j = 0; j < n.num_joints(); ++j) {
      if (n.children[j] >= 0) tree.nodes_[n.children[j]].parent_joint = j;
    }
  }
  tree.bottom_up_.assign(order.rbegin(), order.rend());
  return tree;
}

History tree_history(const GameTree& tree, int node_id) {
  History h;
  int cur = node_id;
  while (tree.node(cur).parent >= 0) {
    const GameNode& node = tree.node(cur);
    const GameNode& parent = tree.node(node.parent);
    HistoryStep step;
    step.tree = &tree;
    step.node = parent.id;
    step.actions = parent.decode(node.parent_joint);
    for (int i = 0; i < parent.num_agents(); ++i) {
      step.maneuvers.push_back(parent.maneuver(i, step.actions[i]));
    }
    h.push_back(std::move(step));
    cur = parent.id;
  }
  std::reverse(h.begin(), h.end());
  return h;
}

double discounted_value(const GameTree& tree, int node_id, int joint,
                        const JointPolicy& policy, int agent, double gamma,
                        bool safety_only) {
  const GameConfig& cfg = tree.config();
  std::vector<double> safety, progress;
  int cur = node_id;
  int jt = joint;
  double cont_s = 0.0, cont_p = 0.0;
  int cont_terms = 0;
  while (true) {
    const GameNode& node = tree.node(cur);
    if (jt < 0 || jt >= node.num_joints()) {
      throw Error(ErrorKind::kMissingStrategy,
                  "profile undefined at node " + std::to_string(cur));
    }
    safety.push_back(node.safety(jt, agent));
    progress.push_back(node.progress(jt, agent));
    const int next = node.children[jt];
    if (next < 0) {
      cont_s = node.cont_safety(jt, agent);
      cont_p = node.cont_progress(jt, agent);
      cont_terms = tree.stages() - node.depth - 1 + cfg.continuation_stages;
      break;
    }
    cur = next;
    jt = policy(cur);
  }
  const double s = discounted_value(safety, cont_s, cont_terms, cfg.delta);
  if (safety_only) return s;
  if (cfg.aggregation == Aggregation::kAtEnd) {
    const double p = discounted_value(progress, cont_p, cont_terms, cfg.delta);
    return aggregate(s, p, gamma);
  }
  std::vector<double> combined(safety.size());
  for (std::size_t k = 0; k < safety.size(); ++k) {
    combined[k] = aggregate(safety[k], progress[k], gamma);
  }
  return discounted_value(combined, aggregate(cont_s, cont_p, gamma), cont_terms,
                          cfg.delta);
}

}  // namespace cogdrive

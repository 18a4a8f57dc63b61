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

#ifndef COGDRIVE_TESTS_TEST_SUPPORT_HPP_
#define COGDRIVE_TESTS_TEST_SUPPORT_HPP_

#include <cmath>
#include <random>
#include <vector>

#include "cogdrive/game_core.hpp"
#include "cogdrive/kinematics.hpp"

namespace cogdrive::testing {

// Straight path through (x0, y0) with heading `theta`, long enough for a
// 6 s horizon at v_max in both directions.
inline Path straight_path(double x0, double y0, double theta, double half = 300.0) {
  const Eigen::Vector2d d(std::cos(theta), std::sin(theta));
  const Eigen::Vector2d c(x0, y0);
  return Path({c - half * d, c + half * d});
}

inline VehicleState state_on(const Path& path, double s, double speed) {
  const Eigen::Vector2d p = path.point_at(s);
  VehicleState st;
  st.x = p.x();
  st.y = p.y();
  st.theta = path.heading_at(s);
  st.vx = speed;
  return st;
}

// Constant-velocity straight trajectory sampled at kSampleStep.
inline Trajectory constant_trajectory(double x0, double y0, double vx, double vy,
                                      double duration, Maneuver m = Maneuver::kProceed) {
  std::vector<TrajectorySample> samples;
  const int steps = static_cast<int>(std::lround(duration / kSampleStep));
  for (int k = 0; k <= steps; ++k) {
    const double t = k * kSampleStep;
    VehicleState st;
    st.x = x0 + vx * t;
    st.y = y0 + vy * t;
    st.vx = std::hypot(vx, vy);
    st.theta = std::atan2(vy, vx);
    samples.push_back({t, st});
  }
  return Trajectory(std::move(samples), m);
}

// Two vehicles on crossing straight roads, both approaching the crossing.
struct CrossingFixture {
  std::vector<VehicleState> states;
  std::vector<Path> paths;
};

inline CrossingFixture random_crossing(std::mt19937_64& rng, bool crossing = true) {
  std::uniform_real_distribution<double> dist(8.0, 30.0);
  std::uniform_real_distribution<double> speed(0.0, 12.0);
  std::uniform_real_distribution<double> angle(0.6, 2.5);
  CrossingFixture f;
  const double th1 = 0.0;
  const double th2 = crossing ? angle(rng) : 0.0;
  f.paths.push_back(straight_path(0.0, 0.0, th1));
  f.paths.push_back(crossing ? straight_path(0.0, 0.0, th2)
                             : straight_path(0.0, 3.5, th2));
  f.states.push_back(state_on(f.paths[0], 300.0 - dist(rng), speed(rng)));
  f.states.push_back(state_on(f.paths[1], 300.0 - dist(rng), speed(rng)));
  return f;
}

// Hand-made node with the given maneuver per action and zeroed tables; tests
// fill in the utilities they care about.
inline GameNode make_node(const std::vector<std::vector<Maneuver>>& maneuvers) {
  GameNode node;
  const int n = static_cast<int>(maneuvers.size());
  node.states.assign(n, VehicleState{});
  node.actions.resize(n);
  int joints = 1;
  for (int i = 0; i < n; ++i) {
    for (Maneuver m : maneuvers[i]) {
      node.actions[i].push_back(constant_trajectory(0, 0, 0, 0, 2.0, m));
    }
    node.radix.push_back(static_cast<int>(maneuvers[i].size()));
    node.worst_safety.emplace_back(maneuvers[i].size(), 0.0);
    joints *= node.radix.back();
  }
  node.children.assign(joints, -1);
  node.safety = Eigen::ArrayXXd::Zero(joints, n);
  node.progress = Eigen::ArrayXXd::Zero(joints, n);
  node.cont_safety = Eigen::ArrayXXd::Zero(joints, n);
  node.cont_progress = Eigen::ArrayXXd::Zero(joints, n);
  return node;
}

inline GameTree small_tree(std::mt19937_64& rng, int stages, int n_samples,
                           bool crossing = true) {
  CrossingFixture f = random_crossing(rng, crossing);
  GameConfig cfg;
  cfg.n_samples = n_samples;
  cfg.horizon = stages * cfg.period;
  return build_game_tree(f.states, f.paths, cfg);
}

// One-stage tree whose continuation equals the stage utilities.
inline GameTree stage_game(GameNode node) {
  node.cont_safety = node.safety;
  node.cont_progress = node.progress;
  GameConfig cfg;
  cfg.horizon = cfg.period;
  return GameTree::assemble(cfg, 1, {std::move(node)});
}

// Fills progress with payoffs and safety with 1 so aggregate at gamma < 1
// returns the payoff.
// Every cell fully safe; payoff[j][i] is agent i's progress at joint j.
inline GameNode payoff_node(const std::vector<std::vector<Maneuver>>& ms,
                     const std::vector<std::vector<double>>& payoff) {
  GameNode n = make_node(ms);
  for (int j = 0; j < n.num_joints(); ++j) {
    for (int i = 0; i < n.num_agents(); ++i) {
      n.safety(j, i) = 1.0;
      n.progress(j, i) = payoff[j][i];
    }
  }
  return n;
}

}  // namespace cogdrive::testing

#endif  // COGDRIVE_TESTS_TEST_SUPPORT_HPP_

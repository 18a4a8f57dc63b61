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

#include "cogdrive/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "cogdrive/errors.hpp"

namespace cogdrive {
namespace {

constexpr double kPi = std::numbers::pi;
// States farther than this from the centerline are rejected (m).
constexpr double kLateralTolerance = 2.5;
constexpr double kTimeEps = 1e-9;

double wrap_angle(double a) {
  while (a > kPi) a -= 2.0 * kPi;
  while (a < -kPi) a += 2.0 * kPi;
  return a;
}

// Largest speed change the cubic profile can realize in `period` seconds:
// peak |a| = 1.5 |dv| / T and peak |jerk| = 6 |dv| / T^2.
double reachable_delta(double accel_bound, double jerk_bound, double period) {
  return std::min(accel_bound * period / 1.5, jerk_bound * period * period / 6.0);
}

Trajectory build_profile(const VehicleState& start, const Path& path, double s0,
                         double v0, double v1, Maneuver maneuver, double period,
                         double dt) {
  const int steps = static_cast<int>(std::lround(period / dt));
  const double dv = v1 - v0;
  std::vector<TrajectorySample> samples;
  samples.reserve(steps + 1);
  for (int k = 0; k <= steps; ++k) {
    const double t = k * dt;
    const double tau = t / period;
    VehicleState st;
    if (k == 0) {
      st.x = start.x;
      st.y = start.y;
      st.theta = start.theta;
      st.vx = v0;
    } else {
      const double s =
          s0 + v0 * t + dv * period * (tau * tau * tau - 0.5 * tau * tau * tau * tau);
      const Eigen::Vector2d p = path.point_at(s);
      st.x = p.x();
      st.y = p.y();
      st.theta = path.heading_at(s);
      st.vx = v0 + dv * (3.0 * tau * tau - 2.0 * tau * tau * tau);
      st.ax = dv * 6.0 * tau * (1.0 - tau) / period;
    }
    if (k == steps) st.ax = 0.0;
    samples.push_back({t, st});
  }
  return Trajectory(std::move(samples), maneuver, dt);
}

Trajectory stay_stopped(const VehicleState& start, double period, double dt) {
  const int steps = static_cast<int>(std::lround(period / dt));
  VehicleState st;
  st.x = start.x;
  st.y = start.y;
  st.theta = start.theta;
  std::vector<TrajectorySample> samples;
  samples.reserve(steps + 1);
  for (int k = 0; k <= steps; ++k) samples.push_back({k * dt, st});
  return Trajectory(std::move(samples), Maneuver::kWait, dt);
}

}  // namespace

double VehicleState::speed() const { return std::hypot(vx, vy); }

Eigen::Vector2d VehicleState::world_velocity() const {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {c * vx - s * vy, s * vx + c * vy};
}

bool VehicleState::finite() const {
  return std::isfinite(x) && std::isfinite(y) && std::isfinite(vx) &&
         std::isfinite(vy) && std::isfinite(ax) && std::isfinite(ay) &&
         std::isfinite(theta);
}

void KinematicLimits::validate() const {
  if (!(a_min < 0.0 && a_max > 0.0 && v_max > 0.0 && jerk_max > 0.0)) {
    throw Error(ErrorKind::kPrecondition,
                "kinematic limits need a_min < 0 < a_max, v_max > 0, jerk_max > 0");
  }
}

const char* ManeuverName(Maneuver m) {
  return m == Maneuver::kWait ? "wait" : "proceed";
}

Maneuver classify_speed_change(double v_start, double v_end, double duration) {
  const double mean_accel = (v_end - v_start) / duration;
  if (mean_accel < kWaitMeanAccel || v_end < kStoppedSpeed) return Maneuver::kWait;
  return Maneuver::kProceed;
}

// ---------------------------------------------------------------------------
// Path

Path::Path(std::vector<Eigen::Vector2d> points) : points_(std::move(points)) {
  if (points_.size() < 2) {
    throw Error(ErrorKind::kPrecondition, "path needs at least two points");
  }
  cumulative_.reserve(points_.size());
  cumulative_.push_back(0.0);
  for (std::size_t i = 1; i < points_.size(); ++i) {
    const double seg = (points_[i] - points_[i - 1]).norm();
    if (seg <= 0.0) {
      throw Error(ErrorKind::kPrecondition, "path has repeated points");
    }
    cumulative_.push_back(cumulative_.back() + seg);
  }
}

std::size_t Path::segment_for(double s) const {
  if (s <= 0.0) return 0;
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  const std::size_t idx = static_cast<std::size_t>(it - cumulative_.begin());
  return std::min(idx == 0 ? 0 : idx - 1, points_.size() - 2);
}

Eigen::Vector2d Path::point_at(double s) const {
  const std::size_t i = segment_for(s);
  const Eigen::Vector2d d = points_[i + 1] - points_[i];
  const double seg = cumulative_[i + 1] - cumulative_[i];
  return points_[i] + d * ((s - cumulative_[i]) / seg);
}

double Path::heading_at(double s) const {
  const std::size_t i = segment_for(s);
  const Eigen::Vector2d d = points_[i + 1] - points_[i];
  return std::atan2(d.y(), d.x());
}

Path::Projection Path::project(const Eigen::Vector2d& p) const {
  Projection best{0.0, std::numeric_limits<double>::infinity()};
  const std::size_t last = points_.size() - 2;
  for (std::size_t i = 0; i <= last; ++i) {
    const Eigen::Vector2d a = points_[i];
    const Eigen::Vector2d d = points_[i + 1] - a;
    const double seg = cumulative_[i + 1] - cumulative_[i];
    double u = (p - a).dot(d) / (seg * seg);
    if (i != 0) u = std::max(u, 0.0);
    if (i != last) u = std::min(u, 1.0);
    const double dist = (a + u * d - p).norm();
    if (dist < best.lateral) best = {cumulative_[i] + u * seg, dist};
  }
  return best;
}

// ---------------------------------------------------------------------------
// Trajectory

Trajectory::Trajectory(std::vector<TrajectorySample> samples, Maneuver maneuver,
                       double dt)
    : samples_(std::move(samples)), maneuver_(maneuver), dt_(dt) {
  if (samples_.empty()) {
    throw Error(ErrorKind::kPrecondition, "trajectory without samples");
  }
}

std::vector<Trajectory> try_generate_trajectories(
    const VehicleState& state, const Path& path, Maneuver maneuver,
    const KinematicLimits& limits, int n_samples, double period, double dt) {
  if (n_samples < 1) {
    throw Error(ErrorKind::kPrecondition, "n_samples must be >= 1");
  }
  limits.validate();
  const Path::Projection proj = path.project(state.position());
  if (proj.lateral > kLateralTolerance) {
    throw Error(ErrorKind::kPrecondition, "vehicle state is off its path");
  }
  const double v0 = state.speed();
  std::vector<Trajectory> out;

  if (maneuver == Maneuver::kWait && v0 < 1e-9) {
    out.push_back(stay_stopped(state, period, dt));
    return out;
  }

  std::vector<double> targets;
  if (maneuver == Maneuver::kWait) {
    const double lo =
        std::max(0.0, v0 - reachable_delta(-limits.a_min, limits.jerk_max, period));
    for (int k = 0; k < n_samples; ++k) {
      targets.push_back(lo + (v0 - lo) * k / n_samples);
    }
  } else {
    const double hi = std::max(
        v0, std::min(limits.v_max,
                     v0 + reachable_delta(limits.a_max, limits.jerk_max, period)));
    if (n_samples == 1 || hi <= v0) {
      targets.push_back(v0);
    } else {
      for (int k = 0; k < n_samples; ++k) {
        targets.push_back(v0 + (hi - v0) * k / (n_samples - 1));
      }
    }
  }

  VehicleState start = state;
  start.theta = wrap_angle(state.theta);
  for (double v1 : targets) {
    if (classify_speed_change(v0, v1, period) != maneuver) continue;
    if (maneuver == Maneuver::kProceed && v1 < v0 - kProceedSpeedSlack) continue;
    Trajectory traj =
        build_profile(start, path, proj.s, v0, v1, maneuver, period, dt);
    if (!within_limits(traj, limits)) continue;
    out.push_back(std::move(traj));
  }
  return out;
}

std::vector<Trajectory> generate_trajectories(const VehicleState& state,
                                              const Path& path,
                                              Maneuver maneuver,
                                              const KinematicLimits& limits,
                                              int n_samples, double period,
                                              double dt) {
  auto out =
      try_generate_trajectories(state, path, maneuver, limits, n_samples, period, dt);
  if (out.empty()) {
    throw Error(ErrorKind::kEmptyActionSet,
                std::string("no feasible ") + ManeuverName(maneuver) + " trajectory");
  }
  return out;
}

bool within_limits(const Trajectory& traj, const KinematicLimits& limits,
                   double tol) {
  const auto& s = traj.samples();
  for (std::size_t k = 0; k < s.size(); ++k) {
    const VehicleState& st = s[k].state;
    if (!st.finite()) return false;
    if (st.speed() > limits.v_max + tol) return false;
    if (std::abs(st.vy) > limits.lat_v_max + tol) return false;
    if (st.ax < limits.a_min - tol || st.ax > limits.a_max + tol) return false;
    if (std::abs(st.ay) > limits.lat_a_max + tol) return false;
    if (k == 0) continue;
    const double h = s[k].t - s[k - 1].t;
    if (h <= 0.0) return false;
    const double fd_accel = (st.vx - s[k - 1].state.vx) / h;
    if (fd_accel < limits.a_min - tol || fd_accel > limits.a_max + tol) return false;
    const double fd_jerk = (st.ax - s[k - 1].state.ax) / h;
    if (std::abs(fd_jerk) > limits.jerk_max + tol) return false;
  }
  return true;
}

double trajectory_length(const Trajectory& traj) {
  double len = 0.0;
  const auto& s = traj.samples();
  for (std::size_t k = 1; k < s.size(); ++k) {
    len += (s[k].state.position() - s[k - 1].state.position()).norm();
  }
  return len;
}

double min_gap(const Trajectory& a, const Trajectory& b) {
  if (a.size() != b.size() || std::abs(a.dt() - b.dt()) > 1e-12) {
    throw Error(ErrorKind::kMismatchedSampling,
                "trajectories differ in duration or sample step");
  }
  double best = std::numeric_limits<double>::infinity();
  const auto& sa = a.samples();
  const auto& sb = b.samples();
  for (std::size_t k = 0; k < sa.size(); ++k) {
    const double dx = sa[k].state.x - sb[k].state.x;
    const double dy = sa[k].state.y - sb[k].state.y;
    best = std::min(best, std::sqrt(dx * dx + dy * dy));
  }
  return best;
}

Trajectory extend_constant(const Trajectory& traj, double extra) {
  if (!(extra > 0.0)) {
    throw Error(ErrorKind::kPrecondition, "extension must be positive");
  }
  std::vector<TrajectorySample> samples = traj.samples();
  const TrajectorySample last = samples.back();
  const Eigen::Vector2d vel = last.state.world_velocity();
  const int steps = static_cast<int>(std::lround(extra / traj.dt()));
  samples.reserve(samples.size() + steps);
  for (int k = 1; k <= steps; ++k) {
    const double dt = k * traj.dt();
    VehicleState st = last.state;
    st.x += vel.x() * dt;
    st.y += vel.y() * dt;
    st.ax = 0.0;
    st.ay = 0.0;
    samples.push_back({last.t + dt, st});
  }
  return Trajectory(std::move(samples), traj.maneuver(), traj.dt());
}

Trajectory truncate(const Trajectory& traj, double duration) {
  std::vector<TrajectorySample> samples;
  for (const auto& s : traj.samples()) {
    if (s.t <= duration + kTimeEps) samples.push_back(s);
  }
  return Trajectory(std::move(samples), traj.maneuver(), traj.dt());
}

Trajectory tail(const Trajectory& traj, double from) {
  std::vector<TrajectorySample> samples;
  for (const auto& s : traj.samples()) {
    if (s.t >= from - kTimeEps) samples.push_back({s.t - from, s.state});
  }
  return Trajectory(std::move(samples), traj.maneuver(), traj.dt());
}

}  // namespace cogdrive

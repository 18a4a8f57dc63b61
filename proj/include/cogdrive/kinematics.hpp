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

#ifndef COGDRIVE_KINEMATICS_HPP_
#define COGDRIVE_KINEMATICS_HPP_

#include <span>
#include <vector>

#include <Eigen/Core>

namespace cogdrive {

// Sampling step of every trajectory, seconds.
inline constexpr double kSampleStep = 0.1;
// Below this speed a vehicle counts as stopped (m/s).
inline constexpr double kStoppedSpeed = 0.5;
// Proceed trajectories may lose at most this much speed (m/s).
inline constexpr double kProceedSpeedSlack = 0.1;
// Mean longitudinal acceleration below which a segment is a wait (m/s^2).
inline constexpr double kWaitMeanAccel = -0.2;

struct VehicleState {
  double x = 0.0;
  double y = 0.0;
  double vx = 0.0;  // body frame, longitudinal
  double vy = 0.0;  // body frame, lateral
  double ax = 0.0;
  double ay = 0.0;
  double theta = 0.0;

  double speed() const;
  Eigen::Vector2d position() const { return {x, y}; }
  // Velocity rotated into the world frame.
  Eigen::Vector2d world_velocity() const;
  bool finite() const;

  bool operator==(const VehicleState&) const = default;
};

struct KinematicLimits {
  double v_max = 14.0;
  double a_min = -4.5;
  double a_max = 3.0;
  double jerk_max = 10.0;
  double lat_v_max = 1.0;
  double lat_a_max = 4.0;
  double lat_jerk_max = 10.0;

  // Throws Error(kPrecondition) on an inconsistent envelope.
  void validate() const;
};

enum class Maneuver { kWait, kProceed };

const char* ManeuverName(Maneuver m);

// The wait/proceed rule shared by trajectory generation and the observation
// classifier: wait iff the mean acceleration is below kWaitMeanAccel or the
// segment ends below kStoppedSpeed.
Maneuver classify_speed_change(double v_start, double v_end, double duration);

// Lane centerline. Beyond either end the path continues along the first/last
// segment so arc-length queries never fall off.
class Path {
 public:
  Path() = default;
  explicit Path(std::vector<Eigen::Vector2d> points);

  const std::vector<Eigen::Vector2d>& points() const { return points_; }
  double length() const { return cumulative_.empty() ? 0.0 : cumulative_.back(); }

  Eigen::Vector2d point_at(double s) const;
  double heading_at(double s) const;

  struct Projection {
    double s = 0.0;
    double lateral = 0.0;  // unsigned distance to the centerline
  };
  Projection project(const Eigen::Vector2d& p) const;

 private:
  std::size_t segment_for(double s) const;

  std::vector<Eigen::Vector2d> points_;
  std::vector<double> cumulative_;
};

struct TrajectorySample {
  double t = 0.0;
  VehicleState state;
};

class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(std::vector<TrajectorySample> samples, Maneuver maneuver,
             double dt = kSampleStep);

  const std::vector<TrajectorySample>& samples() const { return samples_; }
  Maneuver maneuver() const { return maneuver_; }
  double dt() const { return dt_; }
  double duration() const { return samples_.empty() ? 0.0 : samples_.back().t; }
  const VehicleState& start() const { return samples_.front().state; }
  const VehicleState& end() const { return samples_.back().state; }
  std::size_t size() const { return samples_.size(); }

 private:
  std::vector<TrajectorySample> samples_;
  Maneuver maneuver_ = Maneuver::kWait;
  double dt_ = kSampleStep;
};

// Generates maneuver-tagged trajectories that follow `path` for `period`
// seconds. The speed profile is the cubic v(t) = v0 + dv (3 tau^2 - 2 tau^3),
// which starts and ends with zero acceleration. Target end speeds are spaced
// linearly over the part of [0, v0) (wait) or [v0, v_max] (proceed) that the
// limits can reach within one period; targets that violate the limits or
// disagree with classify_speed_change are dropped.
// Throws Error(kEmptyActionSet) when nothing survives.
std::vector<Trajectory> generate_trajectories(const VehicleState& state,
                                              const Path& path,
                                              Maneuver maneuver,
                                              const KinematicLimits& limits,
                                              int n_samples, double period,
                                              double dt = kSampleStep);

// Same as above but returns an empty vector instead of throwing.
std::vector<Trajectory> try_generate_trajectories(
    const VehicleState& state, const Path& path, Maneuver maneuver,
    const KinematicLimits& limits, int n_samples, double period,
    double dt = kSampleStep);

// Finite-difference check of speed, acceleration and jerk against `limits`.
bool within_limits(const Trajectory& traj, const KinematicLimits& limits,
                   double tol = 1e-9);

double trajectory_length(const Trajectory& traj);

// Minimum distance between positions at equal sample times. Throws
// Error(kMismatchedSampling) if the two trajectories are sampled differently.
double min_gap(const Trajectory& a, const Trajectory& b);

// Appends samples continuing at the last sample's world velocity.
Trajectory extend_constant(const Trajectory& traj, double extra);

// Keeps the samples with t <= duration.
Trajectory truncate(const Trajectory& traj, double duration);

// Samples with t >= from, re-timed to start at zero.
Trajectory tail(const Trajectory& traj, double from);

}  // namespace cogdrive

#endif  // COGDRIVE_KINEMATICS_HPP_

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

#ifndef COGDRIVE_EVAL_HPP_
#define COGDRIVE_EVAL_HPP_

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cogdrive/game_core.hpp"
#include "cogdrive/strategic.hpp"
#include "cogdrive/kinematics.hpp"

namespace cogdrive {

// ---------------------------------------------------------------------------
// Models

enum class ModelId { kAC, kNAC, kMaxmax, kLevel1, kSSPE, kMSPE, kQLk, kRobust };

const char* ModelIdName(ModelId m);
// Accepts the names printed by ModelIdName (case-insensitive) and "dlk".
// Throws Error(kConfig) naming every model otherwise.
ModelId ParseModelId(const std::string& name);
std::string ModelList();

// The five models compared in the scenario sweeps.
inline const std::vector<ModelId> kSweepModels = {ModelId::kLevel1, ModelId::kSSPE,
                                                   ModelId::kMSPE, ModelId::kQLk,
                                                   ModelId::kRobust};

// ---------------------------------------------------------------------------
// Trajectory logs

inline constexpr double kMaxFrameGap = 0.5;  // seconds
inline constexpr const char* kTrajectoryHeader =
    "track_id,frame,t_s,x_m,y_m,vx_ms,vy_ms,ax_ms2,ay_ms2,theta_rad";

struct TrackSample {
  int track_id = 0;
  long frame = 0;
  double t = 0.0;
  VehicleState state;  // vx/vy and ax/ay in the body frame
};

struct ManifestEntry {
  std::string id;
  std::string scenario;  // "LT" or "RT"
  std::vector<int> agents;
  double t0 = 0.0;
  std::vector<Path> paths;  // optional, one per agent
};

struct GameRecord {
  std::string id;
  std::string scenario;
  std::vector<int> track_ids;
  double t0 = 0.0;
  double dt = kSampleStep;
  std::vector<std::vector<VehicleState>> samples;  // per agent, t0 + k*dt
  std::vector<Path> paths;
};

std::vector<ManifestEntry> parse_manifest(const std::string& json_text);
std::vector<ManifestEntry> read_manifest(const std::string& file);
std::vector<TrackSample> parse_trajectory_csv(std::istream& in);

// Throws Error(kSchema) on a bad header or row, Error(kGap) when a track
// misses more than kMaxFrameGap inside a game window.
std::vector<GameRecord> ingest_trajectories(std::istream& csv,
                                            const std::vector<ManifestEntry>& manifest,
                                            const GameConfig& cfg);
std::vector<GameRecord> ingest_trajectories(const std::string& csv_file,
                                            const std::string& manifest_file,
                                            const GameConfig& cfg);

void write_trajectory_csv(std::ostream& out, const std::vector<GameRecord>& records);
std::string manifest_json(const std::vector<GameRecord>& records);

// Wait if the mean longitudinal acceleration is below kWaitMeanAccel or the
// end speed is below kStoppedSpeed.
Maneuver classify_maneuver(std::span<const VehicleState> segment, double duration);

// Per stage, per agent.
std::vector<std::vector<Maneuver>> observed_maneuvers(const GameRecord& record,
                                                      const GameConfig& cfg);

// ---------------------------------------------------------------------------
// Match rate

enum class Attribution {
  kExclusive,    // NAC counts the games AC cannot explain without switching
  kIndependent,  // NAC is matched on its own traces
};

struct EvalOptions {
  GameConfig game;
  double lambda = 1.0;  // QLk precision
  bool first_stage_only = false;
  bool witness_all = false;
  Attribution attribution = Attribution::kExclusive;
  int subject = 0;  // index into the manifest's agent list
};

struct GameMatch {
  std::string game_id;
  bool matched = false;
  std::vector<double> witness;  // types, one per agent
  std::vector<std::vector<double>> witnesses;  // all, with witness_all
  double probability = -1.0;  // QLk only
  std::vector<Maneuver> observed;  // subject, per stage
};

struct MatchReport {
  ModelId model = ModelId::kAC;
  double lambda = 0.0;
  int games = 0;
  int matched = 0;
  double rate = 0.0;
  double mean_gamma = 0.0;  // subject's witness type over matched games
  std::vector<GameMatch> per_game;

  std::string to_json(bool with_games = true) const;
};

MatchReport match_rate(const std::vector<GameRecord>& records, ModelId model,
                       const EvalOptions& opts);
// Same reports as match_rate per model, with each game prepared once.
std::vector<MatchReport> match_rates(const std::vector<GameRecord>& records,
                                     std::span<const ModelId> models, const EvalOptions& opts);

// ---------------------------------------------------------------------------
// Scenarios

enum class ScenarioId { kIC, kMBI, kPP };

const char* ScenarioIdName(ScenarioId s);

// Overrides fields of `cfg` from a JSON object: horizon, period, delta,
// alpha, d0, progress_cap, n_samples, continuation_stages, v_max,
// aggregation (per_step | at_end), ac_condition_direction (le | ge),
// l1_expectation (max | mean), sspe_safety (horizon | step),
// mspe_lhs_safety (bool) and slack (int).
void read_game_config(const std::string& json_object, GameConfig& cfg);

struct ScenarioAgent {
  std::string role;
  Path path;
  std::vector<double> start_s;  // arc length along the path, m
  std::vector<double> speeds;   // m/s
  std::optional<ModelId> model;  // pinned model; otherwise the swept one
};

struct ScenarioSpec {
  ScenarioId id = ScenarioId::kPP;
  std::vector<ScenarioAgent> agents;
  std::vector<Eigen::Vector2d> polygon;  // IC intersection
  Path turn_lane;                        // MBI lane the merging vehicle enters
  double merge_s = 0.0;                  // PP, along the oncoming path
  std::vector<ModelId> models = kSweepModels;
  std::vector<double> type_grid = kDefaultTypeGrid;
  GameConfig game;
  double lambda = 1.0;

  static ScenarioSpec from_json(const std::string& json_text);
  static ScenarioSpec load(const std::string& file);
  // Throws Error(kConfig).
  void validate() const;
};

struct InitPoint {
  int index = 0;
  std::vector<VehicleState> states;
};

std::vector<InitPoint> init_grid(const ScenarioSpec& spec);
// Every combination of one grid type per agent, first agent slowest.
std::vector<std::vector<double>> type_combinations(std::span<const double> grid,
                                                   int agents);

inline constexpr double kCrashGap = 0.1;  // m

// Minimum distance between the linear interpolations of two equally
// sampled trajectories.
double continuous_min_gap(const Trajectory& a, const Trajectory& b);
bool polygon_contains(std::span<const Eigen::Vector2d> polygon, const Eigen::Vector2d& p);

struct OutcomeRecord {
  ScenarioId scenario = ScenarioId::kPP;
  ModelId model = ModelId::kAC;
  int init = 0;
  std::vector<double> types;
  bool success = false;
  bool crash = false;
  bool stuck = false;
  double min_gap = 0.0;
  std::vector<std::vector<int>> actions;  // per stage, per agent
  std::vector<std::vector<Maneuver>> maneuvers;
  std::vector<std::vector<Trajectory>> played;  // per stage, per agent

  std::string to_json() const;
};

// Solver state shared by the runs that start from one init point.
class SimulationContext;

class ScenarioRunner {
 public:
  explicit ScenarioRunner(const ScenarioSpec& spec);
  ~ScenarioRunner();
  ScenarioRunner(const ScenarioRunner&) = delete;
  ScenarioRunner& operator=(const ScenarioRunner&) = delete;

  OutcomeRecord run(const InitPoint& init, ModelId model, std::span<const double> types,
                    std::uint64_t seed);

 private:
  const ScenarioSpec* spec_;
  std::unique_ptr<SimulationContext> ctx_;
};

OutcomeRecord run_scenario(const ScenarioSpec& spec, const InitPoint& init, ModelId model,
                           std::span<const double> types, std::uint64_t seed);

// Scenario predicate on a finished play; crash is evaluated first.
bool scenario_success(const ScenarioSpec& spec, const OutcomeRecord& out);

// Per-node admissible sets of `model` for every agent at `types`. Single-choice
// models give one action per node. Without `allow_fallback` a stage without a
// pure equilibrium throws Error(kNoPureEquilibrium) for the equilibrium models.
SolutionSet solve_model(const GameTree& tree, ModelId model, std::span<const double> types,
                        double lambda, bool allow_fallback = true);

// JSON with the joint history, maneuvers and admissible sets of every node.
std::string solution_json(const GameTree& tree, const SolutionSet& sol,
                          std::span<const double> types);
// One line per node and agent.
std::string solution_table(const GameTree& tree, const SolutionSet& sol);

struct ModelMetrics {
  ModelId model = ModelId::kAC;
  int runs = 0;
  int crashes = 0;
  int stuck = 0;
  double mean_success = 0.0;
  double sd_across_types = 0.0;
  double crash_rate = 0.0;
};

struct SweepOptions {
  std::uint64_t seed = 1;
  int jobs = 1;
  bool keep_runs = true;
};

struct SweepResult {
  ScenarioId scenario = ScenarioId::kPP;
  std::vector<ModelMetrics> metrics;
  std::vector<OutcomeRecord> runs;  // ordered by (model, init, types)
};

// Per-run seed, independent of evaluation order.
std::uint64_t run_seed(std::uint64_t base, int model, int init, int combo);

SweepResult sweep(const ScenarioSpec& spec, const SweepOptions& opts);

// Population standard deviation.
double population_sd(std::span<const double> values);
ModelMetrics summarize(ModelId model, std::span<const OutcomeRecord> runs,
                       int type_combos);

std::string metrics_csv_header();
std::string metrics_csv_row(ScenarioId scenario, const ModelMetrics& m);

// ---------------------------------------------------------------------------
// Synthetic logs

struct SynthesisOptions {
  int games = 100;
  std::uint64_t seed = 1;
  std::optional<ModelId> model;  // default: level-0 with random switching
  std::vector<double> types;     // fixed types for a strategic model
  GameConfig game;
  double lambda = 1.0;
};

// Two-agent left-turn games on crossing lanes, played closed loop.
std::vector<GameRecord> synthesize_records(const SynthesisOptions& opts);

}  // namespace cogdrive

#endif  // COGDRIVE_EVAL_HPP_

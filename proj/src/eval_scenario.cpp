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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "cogdrive/errors.hpp"
#include "cogdrive/eval.hpp"
#include "cogdrive/nonstrategic.hpp"
#include "cogdrive/robust.hpp"
#include "cogdrive/strategic.hpp"

namespace cogdrive {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr double kHalfLane = 1.75;

Path parse_path(const json& j) {
  std::vector<Eigen::Vector2d> pts;
  for (const auto& p : j) pts.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  return Path(std::move(pts));
}

void read_game_config(const json& j, GameConfig& cfg) {
  auto num = [&](const char* key, double& v) {
    if (j.contains(key)) v = j.at(key).get<double>();
  };
  num("horizon", cfg.horizon);
  num("period", cfg.period);
  num("delta", cfg.delta);
  num("alpha", cfg.alpha);
  num("d0", cfg.d0);
  num("progress_cap", cfg.progress_cap);
  if (j.contains("n_samples")) cfg.n_samples = j.at("n_samples").get<int>();
  if (j.contains("continuation_stages")) {
    cfg.continuation_stages = j.at("continuation_stages").get<int>();
  }
  if (j.contains("v_max")) cfg.limits.v_max = j.at("v_max").get<double>();
  auto choice = [&](const char* key, const char* off, const char* on, bool& v) {
    if (!j.contains(key)) return;
    const std::string s = j.at(key).get<std::string>();
    if (s != off && s != on) {
      throw Error(ErrorKind::kConfig, std::string(key) + " must be '" + off + "' or '" + on +
                                          "', got '" + s + "'");
    }
    v = s == on;
  };
  choice("ac_condition_direction", "le", "ge", cfg.flags.ac_condition_ge);
  choice("l1_expectation", "max", "mean", cfg.flags.l1_expectation);
  choice("sspe_safety", "horizon", "step", cfg.flags.sspe_step_level);
  bool at_end = cfg.aggregation == Aggregation::kAtEnd;
  choice("aggregation", "per_step", "at_end", at_end);
  cfg.aggregation = at_end ? Aggregation::kAtEnd : Aggregation::kPerStep;
  if (j.contains("mspe_lhs_safety")) cfg.flags.mspe_lhs_safety = j.at("mspe_lhs_safety").get<bool>();
  if (j.contains("slack")) cfg.flags.robust_slack = j.at("slack").get<int>();
}

int role_index(const ScenarioSpec& s, const std::string& role) {
  for (std::size_t i = 0; i < s.agents.size(); ++i) {
    if (s.agents[i].role == role) return static_cast<int>(i);
  }
  throw Error(ErrorKind::kConfig, "scenario has no '" + role + "' agent");
}

// Last arc length along `p` that lies inside the polygon, or -1.
double exit_s(const Path& p, std::span<const Eigen::Vector2d> poly) {
  double last = -1.0;
  for (double s = 0.0; s <= p.length(); s += 0.1) {
    if (polygon_contains(poly, p.point_at(s))) last = s;
  }
  return last;
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

int sample_uniform(std::span<const int> set, std::mt19937_64& rng) {
  return set[rng() % set.size()];
}

int sample_weighted(std::span<const double> p, std::mt19937_64& rng) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  double acc = 0.0;
  for (std::size_t a = 0; a < p.size(); ++a) {
    acc += p[a];
    if (u < acc) return static_cast<int>(a);
  }
  return static_cast<int>(p.size()) - 1;
}

}  // namespace

// Solver caches of the tree rooted at one init point.
class SimulationContext {
 public:
  int init = -1;
  std::unique_ptr<GameTree> tree;
  bool stuck = false;
  SolverPool pool;
  std::map<std::vector<double>, SolutionSet> qlk;

  void reset(const ScenarioSpec& spec, const InitPoint& p) {
    pool = SolverPool();
    qlk.clear();
    tree.reset();
    stuck = false;
    init = p.index;
    std::vector<Path> paths;
    for (const auto& a : spec.agents) paths.push_back(a.path);
    try {
      tree = std::make_unique<GameTree>(build_game_tree(p.states, paths, spec.game));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kStuck) throw;
      stuck = true;
    }
  }

  int choose(int x, int agent, ModelId model, std::span<const double> types, double lambda,
             std::mt19937_64& rng) {
    const GameTree& t = *tree;
    const GameNode& n = t.node(x);
    const GameConfig& cfg = t.config();
    const double g = types[agent];
    switch (model) {
      case ModelId::kAC:
        return sample_uniform(step_automaton(AutomatonKind::kAC, g, n, agent, cfg).support, rng);
      case ModelId::kNAC:
        return sample_uniform(step_automaton(AutomatonKind::kNAC, g, n, agent, cfg).support, rng);
      case ModelId::kMaxmax:
        return maxmax_action(n, agent, g);
      case ModelId::kLevel1: {
        const auto beliefs = level1_beliefs(tree_history(t, x), agent, t.num_agents(), cfg);
        return pool.of(t).level1(x, agent, g, beliefs).ties[x].front();
      }
      case ModelId::kSSPE:
        return sample_uniform(pool.of(t).sspe(types).admissible[x][agent], rng);
      case ModelId::kMSPE:
        return sample_uniform(pool.of(t).mspe(types).admissible[x][agent], rng);
      case ModelId::kQLk: {
        const std::vector<double> key(types.begin(), types.end());
        auto it = qlk.find(key);
        if (it == qlk.end()) it = qlk.emplace(key, qlk_response(t, lambda, types)).first;
        return sample_weighted(it->second.probabilities[x][agent], rng);
      }
      case ModelId::kRobust: {
        const RobustContext ctx{agent, g, cfg.flags.robust_slack};
        return robust_response(pool, t, x, tree_history(t, x), ctx).action;
      }
    }
    return 0;
  }
};

void read_game_config(const std::string& text, GameConfig& cfg) {
  try {
    read_game_config(json::parse(text), cfg);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("game config: ") + e.what());
  }
}

const char* ScenarioIdName(ScenarioId s) {
  switch (s) {
    case ScenarioId::kIC: return "IC";
    case ScenarioId::kMBI: return "MBI";
    case ScenarioId::kPP: return "PP";
  }
  return "?";
}

ScenarioSpec ScenarioSpec::from_json(const std::string& text) {
  ScenarioSpec s;
  try {
    const json j = json::parse(text);
    const std::string id = j.at("id").get<std::string>();
    if (id == "IC") {
      s.id = ScenarioId::kIC;
    } else if (id == "MBI") {
      s.id = ScenarioId::kMBI;
    } else if (id == "PP") {
      s.id = ScenarioId::kPP;
    } else {
      throw Error(ErrorKind::kConfig, "scenario id must be IC, MBI or PP");
    }
    if (j.contains("game")) read_game_config(j.at("game"), s.game);
    if (j.contains("type_grid")) s.type_grid = j.at("type_grid").get<std::vector<double>>();
    s.game.type_grid = s.type_grid;
    if (j.contains("lambda")) s.lambda = j.at("lambda").get<double>();
    if (j.contains("models")) {
      s.models.clear();
      for (const auto& m : j.at("models")) s.models.push_back(ParseModelId(m.get<std::string>()));
    }
    for (const auto& a : j.at("agents")) {
      ScenarioAgent ag;
      ag.role = a.at("role").get<std::string>();
      ag.path = parse_path(a.at("path"));
      ag.start_s = a.at("start_s").get<std::vector<double>>();
      ag.speeds = a.at("speeds").get<std::vector<double>>();
      if (a.contains("model")) ag.model = ParseModelId(a.at("model").get<std::string>());
      s.agents.push_back(std::move(ag));
    }
    if (j.contains("polygon")) {
      for (const auto& p : j.at("polygon")) {
        s.polygon.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
      }
    }
    if (j.contains("turn_lane")) s.turn_lane = parse_path(j.at("turn_lane"));
    if (j.contains("merge_point")) {
      const Eigen::Vector2d mp(j.at("merge_point").at(0).get<double>(),
                               j.at("merge_point").at(1).get<double>());
      s.merge_s = s.agents.at(role_index(s, "oncoming")).path.project(mp).s;
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("scenario: ") + e.what());
  }
  s.validate();
  return s;
}

ScenarioSpec ScenarioSpec::load(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorKind::kConfig, "cannot open " + file);
  std::ostringstream os;
  os << in.rdbuf();
  return from_json(os.str());
}

void ScenarioSpec::validate() const {
  game.validate();
  const std::size_t want = id == ScenarioId::kIC ? 3 : 2;
  if (agents.size() != want) {
    throw Error(ErrorKind::kConfig, std::string(ScenarioIdName(id)) + " needs " +
                                        std::to_string(want) + " agents");
  }
  for (const auto& a : agents) {
    if (a.start_s.empty() || a.speeds.empty()) {
      throw Error(ErrorKind::kConfig, "agent '" + a.role + "' has an empty initial grid");
    }
  }
  if (models.empty()) throw Error(ErrorKind::kConfig, "no models");
  if (lambda <= 0.0) throw Error(ErrorKind::kConfig, "lambda must be positive");
  switch (id) {
    case ScenarioId::kIC:
      role_index(*this, "left_turn");
      if (polygon.size() < 3) throw Error(ErrorKind::kConfig, "IC needs an intersection polygon");
      break;
    case ScenarioId::kMBI:
      role_index(*this, "merging");
      role_index(*this, "on_lane");
      if (turn_lane.points().empty()) throw Error(ErrorKind::kConfig, "MBI needs a turn lane");
      break;
    case ScenarioId::kPP:
      role_index(*this, "parked");
      role_index(*this, "oncoming");
      break;
  }
}

std::vector<InitPoint> init_grid(const ScenarioSpec& spec) {
  std::vector<std::vector<VehicleState>> per_agent;
  for (const auto& a : spec.agents) {
    std::vector<VehicleState> opts;
    for (double s : a.start_s) {
      for (double v : a.speeds) {
        VehicleState st;
        const Eigen::Vector2d p = a.path.point_at(s);
        st.x = p.x();
        st.y = p.y();
        st.theta = a.path.heading_at(s);
        st.vx = v;
        opts.push_back(st);
      }
    }
    per_agent.push_back(std::move(opts));
  }
  std::vector<InitPoint> out;
  std::vector<std::size_t> pos(per_agent.size(), 0);
  while (true) {
    InitPoint p;
    p.index = static_cast<int>(out.size());
    for (std::size_t i = 0; i < per_agent.size(); ++i) p.states.push_back(per_agent[i][pos[i]]);
    out.push_back(std::move(p));
    int i = static_cast<int>(per_agent.size()) - 1;
    for (; i >= 0; --i) {
      if (++pos[i] < per_agent[i].size()) break;
      pos[i] = 0;
    }
    if (i < 0) break;
  }
  return out;
}

double continuous_min_gap(const Trajectory& a, const Trajectory& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::kMismatchedSampling, "trajectories differ in length");
  }
  double best = std::numeric_limits<double>::infinity();
  const auto& sa = a.samples();
  const auto& sb = b.samples();
  for (std::size_t k = 0; k < sa.size(); ++k) {
    const Eigen::Vector2d r0 = sa[k].state.position() - sb[k].state.position();
    best = std::min(best, r0.norm());
    if (k + 1 == sa.size()) break;
    const Eigen::Vector2d r1 = sa[k + 1].state.position() - sb[k + 1].state.position();
    const Eigen::Vector2d d = r1 - r0;
    const double dd = d.squaredNorm();
    if (dd <= 0.0) continue;
    const double u = std::clamp(-r0.dot(d) / dd, 0.0, 1.0);
    best = std::min(best, (r0 + u * d).norm());
  }
  return best;
}

bool polygon_contains(std::span<const Eigen::Vector2d> poly, const Eigen::Vector2d& p) {
  bool in = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Eigen::Vector2d& a = poly[i];
    const Eigen::Vector2d& b = poly[j];
    if ((a.y() > p.y()) != (b.y() > p.y()) &&
        p.x() < (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x()) {
      in = !in;
    }
  }
  return in;
}

bool scenario_success(const ScenarioSpec& spec, const OutcomeRecord& out) {
  if (out.crash || out.stuck || out.played.empty()) return false;
  const auto& last = out.played.back();
  auto final_state = [&](int i) { return last[i].end(); };
  switch (spec.id) {
    case ScenarioId::kIC: {
      const int lt = role_index(spec, "left_turn");
      const Eigen::Vector2d p = final_state(lt).position();
      const double s_exit = exit_s(spec.agents[lt].path, spec.polygon);
      if (polygon_contains(spec.polygon, p)) return false;
      if (spec.agents[lt].path.project(p).s <= s_exit) return false;
      for (std::size_t i = 0; i < spec.agents.size(); ++i) {
        const VehicleState st = final_state(static_cast<int>(i));
        if (polygon_contains(spec.polygon, st.position()) && st.speed() < kStoppedSpeed) {
          return false;
        }
      }
      return true;
    }
    case ScenarioId::kMBI: {
      const int m = role_index(spec, "merging");
      const int o = role_index(spec, "on_lane");
      const auto pm = spec.turn_lane.project(final_state(m).position());
      const auto po = spec.turn_lane.project(final_state(o).position());
      return pm.lateral <= kHalfLane && pm.s > po.s;
    }
    case ScenarioId::kPP: {
      const int p = role_index(spec, "parked");
      const int c = role_index(spec, "oncoming");
      const Path& lane = spec.agents[c].path;
      for (std::size_t k = 0; k < out.played.size(); ++k) {
        if (out.maneuvers[k][p] != Maneuver::kProceed) continue;
        return lane.project(out.played[k][c].start().position()).s >= spec.merge_s;
      }
      return true;
    }
  }
  return false;
}

ScenarioRunner::ScenarioRunner(const ScenarioSpec& spec)
    : spec_(&spec), ctx_(std::make_unique<SimulationContext>()) {}

ScenarioRunner::~ScenarioRunner() = default;

OutcomeRecord ScenarioRunner::run(const InitPoint& init, ModelId model,
                                  std::span<const double> types, std::uint64_t seed) {
  const ScenarioSpec& spec = *spec_;
  if (types.size() != spec.agents.size()) {
    throw Error(ErrorKind::kConfig, "one type per agent required");
  }
  if (ctx_->init != init.index || !ctx_->tree) ctx_->reset(spec, init);
  OutcomeRecord out;
  out.scenario = spec.id;
  out.model = model;
  out.init = init.index;
  out.types.assign(types.begin(), types.end());
  out.min_gap = std::numeric_limits<double>::infinity();
  if (ctx_->stuck) {
    out.stuck = true;
    return out;
  }
  const GameTree& tree = *ctx_->tree;
  const int n = tree.num_agents();
  std::mt19937_64 rng(seed);
  int x = tree.root();
  while (true) {
    const GameNode& node = tree.node(x);
    std::vector<int> acts(n);
    std::vector<Maneuver> ms(n);
    std::vector<Trajectory> played(n);
    for (int i = 0; i < n; ++i) {
      const ModelId m = spec.agents[i].model.value_or(model);
      acts[i] = ctx_->choose(x, i, m, types, spec.lambda, rng);
      ms[i] = node.maneuver(i, acts[i]);
      played[i] = node.actions[i][acts[i]];
    }
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        out.min_gap = std::min(out.min_gap, continuous_min_gap(played[i], played[j]));
      }
    }
    out.actions.push_back(acts);
    out.maneuvers.push_back(ms);
    out.played.push_back(std::move(played));
    const int c = node.children[node.encode(acts)];
    if (c < 0) {
      out.stuck = node.depth + 1 < tree.stages();
      break;
    }
    x = c;
  }
  out.crash = out.min_gap <= kCrashGap;
  out.success = scenario_success(spec, out);
  return out;
}

OutcomeRecord run_scenario(const ScenarioSpec& spec, const InitPoint& init, ModelId model,
                           std::span<const double> types, std::uint64_t seed) {
  ScenarioRunner runner(spec);
  return runner.run(init, model, types, seed);
}

std::string OutcomeRecord::to_json() const {
  ordered_json j;
  j["scenario"] = ScenarioIdName(scenario);
  j["model"] = ModelIdName(model);
  j["init"] = init;
  j["types"] = types;
  j["success"] = success;
  j["crash"] = crash;
  j["stuck"] = stuck;
  j["min_gap"] = std::isfinite(min_gap) ? ordered_json(min_gap) : ordered_json(nullptr);
  j["actions"] = actions;
  std::vector<std::vector<std::string>> ms;
  for (const auto& st : maneuvers) {
    std::vector<std::string> row;
    for (Maneuver m : st) row.emplace_back(ManeuverName(m));
    ms.push_back(row);
  }
  j["maneuvers"] = ms;
  return j.dump();
}

std::uint64_t run_seed(std::uint64_t base, int model, int init, int combo) {
  std::uint64_t h = splitmix(base);
  h = splitmix(h ^ static_cast<std::uint64_t>(model));
  h = splitmix(h ^ static_cast<std::uint64_t>(init));
  return splitmix(h ^ static_cast<std::uint64_t>(combo));
}

double population_sd(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

ModelMetrics summarize(ModelId model, std::span<const OutcomeRecord> runs, int type_combos) {
  ModelMetrics m;
  m.model = model;
  std::map<std::vector<double>, std::pair<int, int>> by_types;  // success, total
  int successes = 0;
  for (const OutcomeRecord& r : runs) {
    ++m.runs;
    m.crashes += r.crash;
    m.stuck += r.stuck;
    successes += r.success;
    auto& c = by_types[r.types];
    c.first += r.success;
    ++c.second;
  }
  if (m.runs == 0) return m;
  m.mean_success = static_cast<double>(successes) / m.runs;
  m.crash_rate = static_cast<double>(m.crashes) / m.runs;
  std::vector<double> means;
  for (const auto& [t, c] : by_types) means.push_back(static_cast<double>(c.first) / c.second);
  (void)type_combos;
  m.sd_across_types = population_sd(means);
  return m;
}

SweepResult sweep(const ScenarioSpec& spec, const SweepOptions& opts) {
  spec.validate();
  const auto inits = init_grid(spec);
  const auto combos = type_combinations(spec.type_grid, static_cast<int>(spec.agents.size()));
  const std::size_t nm = spec.models.size();
  const std::size_t per_model = inits.size() * combos.size();
  std::vector<OutcomeRecord> runs(nm * per_model);

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    ScenarioRunner runner(spec);
    for (std::size_t p = next++; p < inits.size(); p = next++) {
      for (std::size_t mi = 0; mi < nm; ++mi) {
        for (std::size_t ci = 0; ci < combos.size(); ++ci) {
          const std::uint64_t seed = run_seed(opts.seed, static_cast<int>(spec.models[mi]),
                                              inits[p].index, static_cast<int>(ci));
          OutcomeRecord r = runner.run(inits[p], spec.models[mi], combos[ci], seed);
          r.played.clear();
          runs[mi * per_model + p * combos.size() + ci] = std::move(r);
        }
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(opts.jobs, static_cast<int>(inits.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < jobs; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  SweepResult res;
  res.scenario = spec.id;
  for (std::size_t mi = 0; mi < nm; ++mi) {
    const std::span<const OutcomeRecord> slice(runs.data() + mi * per_model, per_model);
    res.metrics.push_back(summarize(spec.models[mi], slice, static_cast<int>(combos.size())));
  }
  if (opts.keep_runs) res.runs = std::move(runs);
  return res;
}

std::string metrics_csv_header() { return "model,scenario,mean_success,sd_across_types,crash_rate"; }

std::string metrics_csv_row(ScenarioId scenario, const ModelMetrics& m) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s,%s,%.17g,%.17g,%.17g", ModelIdName(m.model),
                ScenarioIdName(scenario), m.mean_success, m.sd_across_types, m.crash_rate);
  return buf;
}

// ---------------------------------------------------------------------------
// Synthetic logs

std::vector<GameRecord> synthesize_records(const SynthesisOptions& opts) {
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> dist(8.0, 30.0);
  std::uniform_real_distribution<double> speed(0.0, 12.0);
  std::uniform_real_distribution<double> angle(0.6, 2.5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  GameConfig cfg = opts.game;
  const auto& grid = cfg.type_grid;
  std::vector<GameRecord> out;
  for (int g = 0; g < opts.games; ++g) {
    std::vector<Path> paths;
    for (double th : {0.0, angle(rng)}) {
      const Eigen::Vector2d d(std::cos(th), std::sin(th));
      paths.emplace_back(std::vector<Eigen::Vector2d>{-300.0 * d, 300.0 * d});
    }
    std::vector<VehicleState> st;
    for (const Path& p : paths) {
      VehicleState s;
      const double at = 300.0 - dist(rng);
      s.x = p.point_at(at).x();
      s.y = p.point_at(at).y();
      s.theta = p.heading_at(at);
      s.vx = speed(rng);
      st.push_back(s);
    }
    const GameTree tree = build_game_tree(st, paths, cfg);
    std::vector<double> types = opts.types;
    std::vector<Level0Agent> level0(2);
    if (types.empty()) {
      for (int i = 0; i < 2; ++i) types.push_back(grid[rng() % grid.size()]);
    }
    for (int i = 0; i < 2; ++i) {
      level0[i].kind = rng() % 2 ? AutomatonKind::kNAC : AutomatonKind::kAC;
      level0[i].gamma = AgentType::checked(types[i]);
      for (int k = 1; k < tree.stages(); ++k) {
        if (unit(rng) < 0.3) {
          level0[i].switch_policy.entries.emplace_back(
              k, rng() % 2 ? AutomatonKind::kNAC : AutomatonKind::kAC);
        }
      }
    }
    SimulationContext ctx;
    ctx.tree = std::make_unique<GameTree>(tree);
    ctx.init = 0;
    GameRecord r;
    r.id = "g" + std::to_string(1000 + g).substr(1);
    r.scenario = "LT";
    r.track_ids = {2 * g + 1, 2 * g + 2};
    r.t0 = 10.0 * g;
    r.dt = cfg.dt;
    r.paths = paths;
    r.samples.assign(2, {});
    int x = ctx.tree->root();
    while (x >= 0) {
      const GameNode& node = ctx.tree->node(x);
      std::vector<int> acts(2);
      for (int i = 0; i < 2; ++i) {
        if (opts.model) {
          acts[i] = ctx.choose(x, i, *opts.model, types, opts.lambda, rng);
        } else {
          acts[i] = sample_uniform(
              step_automaton(level0[i], node.depth, node, i, ctx.tree->config()).support, rng);
        }
        const auto& s = node.actions[i][acts[i]].samples();
        for (std::size_t k = r.samples[i].empty() ? 0 : 1; k < s.size(); ++k) {
          r.samples[i].push_back(s[k].state);
        }
      }
      const int c = node.children[node.encode(acts)];
      if (c < 0 && node.depth + 1 < ctx.tree->stages()) break;
      x = c;
    }
    if (static_cast<int>(r.samples[0].size()) !=
        static_cast<int>(std::lround(cfg.horizon / cfg.dt)) + 1) {
      continue;  // a branch ended early
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace cogdrive

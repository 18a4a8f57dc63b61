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

// cogdrive: solve, simulate, evaluate, oracle-check and synthesize.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cogdrive/errors.hpp"
#include "cogdrive/eval.hpp"
#include "cogdrive/oracle_check.hpp"

namespace cogdrive {
namespace {

constexpr int kConfigSchemaVersion = 1;

enum Exit { kOk = 0, kInternal = 1, kUsage = 2, kSolver = 3, kData = 4 };

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::kConfig:
    case ErrorKind::kPrecondition:
      return kUsage;
    case ErrorKind::kSchema:
    case ErrorKind::kGap:
      return kData;
    default:
      return kSolver;
  }
}

int default_jobs() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

struct RunConfig {
  std::string scenario;
  std::string data;
  std::string manifest;
  std::string out;
  std::string out_dir = ".";
  std::vector<std::string> models;
  std::vector<double> types;
  std::vector<double> grid_types;
  std::optional<double> lambda;
  std::uint64_t seed = 1;
  int jobs = default_jobs();
  int init = 0;
  // Game configuration layered over the scenario's.
  nlohmann::json game = nlohmann::json::object();
  std::string ac_condition_direction;
  std::string l1_expectation;
  std::string sspe_safety;
  std::string aggregation;
  bool mspe_lhs_safety = false;
  std::optional<int> slack;
  std::optional<int> samples;
  std::string witness = "best";
  std::string attribution = "exclusive";
  bool first_stage = false;
  bool fallback = true;
  bool per_game = false;
  int games = 100;
  int instances = 200;
  int max_stages = 3;
  int max_samples = 3;
  bool timings = false;
};

// Reads the JSON config named by --config before the command line is parsed,
// so that flags given on the command line override it.
void load_config(const std::string& file, RunConfig& c) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorKind::kConfig, "cannot open config " + file);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfig, file + ": " + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::kConfig, file + ": expected an object");
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& k = it.key();
      const auto& v = it.value();
      if (k == "scenario") c.scenario = v.get<std::string>();
      else if (k == "data") c.data = v.get<std::string>();
      else if (k == "manifest") c.manifest = v.get<std::string>();
      else if (k == "out") c.out = v.get<std::string>();
      else if (k == "out_dir") c.out_dir = v.get<std::string>();
      else if (k == "model" || k == "models") {
        c.models = v.is_array() ? v.get<std::vector<std::string>>()
                                : std::vector<std::string>{v.get<std::string>()};
      }
      else if (k == "types") c.types = v.get<std::vector<double>>();
      else if (k == "grid_types") c.grid_types = v.get<std::vector<double>>();
      else if (k == "lambda") c.lambda = v.get<double>();
      else if (k == "seed") c.seed = v.get<std::uint64_t>();
      else if (k == "jobs") c.jobs = v.get<int>();
      else if (k == "init") c.init = v.get<int>();
      else if (k == "game") c.game = v;
      else if (k == "ac_condition_direction") c.ac_condition_direction = v.get<std::string>();
      else if (k == "l1_expectation") c.l1_expectation = v.get<std::string>();
      else if (k == "sspe_safety") c.sspe_safety = v.get<std::string>();
      else if (k == "aggregation") c.aggregation = v.get<std::string>();
      else if (k == "mspe_lhs_safety") c.mspe_lhs_safety = v.get<bool>();
      else if (k == "slack") c.slack = v.get<int>();
      else if (k == "samples") c.samples = v.get<int>();
      else if (k == "witness") c.witness = v.get<std::string>();
      else if (k == "attribution") c.attribution = v.get<std::string>();
      else if (k == "first_stage") c.first_stage = v.get<bool>();
      else if (k == "fallback") c.fallback = v.get<bool>();
      else if (k == "per_game") c.per_game = v.get<bool>();
      else if (k == "games") c.games = v.get<int>();
      else if (k == "instances") c.instances = v.get<int>();
      else if (k == "max_stages") c.max_stages = v.get<int>();
      else if (k == "max_samples") c.max_samples = v.get<int>();
      else throw Error(ErrorKind::kConfig, file + ": unknown key '" + k + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfig, file + ": " + e.what());
  }
}

std::optional<std::string> config_arg(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) return std::string(argv[i + 1]);
    if (a.rfind("--config=", 0) == 0) return a.substr(9);
  }
  return std::nullopt;
}

GameConfig game_config(const RunConfig& c, GameConfig cfg) {
  nlohmann::json j = c.game;
  if (!c.ac_condition_direction.empty()) j["ac_condition_direction"] = c.ac_condition_direction;
  if (!c.l1_expectation.empty()) j["l1_expectation"] = c.l1_expectation;
  if (!c.sspe_safety.empty()) j["sspe_safety"] = c.sspe_safety;
  if (!c.aggregation.empty()) j["aggregation"] = c.aggregation;
  if (c.mspe_lhs_safety) j["mspe_lhs_safety"] = true;
  if (c.slack) j["slack"] = *c.slack;
  if (c.samples) j["n_samples"] = *c.samples;
  read_game_config(j.dump(), cfg);
  cfg.validate();
  return cfg;
}

std::vector<ModelId> models_of(const RunConfig& c) {
  std::vector<ModelId> out;
  for (const auto& m : c.models) out.push_back(ParseModelId(m));
  return out;
}

ModelId single_model(const RunConfig& c) {
  if (c.models.size() != 1) throw Error(ErrorKind::kConfig, "expected exactly one --model");
  return ParseModelId(c.models.front());
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorKind::kConfig, "cannot write " + p.string());
  out << text;
}

ScenarioSpec load_scenario(const RunConfig& c) {
  if (c.scenario.empty()) throw Error(ErrorKind::kConfig, "--scenario is required");
  ScenarioSpec spec = ScenarioSpec::load(c.scenario);
  if (!c.grid_types.empty()) spec.type_grid = c.grid_types;
  spec.game = game_config(c, spec.game);
  spec.game.type_grid = spec.type_grid;
  if (c.lambda) spec.lambda = *c.lambda;
  if (!c.models.empty()) spec.models = models_of(c);
  spec.validate();
  return spec;
}

int cmd_solve(const RunConfig& c) {
  const ScenarioSpec spec = load_scenario(c);
  const ModelId model = single_model(c);
  const auto inits = init_grid(spec);
  if (c.init < 0 || c.init >= static_cast<int>(inits.size())) {
    throw Error(ErrorKind::kConfig, "--init must be in [0, " + std::to_string(inits.size()) + ")");
  }
  std::vector<Path> paths;
  for (const auto& a : spec.agents) paths.push_back(a.path);
  const GameTree tree = build_game_tree(inits[c.init].states, paths, spec.game);
  const SolutionSet sol = solve_model(tree, model, c.types, spec.lambda, c.fallback);
  const std::filesystem::path out =
      c.out.empty() ? std::filesystem::path(c.out_dir) / "solution.json" : std::filesystem::path(c.out);
  write_file(out, solution_json(tree, sol, c.types));
  std::cout << "model " << ModelIdName(model) << " scenario " << ScenarioIdName(spec.id)
            << " init " << c.init << " nodes " << tree.size() << '\n'
            << solution_table(tree, sol);
  return kOk;
}

int cmd_simulate(const RunConfig& c) {
  const ScenarioSpec spec = load_scenario(c);
  SweepOptions opts;
  opts.seed = c.seed;
  opts.jobs = c.jobs;
  const SweepResult res = sweep(spec, opts);
  std::ostringstream csv;
  csv << metrics_csv_header() << '\n';
  for (const auto& m : res.metrics) csv << metrics_csv_row(res.scenario, m) << '\n';
  std::ostringstream jsonl;
  for (const auto& r : res.runs) jsonl << r.to_json() << '\n';
  const std::filesystem::path dir(c.out_dir);
  write_file(dir / "metrics.csv", csv.str());
  write_file(dir / "runs.jsonl", jsonl.str());
  std::cout << csv.str();
  return kOk;
}

int cmd_evaluate(const RunConfig& c) {
  if (c.manifest.empty()) throw Error(ErrorKind::kConfig, "--manifest is required");
  if (c.data.empty()) throw Error(ErrorKind::kConfig, "--data is required");
  if (c.models.empty()) throw Error(ErrorKind::kConfig, "--model is required");
  EvalOptions opts;
  opts.game = game_config(c, GameConfig{});
  if (!c.grid_types.empty()) opts.game.type_grid = c.grid_types;
  if (c.lambda) opts.lambda = *c.lambda;
  opts.first_stage_only = c.first_stage;
  opts.witness_all = c.witness == "all";
  opts.attribution = c.attribution == "independent" ? Attribution::kIndependent
                                                    : Attribution::kExclusive;
  const auto records = ingest_trajectories(c.data, c.manifest, opts.game);
  std::cout << "model   match_rate  mean_gamma  matched/games\n";
  std::string json = "[";
  bool first = true;
  for (const MatchReport& r : match_rates(records, models_of(c), opts)) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-7s %.5f     %+.5f    %d/%d\n", ModelIdName(r.model), r.rate,
                  r.mean_gamma, r.matched, r.games);
    std::cout << buf;
    json += (first ? "\n" : ",\n") + r.to_json(c.per_game);
    first = false;
  }
  json += "\n]\n";
  if (!c.out.empty()) write_file(c.out, json);
  return kOk;
}

int cmd_oracle_check(const RunConfig& c) {
  DiffOptions opts;
  opts.instances = c.instances;
  opts.seed = c.seed;
  opts.max_stages = c.max_stages;
  opts.max_samples = c.max_samples;
  const auto rows = run_differential(opts);
  std::cout << format_table(rows, c.timings);
  for (const auto& r : rows) {
    if (!r.passed()) return kSolver;
  }
  return kOk;
}

int cmd_synthesize(const RunConfig& c) {
  SynthesisOptions opts;
  opts.games = c.games;
  opts.seed = c.seed;
  opts.game = game_config(c, GameConfig{});
  if (!c.grid_types.empty()) opts.game.type_grid = c.grid_types;
  if (c.lambda) opts.lambda = *c.lambda;
  if (!c.models.empty()) opts.model = single_model(c);
  opts.types = c.types;
  const auto records = synthesize_records(opts);
  std::ostringstream csv;
  write_trajectory_csv(csv, records);
  const std::filesystem::path dir(c.out_dir);
  write_file(dir / "trajectories.csv", csv.str());
  write_file(dir / "manifest.json", manifest_json(records));
  std::cout << "wrote " << records.size() << " games to " << dir.string() << '\n';
  return kOk;
}

int run(int argc, char** argv) {
  RunConfig c;
  if (auto file = config_arg(argc, argv)) load_config(*file, c);

  CLI::App app{"Game-theoretic driving models: solvers, sweeps and match rates."};
  app.require_subcommand(1);
  app.set_version_flag("--version",
                       "cogdrive config schema " + std::to_string(kConfigSchemaVersion));
  std::string config_file;

  auto common = [&](CLI::App* s) {
    s->add_option("--config", config_file, "JSON config; flags override it");
    s->add_option("--seed", c.seed, "Base seed");
  };
  auto game_flags = [&](CLI::App* s) {
    s->add_option("--samples", c.samples, "Trajectory samples per maneuver");
    s->add_option("--ac-condition-direction", c.ac_condition_direction)
        ->check(CLI::IsMember({"le", "ge"}));
    s->add_option("--l1-expectation", c.l1_expectation)->check(CLI::IsMember({"max", "mean"}));
    s->add_option("--sspe-safety", c.sspe_safety)->check(CLI::IsMember({"horizon", "step"}));
    s->add_option("--aggregation", c.aggregation)->check(CLI::IsMember({"per_step", "at_end"}));
    s->add_flag("--mspe-lhs-safety", c.mspe_lhs_safety);
    s->add_option("--slack", c.slack, "Robust filter: tolerated inconsistent stages")
        ->check(CLI::NonNegativeNumber);
    s->add_option("--lambda", c.lambda, "QLk logit precision")->check(CLI::NonNegativeNumber);
    s->add_option("--grid-types", c.grid_types, "Type grid")->delimiter(',');
  };

  CLI::App* solve = app.add_subcommand("solve", "Admissible actions of one model on one tree");
  common(solve);
  game_flags(solve);
  solve->add_option("--scenario", c.scenario);
  solve->add_option("--model", c.models)->delimiter(',');
  solve->add_option("--types", c.types)->delimiter(',');
  solve->add_option("--init", c.init, "Index into the scenario's init grid");
  solve->add_option("--out", c.out, "Solution JSON (default <out-dir>/solution.json)");
  solve->add_option("--out-dir", c.out_dir);
  solve->add_flag("!--no-fallback", c.fallback, "Fail when a stage has no pure equilibrium");

  CLI::App* sim = app.add_subcommand("simulate", "Closed-loop sweep over a scenario");
  common(sim);
  game_flags(sim);
  sim->add_option("--scenario", c.scenario);
  sim->add_option("--model", c.models)->delimiter(',');
  sim->add_option("--jobs", c.jobs)->check(CLI::PositiveNumber);
  sim->add_option("--out-dir", c.out_dir, "Receives metrics.csv and runs.jsonl");

  CLI::App* ev = app.add_subcommand("evaluate", "Match rates on recorded games");
  common(ev);
  game_flags(ev);
  ev->add_option("--data", c.data, "Trajectory CSV");
  ev->add_option("--manifest", c.manifest, "Game manifest JSON");
  ev->add_option("--model", c.models)->delimiter(',');
  ev->add_option("--witness", c.witness)->check(CLI::IsMember({"best", "all"}));
  ev->add_option("--attribution", c.attribution)
      ->check(CLI::IsMember({"exclusive", "independent"}));
  ev->add_flag("--first-stage", c.first_stage, "Match the first stage only");
  ev->add_flag("--per-game", c.per_game, "Include per-game rows in the JSON report");
  ev->add_option("--out", c.out, "JSON report");

  CLI::App* oc = app.add_subcommand("oracle-check", "Differential test against brute force");
  common(oc);
  oc->add_option("--instances", c.instances)->check(CLI::PositiveNumber);
  oc->add_option("--max-stages", c.max_stages)->check(CLI::Range(1, 3));
  oc->add_option("--max-samples", c.max_samples)->check(CLI::Range(1, 3));
  oc->add_flag("--timings", c.timings, "Add a wall-clock column");

  CLI::App* syn = app.add_subcommand("synthesize", "Synthetic left-turn logs");
  common(syn);
  game_flags(syn);
  syn->add_option("--games", c.games)->check(CLI::PositiveNumber);
  syn->add_option("--model", c.models)->delimiter(',');
  syn->add_option("--types", c.types)->delimiter(',');
  syn->add_option("--out-dir", c.out_dir, "Receives trajectories.csv and manifest.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  if (*solve) return cmd_solve(c);
  if (*sim) return cmd_simulate(c);
  if (*ev) return cmd_evaluate(c);
  if (*oc) return cmd_oracle_check(c);
  return cmd_synthesize(c);
}

}  // namespace
}  // namespace cogdrive

int main(int argc, char** argv) {
  try {
    return cogdrive::run(argc, argv);
  } catch (const cogdrive::Error& e) {
    std::cerr << "cogdrive: " << e.what() << '\n';
    return cogdrive::exit_code(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "cogdrive: " << e.what() << '\n';
    return cogdrive::kUsage;
  } catch (const std::exception& e) {
    std::cerr << "cogdrive: internal error: " << e.what() << '\n';
    return cogdrive::kInternal;
  }
}

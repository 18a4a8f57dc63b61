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

#include "cogdrive/oracle_check.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <sstream>

#include "cogdrive/nonstrategic.hpp"
#include "cogdrive/oracle.hpp"
#include "cogdrive/robust.hpp"
#include "cogdrive/strategic.hpp"

namespace cogdrive {

namespace {

Path lane(double theta) {
  const Eigen::Vector2d d(std::cos(theta), std::sin(theta));
  return Path({-300.0 * d, 300.0 * d});
}

VehicleState on_lane(const Path& p, double s, double speed) {
  VehicleState st;
  const Eigen::Vector2d x = p.point_at(s);
  st.x = x.x();
  st.y = x.y();
  st.theta = p.heading_at(s);
  st.vx = speed;
  return st;
}

struct Case {
  GameTree tree;
  std::vector<double> gammas;
};

Case make_case(std::mt19937_64& rng, const DiffOptions& o) {
  const int stages = 1 + static_cast<int>(rng() % o.max_stages);
  const int samples = 1 + static_cast<int>(rng() % o.max_samples);
  Case c{random_crossing_tree(rng, stages, samples), {}};
  const auto& grid = c.tree.config().type_grid;
  for (int i = 0; i < 2; ++i) c.gammas.push_back(grid[rng() % grid.size()]);
  return c;
}

// Random root-to-leaf node sequence.
std::vector<int> random_path(const GameTree& tree, std::mt19937_64& rng) {
  std::vector<int> out = {tree.root()};
  while (true) {
    const GameNode& n = tree.node(out.back());
    const int j = static_cast<int>(rng() % n.num_joints());
    if (n.children[j] < 0) return out;
    out.push_back(n.children[j]);
  }
}

std::string describe(int idx, const Case& c, const std::string& what) {
  std::ostringstream os;
  os << "instance " << idx << " (stages " << c.tree.stages() << ", gammas " << c.gammas[0]
     << "," << c.gammas[1] << "): " << what;
  return os.str();
}

using Check = std::function<bool(int, Case&, std::mt19937_64&, DiffRow&)>;

DiffRow run(const std::string& name, const DiffOptions& o, std::uint64_t salt,
            const Check& check) {
  DiffRow row;
  row.concept_name = name;
  std::mt19937_64 rng(o.seed * 1000003ULL + salt);
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < o.instances; ++i) {
    Case c = make_case(rng, o);
    ++row.instances;
    if (check(i, c, rng, row)) ++row.agreed;
  }
  row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

bool sets_equal(const GameTree& tree, const SolutionSet& main, const oracle::ActionSets& ref,
                std::string& where) {
  for (int x = 0; x < tree.size(); ++x) {
    for (int i = 0; i < tree.num_agents(); ++i) {
      if (main.admissible[x][i] != ref[x][i]) {
        where = "node " + std::to_string(x) + " agent " + std::to_string(i);
        return false;
      }
    }
  }
  return true;
}

}  // namespace

GameTree random_crossing_tree(std::mt19937_64& rng, int stages, int n_samples,
                              const GameConfig& base) {
  std::uniform_real_distribution<double> dist(6.0, 30.0);
  std::uniform_real_distribution<double> speed(0.0, 12.0);
  std::uniform_real_distribution<double> angle(0.6, 2.5);
  GameConfig cfg = base;
  cfg.n_samples = n_samples;
  cfg.horizon = stages * cfg.period;
  const std::vector<Path> paths = {lane(0.0), lane(angle(rng))};
  std::vector<VehicleState> st;
  for (const Path& p : paths) st.push_back(on_lane(p, 300.0 - dist(rng), speed(rng)));
  return build_game_tree(st, paths, cfg);
}

std::vector<DiffRow> run_differential(const DiffOptions& o) {
  std::vector<DiffRow> rows;

  rows.push_back(run("SPNE", o, 1, [](int idx, Case& c, std::mt19937_64&, DiffRow& row) {
    const SpneResult r = spne(c.tree, c.gammas);
    const bool small = oracle::profile_count(c.tree) <= oracle::kMaxProfiles;
    if (small) {
      ++row.enumerated;
      const auto set = oracle::oracle_spne(c.tree, c.gammas);
      if (set.empty()) return true;  // nothing to be a member of
      const bool member = std::find(set.begin(), set.end(), r.joint) != set.end();
      if (!member && row.first_failure.empty()) {
        row.first_failure = describe(idx, c, "solver profile not in enumerated set");
      }
      return member;
    }
    // The reference set is exactly the profiles passing the deviation check.
    if (r.any_fallback()) return !oracle::is_subgame_perfect(c.tree, r.joint, c.gammas);
    const bool ok = oracle::is_subgame_perfect(c.tree, r.joint, c.gammas);
    if (!ok && row.first_failure.empty()) {
      row.first_failure = describe(idx, c, "profitable one-shot deviation");
    }
    return ok;
  }));

  for (const bool maneuver : {false, true}) {
    rows.push_back(run(maneuver ? "MSPE" : "SSPE", o, maneuver ? 3 : 2,
                       [maneuver](int idx, Case& c, std::mt19937_64&, DiffRow& row) {
      const SpneResult r = spne(c.tree, c.gammas);
      const SolutionSet main = maneuver ? mspe_set(c.tree, r) : sspe_set(c.tree, r);
      const oracle::ActionSets ref = maneuver ? oracle::oracle_mspe(c.tree, r.joint, c.gammas)
                                              : oracle::oracle_sspe(c.tree, r.joint, c.gammas);
      std::string where;
      const bool ok = sets_equal(c.tree, main, ref, where);
      if (!ok && row.first_failure.empty()) row.first_failure = describe(idx, c, where);
      return ok;
    }));
  }

  rows.push_back(run("AC/NAC", o, 4, [](int idx, Case& c, std::mt19937_64&, DiffRow& row) {
    const GameConfig& cfg = c.tree.config();
    for (const GameNode& n : c.tree.nodes()) {
      for (int i = 0; i < 2; ++i) {
        for (double g : cfg.type_grid) {
          const bool ac = step_automaton(AutomatonKind::kAC, g, n, i, cfg).support ==
                          oracle::oracle_automaton(oracle::Kind::kAC, g, n, i, cfg);
          const bool nac = step_automaton(AutomatonKind::kNAC, g, n, i, cfg).support ==
                           oracle::oracle_automaton(oracle::Kind::kNAC, g, n, i, cfg);
          if (!ac || !nac) {
            if (row.first_failure.empty()) {
              row.first_failure = describe(idx, c, "support at node " + std::to_string(n.id));
            }
            return false;
          }
        }
      }
    }
    return true;
  }));

  rows.push_back(run("level-1", o, 5, [](int idx, Case& c, std::mt19937_64& rng, DiffRow& row) {
    SolverPool pool;
    const GameConfig& cfg = c.tree.config();
    for (int x : random_path(c.tree, rng)) {
      for (int i = 0; i < 2; ++i) {
        const History h = tree_history(c.tree, x);
        const auto beliefs = level1_beliefs(h, i, 2, cfg);
        const auto& plan = pool.of(c.tree).level1(x, i, c.gammas[i], beliefs);
        const auto ref = oracle::oracle_level1(c.tree, x, x, i, c.gammas[i]);
        if (plan.ties[x] != ref) {
          if (row.first_failure.empty()) {
            row.first_failure = describe(idx, c, "tie set at node " + std::to_string(x));
          }
          return false;
        }
      }
    }
    return true;
  }));

  rows.push_back(run("robust", o, 6, [](int idx, Case& c, std::mt19937_64& rng, DiffRow& row) {
    SolverPool pool;
    const oracle::EquilibriumFn eq = [&](std::span<const double> g) {
      return pool.of(c.tree).equilibrium(g).joint;
    };
    for (int x : random_path(c.tree, rng)) {
      const History h = tree_history(c.tree, x);
      for (int i = 0; i < 2; ++i) {
        const RobustContext ctx{i, c.gammas[i], 0};
        const RobustDecision d = robust_response(pool, c.tree, x, h, ctx);
        const auto ref = oracle::oracle_robust(c.tree, x, i, c.gammas[i], eq);
        const bool kept = static_cast<int>(d.beliefs[1 - i].size()) == ref.surviving[1 - i];
        if (d.action != ref.action || !kept) {
          if (row.first_failure.empty()) {
            row.first_failure = describe(idx, c, "choice at node " + std::to_string(x));
          }
          return false;
        }
      }
    }
    return true;
  }));
  return rows;
}

std::string format_table(const std::vector<DiffRow>& rows, bool timings) {
  std::ostringstream os;
  os << std::left << std::setw(10) << "concept" << std::setw(11) << "instances"
     << std::setw(8) << "agreed";
  if (timings) os << std::setw(9) << "seconds";
  os << "result\n";
  for (const DiffRow& r : rows) {
    os << std::left << std::setw(10) << r.concept_name << std::setw(11) << r.instances
       << std::setw(8) << r.agreed;
    if (timings) os << std::setw(9) << std::fixed << std::setprecision(2) << r.seconds;
    os << (r.passed() ? "PASS" : "FAIL");
    if (!r.first_failure.empty()) os << "  " << r.first_failure;
    os << '\n';
  }
  return os.str();
}

}  // namespace cogdrive

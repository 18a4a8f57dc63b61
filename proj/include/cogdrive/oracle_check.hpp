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

#ifndef COGDRIVE_ORACLE_CHECK_HPP_
#define COGDRIVE_ORACLE_CHECK_HPP_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "cogdrive/game_core.hpp"

namespace cogdrive {

// Two agents on straight crossing lanes with random approach distances,
// speeds and crossing angle.
GameTree random_crossing_tree(std::mt19937_64& rng, int stages, int n_samples,
                              const GameConfig& base = {});

struct DiffOptions {
  int instances = 200;  // per concept
  std::uint64_t seed = 1;
  int max_stages = 3;
  int max_samples = 3;  // trajectories per maneuver
};

struct DiffRow {
  std::string concept_name;
  int instances = 0;
  int agreed = 0;
  int enumerated = 0;  // SPNE rows: trees small enough for full enumeration
  double seconds = 0.0;
  std::string first_failure;

  bool passed() const { return agreed == instances; }
};

// Main solvers against the brute-force references on random trees.
std::vector<DiffRow> run_differential(const DiffOptions& opts);

// Without `timings` the table depends only on the options.
std::string format_table(const std::vector<DiffRow>& rows, bool timings = true);

}  // namespace cogdrive

#endif  // COGDRIVE_ORACLE_CHECK_HPP_

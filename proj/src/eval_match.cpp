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
#include <cmath>
#include <map>
#include <memory>
#include <numeric>

#include "json.hpp"

#include "cogdrive/errors.hpp"
#include "cogdrive/eval.hpp"
#include "cogdrive/nonstrategic.hpp"
#include "cogdrive/robust.hpp"
#include "cogdrive/strategic.hpp"

namespace cogdrive {

namespace {

// One re-anchored tree per stage, rooted at the observed states.
struct PreparedGame {
  std::vector<std::unique_ptr<GameTree>> trees;
  std::vector<std::vector<Maneuver>> maneuvers;  // per stage, per agent

  int stages() const { return static_cast<int>(maneuvers.size()); }
  bool complete() const { return static_cast<int>(trees.size()) == stages(); }

  History history(int k) const {
    History h;
    for (int j = 0; j < k; ++j) {
      HistoryStep step;
      step.tree = trees[j].get();
      step.node = 0;
      step.actions.assign(maneuvers[j].size(), -1);
      step.maneuvers = maneuvers[j];
      h.push_back(std::move(step));
    }
    return h;
  }
};

PreparedGame prepare(const GameRecord& r, const GameConfig& cfg) {
  PreparedGame g;
  g.maneuvers = observed_maneuvers(r, cfg);
  const int per_stage = static_cast<int>(std::lround(cfg.period / r.dt));
  for (int k = 0; k < cfg.stages(); ++k) {
    std::vector<VehicleState> st;
    for (const auto& s : r.samples) st.push_back(s[k * per_stage]);
    try {
      g.trees.push_back(std::make_unique<GameTree>(
          build_game_tree(st, r.paths, cfg, cfg.stages() - k)));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kStuck && e.kind() != ErrorKind::kPrecondition) throw;
      break;
    }
  }
  return g;
}

bool offers(const GameNode& n, int agent, std::span<const int> set, Maneuver m) {
  return std::any_of(set.begin(), set.end(), [&](int a) { return n.maneuver(agent, a) == m; });
}

double abs_sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

class GameMatcher {
 public:
  GameMatcher(const PreparedGame& g, const EvalOptions& o) : g_(g), o_(o) {
    n_ = g.trees.empty() ? 0 : g.trees[0]->num_agents();
    s_ = o.subject;
    combos_ = type_combinations(o.game.type_grid, n_);
    order_.resize(combos_.size());
    std::iota(order_.begin(), order_.end(), 0);
    std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
      return abs_sum(combos_[a]) < abs_sum(combos_[b]);
    });
    last_ = o.first_stage_only ? 1 : g.stages();
  }

  GameMatch run(ModelId model) {
    GameMatch m;
    if (n_ > 0) {
      for (const auto& st : g_.maneuvers) m.observed.push_back(st[s_]);
    }
    if (!g_.complete() && static_cast<int>(g_.trees.size()) < last_) return m;
    if (model == ModelId::kQLk) return qlk(std::move(m));
    if (model == ModelId::kNAC && o_.attribution == Attribution::kExclusive) {
      return switching_nac(std::move(m));
    }
    for (std::size_t idx : order_) {
      bool ok = true;
      for (int k = 0; k < last_ && ok; ++k) {
        const GameNode& root = g_.trees[k]->node(0);
        ok = offers(root, s_, predicted(model, k, combos_[idx]), g_.maneuvers[k][s_]);
      }
      if (ok) record(m, combos_[idx]);
      if (ok && !o_.witness_all) break;
    }
    return m;
  }

 private:
  void record(GameMatch& m, const std::vector<double>& combo) const {
    if (!m.matched) m.witness = combo;
    m.matched = true;
    if (o_.witness_all) m.witnesses.push_back(combo);
  }

  std::vector<int> predicted(ModelId model, int k, const std::vector<double>& types) {
    const GameTree& tree = *g_.trees[k];
    const GameNode& root = tree.node(0);
    const GameConfig& cfg = tree.config();
    const double g = types[s_];
    switch (model) {
      case ModelId::kAC:
        return step_automaton(AutomatonKind::kAC, g, root, s_, cfg).support;
      case ModelId::kNAC:
        return step_automaton(AutomatonKind::kNAC, g, root, s_, cfg).support;
      case ModelId::kMaxmax:
        return maxmax_argmax(root, s_, g);
      case ModelId::kLevel1: {
        const auto beliefs = level1_beliefs(g_.history(k), s_, n_, cfg);
        return pool_.of(tree).level1(0, s_, g, beliefs).ties[0];
      }
      case ModelId::kSSPE:
        return pool_.of(tree).sspe(types).admissible[0][s_];
      case ModelId::kMSPE:
        return pool_.of(tree).mspe(types).admissible[0][s_];
      case ModelId::kRobust: {
        const auto key = std::make_pair(k, g);
        auto it = robust_.find(key);
        if (it == robust_.end()) {
          const RobustContext ctx{s_, g, cfg.flags.robust_slack};
          const RobustDecision d = robust_response(pool_, tree, 0, g_.history(k), ctx);
          const double top = *std::max_element(d.score.begin(), d.score.end());
          std::vector<int> best;
          for (std::size_t a = 0; a < d.score.size(); ++a) {
            if (d.score[a] >= top - kTieEps) best.push_back(static_cast<int>(a));
          }
          it = robust_.emplace(key, std::move(best)).first;
        }
        return it->second;
      }
      case ModelId::kQLk:
        break;
    }
    throw Error(ErrorKind::kPrecondition, "set-valued prediction for a mixed model");
  }

  // Probability of the subject's observed maneuvers under QLk.
  GameMatch qlk(GameMatch m) {
    double best = -1.0;
    for (std::size_t idx : order_) {
      double p = 1.0;
      for (int k = 0; k < last_; ++k) {
        const GameTree& tree = *g_.trees[k];
        const SolutionSet sol = qlk_response(tree, o_.lambda, combos_[idx]);
        double pk = 0.0;
        const auto& probs = sol.probabilities[0][s_];
        for (std::size_t a = 0; a < probs.size(); ++a) {
          if (tree.node(0).maneuver(s_, static_cast<int>(a)) == g_.maneuvers[k][s_]) {
            pk += probs[a];
          }
        }
        p *= pk;
      }
      const bool ok = p >= 0.5;
      if (ok && !m.matched) m.probability = p;
      if (!m.matched) best = std::max(best, p);
      if (ok) record(m, combos_[idx]);
      if (ok && !o_.witness_all) break;
    }
    if (!m.matched) m.probability = best;
    return m;
  }

  // Games the accommodating automaton cannot explain at one fixed type, but a
  // level-0 agent switching between the automata (one type per automaton) can.
  GameMatch switching_nac(GameMatch m) {
    if (run(ModelId::kAC).matched) return m;
    const auto& grid = o_.game.type_grid;
    std::vector<std::pair<double, double>> pairs;  // (nac, ac)
    for (double gn : grid) {
      for (double ga : grid) pairs.emplace_back(gn, ga);
    }
    std::stable_sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
      return std::abs(a.first) + std::abs(a.second) < std::abs(b.first) + std::abs(b.second);
    });
    std::vector<double> base = combos_[order_.front()];
    for (const auto& [gn, ga] : pairs) {
      bool ok = true;
      for (int k = 0; k < last_ && ok; ++k) {
        const GameTree& tree = *g_.trees[k];
        const GameNode& root = tree.node(0);
        const Maneuver obs = g_.maneuvers[k][s_];
        ok = offers(root, s_,
                    step_automaton(AutomatonKind::kNAC, gn, root, s_, tree.config()).support,
                    obs) ||
             offers(root, s_,
                    step_automaton(AutomatonKind::kAC, ga, root, s_, tree.config()).support,
                    obs);
      }
      if (!ok) continue;
      std::vector<double> w = base;
      w[s_] = gn;
      record(m, w);
      if (!o_.witness_all) break;
    }
    return m;
  }

  const PreparedGame& g_;
  const EvalOptions& o_;
  int n_ = 0;
  int s_ = 0;
  int last_ = 0;
  std::vector<std::vector<double>> combos_;
  std::vector<std::size_t> order_;
  SolverPool pool_;
  std::map<std::pair<int, double>, std::vector<int>> robust_;
};

}  // namespace

std::vector<std::vector<double>> type_combinations(std::span<const double> grid, int agents) {
  std::vector<std::vector<double>> out;
  if (grid.empty() || agents <= 0) return out;
  std::vector<std::size_t> pos(agents, 0);
  while (true) {
    std::vector<double> c(agents);
    for (int i = 0; i < agents; ++i) c[i] = grid[pos[i]];
    out.push_back(std::move(c));
    int i = agents - 1;
    for (; i >= 0; --i) {
      if (++pos[i] < grid.size()) break;
      pos[i] = 0;
    }
    if (i < 0) break;
  }
  return out;
}

std::vector<MatchReport> match_rates(const std::vector<GameRecord>& records,
                                     std::span<const ModelId> models, const EvalOptions& opts) {
  opts.game.validate();
  std::vector<MatchReport> reps(models.size());
  std::vector<double> gamma_sum(models.size(), 0.0);
  for (std::size_t k = 0; k < models.size(); ++k) {
    reps[k].model = models[k];
    reps[k].lambda = models[k] == ModelId::kQLk ? opts.lambda : 0.0;
  }
  for (const GameRecord& r : records) {
    if (opts.subject < 0 || opts.subject >= static_cast<int>(r.samples.size())) {
      throw Error(ErrorKind::kConfig, "subject index outside game " + r.id);
    }
    const PreparedGame g = prepare(r, opts.game);
    GameMatcher matcher(g, opts);
    for (std::size_t k = 0; k < models.size(); ++k) {
      GameMatch m = matcher.run(models[k]);
      m.game_id = r.id;
      MatchReport& rep = reps[k];
      ++rep.games;
      if (m.matched) {
        ++rep.matched;
        gamma_sum[k] += m.witness[opts.subject];
      }
      rep.per_game.push_back(std::move(m));
    }
  }
  for (std::size_t k = 0; k < models.size(); ++k) {
    MatchReport& rep = reps[k];
    rep.rate = rep.games ? static_cast<double>(rep.matched) / rep.games : 0.0;
    rep.mean_gamma = rep.matched ? gamma_sum[k] / rep.matched : 0.0;
  }
  return reps;
}

MatchReport match_rate(const std::vector<GameRecord>& records, ModelId model,
                       const EvalOptions& opts) {
  const ModelId one[] = {model};
  return std::move(match_rates(records, one, opts).front());
}

std::string MatchReport::to_json(bool with_games) const {
  nlohmann::ordered_json j;
  j["model"] = ModelIdName(model);
  if (model == ModelId::kQLk) j["lambda"] = lambda;
  j["games"] = games;
  j["matched"] = matched;
  j["rate"] = rate;
  j["mean_gamma"] = mean_gamma;
  if (with_games) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const GameMatch& m : per_game) {
      nlohmann::ordered_json g;
      g["id"] = m.game_id;
      g["matched"] = m.matched;
      g["witness"] = m.witness;
      if (!m.witnesses.empty()) g["witnesses"] = m.witnesses;
      if (m.probability >= 0.0) g["probability"] = m.probability;
      std::vector<std::string> obs;
      for (Maneuver x : m.observed) obs.emplace_back(ManeuverName(x));
      g["observed"] = obs;
      arr.push_back(g);
    }
    j["per_game"] = arr;
  }
  return j.dump();
}

}  // namespace cogdrive

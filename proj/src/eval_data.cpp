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
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "cogdrive/errors.hpp"
#include "cogdrive/eval.hpp"

namespace cogdrive {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr double kTimeEps = 1e-9;
constexpr double kPathBack = 50.0;
constexpr double kPathAhead = 300.0;
constexpr double kPathSpacing = 0.5;

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string read_file(const std::string& file, ErrorKind kind) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(kind, "cannot open " + file);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, long row) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) {
    throw Error(ErrorKind::kSchema, "row " + std::to_string(row) + ": bad number '" + s + "'");
  }
  return v;
}

long parse_long(const std::string& s, long row) {
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw Error(ErrorKind::kSchema, "row " + std::to_string(row) + ": bad integer '" + s + "'");
  }
  return v;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double unwrap_near(double a, double ref) {
  while (a - ref > M_PI) a -= 2.0 * M_PI;
  while (a - ref < -M_PI) a += 2.0 * M_PI;
  return a;
}

VehicleState lerp(const VehicleState& a, const VehicleState& b, double w) {
  auto mix = [w](double x, double y) { return x + (y - x) * w; };
  VehicleState s;
  s.x = mix(a.x, b.x);
  s.y = mix(a.y, b.y);
  s.vx = mix(a.vx, b.vx);
  s.vy = mix(a.vy, b.vy);
  s.ax = mix(a.ax, b.ax);
  s.ay = mix(a.ay, b.ay);
  s.theta = mix(a.theta, unwrap_near(b.theta, a.theta));
  return s;
}

// Centerline through the observed positions, extended both ways.
Path path_from_samples(const std::vector<VehicleState>& st) {
  std::vector<Eigen::Vector2d> pts;
  for (const VehicleState& s : st) {
    if (pts.empty() || (s.position() - pts.back()).norm() >= kPathSpacing) {
      pts.push_back(s.position());
    }
  }
  const Eigen::Vector2d h0(std::cos(st.front().theta), std::sin(st.front().theta));
  Eigen::Vector2d h1(std::cos(st.back().theta), std::sin(st.back().theta));
  if (pts.size() >= 2) {
    const Eigen::Vector2d d = pts.back() - pts[pts.size() - 2];
    h1 = d / d.norm();
  }
  std::vector<Eigen::Vector2d> out;
  out.push_back(pts.front() - kPathBack * h0);
  out.insert(out.end(), pts.begin(), pts.end());
  out.push_back(pts.back() + kPathAhead * h1);
  return Path(std::move(out));
}

std::vector<Path> parse_paths(const json& j) {
  std::vector<Path> out;
  for (const auto& poly : j) {
    std::vector<Eigen::Vector2d> pts;
    for (const auto& p : poly) pts.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    out.emplace_back(std::move(pts));
  }
  return out;
}

}  // namespace

const char* ModelIdName(ModelId m) {
  switch (m) {
    case ModelId::kAC: return "AC";
    case ModelId::kNAC: return "NAC";
    case ModelId::kMaxmax: return "maxmax";
    case ModelId::kLevel1: return "level1";
    case ModelId::kSSPE: return "SSPE";
    case ModelId::kMSPE: return "MSPE";
    case ModelId::kQLk: return "QLk";
    case ModelId::kRobust: return "robust";
  }
  return "?";
}

std::string ModelList() {
  return "level1 (dlk), sspe, mspe, qlk, robust; baselines ac, nac, maxmax";
}

ModelId ParseModelId(const std::string& name) {
  const std::string n = lower(name);
  for (ModelId m : {ModelId::kAC, ModelId::kNAC, ModelId::kMaxmax, ModelId::kLevel1,
                    ModelId::kSSPE, ModelId::kMSPE, ModelId::kQLk, ModelId::kRobust}) {
    if (n == lower(ModelIdName(m))) return m;
  }
  if (n == "dlk") return ModelId::kLevel1;
  throw Error(ErrorKind::kConfig, "unknown model '" + name + "'; expected one of " + ModelList());
}

std::vector<ManifestEntry> parse_manifest(const std::string& text) {
  std::vector<ManifestEntry> out;
  try {
    const json j = json::parse(text);
    for (const auto& g : j.at("games")) {
      ManifestEntry e;
      e.id = g.at("id").get<std::string>();
      e.scenario = g.at("scenario").get<std::string>();
      if (e.scenario != "LT" && e.scenario != "RT") {
        throw Error(ErrorKind::kConfig, "game " + e.id + ": scenario must be LT or RT");
      }
      e.agents = g.at("agents").get<std::vector<int>>();
      e.t0 = g.at("t0_s").get<double>();
      if (g.contains("paths")) e.paths = parse_paths(g.at("paths"));
      if (e.agents.empty()) throw Error(ErrorKind::kConfig, "game " + e.id + " has no agents");
      if (!e.paths.empty() && e.paths.size() != e.agents.size()) {
        throw Error(ErrorKind::kConfig, "game " + e.id + ": one path per agent");
      }
      out.push_back(std::move(e));
    }
  } catch (const json::exception& ex) {
    throw Error(ErrorKind::kConfig, std::string("manifest: ") + ex.what());
  }
  return out;
}

std::vector<ManifestEntry> read_manifest(const std::string& file) {
  return parse_manifest(read_file(file, ErrorKind::kConfig));
}

std::vector<TrackSample> parse_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::kSchema, "empty trajectory file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTrajectoryHeader) {
    throw Error(ErrorKind::kSchema, "header must be '" + std::string(kTrajectoryHeader) + "'");
  }
  std::vector<TrackSample> out;
  long row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 10) {
      throw Error(ErrorKind::kSchema, "row " + std::to_string(row) + ": expected 10 fields");
    }
    TrackSample s;
    s.track_id = static_cast<int>(parse_long(f[0], row));
    s.frame = parse_long(f[1], row);
    s.t = parse_double(f[2], row);
    s.state.x = parse_double(f[3], row);
    s.state.y = parse_double(f[4], row);
    s.state.vx = parse_double(f[5], row);
    s.state.vy = parse_double(f[6], row);
    s.state.ax = parse_double(f[7], row);
    s.state.ay = parse_double(f[8], row);
    s.state.theta = parse_double(f[9], row);
    out.push_back(s);
  }
  return out;
}

std::vector<GameRecord> ingest_trajectories(std::istream& csv,
                                            const std::vector<ManifestEntry>& manifest,
                                            const GameConfig& cfg) {
  std::map<int, std::vector<TrackSample>> tracks;
  for (TrackSample& s : parse_trajectory_csv(csv)) tracks[s.track_id].push_back(s);
  for (auto& [id, v] : tracks) {
    std::sort(v.begin(), v.end(), [](const TrackSample& a, const TrackSample& b) {
      return a.t != b.t ? a.t < b.t : a.frame < b.frame;
    });
  }
  const int steps = static_cast<int>(std::lround(cfg.horizon / cfg.dt));
  std::vector<GameRecord> out;
  for (const ManifestEntry& e : manifest) {
    GameRecord r;
    r.id = e.id;
    r.scenario = e.scenario;
    r.track_ids = e.agents;
    r.t0 = e.t0;
    r.dt = cfg.dt;
    for (int track : e.agents) {
      const auto it = tracks.find(track);
      if (it == tracks.end()) {
        throw Error(ErrorKind::kGap, "game " + e.id + ": no rows for track " + std::to_string(track));
      }
      const auto& v = it->second;
      const double t1 = e.t0 + steps * cfg.dt;
      if (v.front().t > e.t0 + kTimeEps || v.back().t < t1 - kTimeEps) {
        throw Error(ErrorKind::kGap, "game " + e.id + ": track " + std::to_string(track) +
                                         " does not cover the horizon");
      }
      for (std::size_t k = 1; k < v.size(); ++k) {
        if (v[k].t < e.t0 - kMaxFrameGap || v[k - 1].t > t1 + kMaxFrameGap) continue;
        if (v[k].t - v[k - 1].t > kMaxFrameGap + kTimeEps) {
          throw Error(ErrorKind::kGap, "game " + e.id + ": track " + std::to_string(track) +
                                           " misses frames after t=" + fmt(v[k - 1].t));
        }
      }
      std::vector<VehicleState> states;
      std::size_t j = 0;
      for (int k = 0; k <= steps; ++k) {
        const double t = e.t0 + k * cfg.dt;
        while (j + 1 < v.size() && v[j + 1].t <= t + kTimeEps) ++j;
        if (std::abs(v[j].t - t) <= kTimeEps || j + 1 == v.size()) {
          states.push_back(v[j].state);
        } else {
          const double w = (t - v[j].t) / (v[j + 1].t - v[j].t);
          states.push_back(lerp(v[j].state, v[j + 1].state, w));
        }
      }
      r.samples.push_back(std::move(states));
    }
    if (!e.paths.empty()) {
      r.paths = e.paths;
    } else {
      for (const auto& s : r.samples) r.paths.push_back(path_from_samples(s));
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<GameRecord> ingest_trajectories(const std::string& csv_file,
                                            const std::string& manifest_file,
                                            const GameConfig& cfg) {
  const auto manifest = read_manifest(manifest_file);
  std::ifstream in(csv_file, std::ios::binary);
  if (!in) throw Error(ErrorKind::kConfig, "cannot open " + csv_file);
  return ingest_trajectories(in, manifest, cfg);
}

void write_trajectory_csv(std::ostream& out, const std::vector<GameRecord>& records) {
  out << kTrajectoryHeader << '\n';
  for (const GameRecord& r : records) {
    for (std::size_t i = 0; i < r.track_ids.size(); ++i) {
      for (std::size_t k = 0; k < r.samples[i].size(); ++k) {
        const VehicleState& s = r.samples[i][k];
        const double t = r.t0 + static_cast<double>(k) * r.dt;
        out << r.track_ids[i] << ',' << std::lround(t / r.dt) << ',' << fmt(t) << ','
            << fmt(s.x) << ',' << fmt(s.y) << ',' << fmt(s.vx) << ',' << fmt(s.vy) << ','
            << fmt(s.ax) << ',' << fmt(s.ay) << ',' << fmt(s.theta) << '\n';
      }
    }
  }
}

std::string manifest_json(const std::vector<GameRecord>& records) {
  ordered_json games = ordered_json::array();
  for (const GameRecord& r : records) {
    ordered_json g;
    g["id"] = r.id;
    g["scenario"] = r.scenario;
    g["agents"] = r.track_ids;
    g["t0_s"] = r.t0;
    ordered_json paths = ordered_json::array();
    for (const Path& p : r.paths) {
      ordered_json poly = ordered_json::array();
      for (const auto& q : p.points()) poly.push_back({q.x(), q.y()});
      paths.push_back(poly);
    }
    g["paths"] = paths;
    games.push_back(g);
  }
  ordered_json root;
  root["games"] = games;
  return root.dump(1) + "\n";
}

Maneuver classify_maneuver(std::span<const VehicleState> segment, double duration) {
  if (segment.empty()) throw Error(ErrorKind::kPrecondition, "empty segment");
  return classify_speed_change(segment.front().speed(), segment.back().speed(), duration);
}

std::vector<std::vector<Maneuver>> observed_maneuvers(const GameRecord& record,
                                                      const GameConfig& cfg) {
  const int per_stage = static_cast<int>(std::lround(cfg.period / record.dt));
  std::vector<std::vector<Maneuver>> out(cfg.stages());
  for (int k = 0; k < cfg.stages(); ++k) {
    for (const auto& s : record.samples) {
      const std::span<const VehicleState> seg(s.data() + k * per_stage, per_stage + 1);
      out[k].push_back(classify_maneuver(seg, cfg.period));
    }
  }
  return out;
}

}  // namespace cogdrive

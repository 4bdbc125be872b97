// Copyright 2026 The TERP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Per-episode audit dump: the scenario, the executed trajectory, live metrics
// and, for the replanning planners, every frame's grids and waypoint record.
// Metrics can be recomputed from the dump alone.

#pragma once

#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "terp/attention.hpp"
#include "terp/episode.hpp"
#include "terp/errors.hpp"
#include "terp/grid_io.hpp"
#include "terp/metrics.hpp"
#include "terp/observation.hpp"
#include "terp/scenario.hpp"

namespace terp {

inline constexpr const char* kTrajectoryHeader = "t,x,y,heading,roll,pitch,v,omega";

inline std::string format_trajectory(const std::vector<RobotState>& states) {
  std::string out = std::string(kTrajectoryHeader) + "\n";
  for (const RobotState& s : states) {
    const double row[] = {s.t, s.pos.x, s.pos.y, s.heading, s.roll, s.pitch, s.v, s.omega};
    for (std::size_t k = 0; k < std::size(row); ++k) {
      if (k) out += ',';
      out += format_number(row[k]);
    }
    out += '\n';
  }
  return out;
}

/// Poses from a trajectory CSV written by format_trajectory.
inline std::vector<Pose> parse_trajectory(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kTrajectoryHeader) {
    throw FormatError("trajectory: bad header");
  }
  std::vector<Pose> poses;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> v;
    std::size_t pos = 0;
    while (true) {
      const std::size_t comma = line.find(',', pos);
      v.push_back(parse_number(std::string_view(line).substr(pos, comma - pos)));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (v.size() != 8) throw FormatError("trajectory: expected 8 fields");
    poses.push_back({{v[1], v[2]}, v[3]});
  }
  if (poses.empty()) throw FormatError("trajectory: no poses");
  return poses;
}

inline json metrics_json(const EpisodeMetrics& m) {
  return {{"success", m.success},
          {"failure_reason", m.failure_reason},
          {"ceg", m.ceg},
          {"norm_length", m.norm_length},
          {"heading_dev", m.heading_dev}};
}

inline json cells_json(const std::vector<CellIndex>& cells) {
  json out = json::array();
  for (const CellIndex c : cells) out.push_back({c.i, c.j});
  return out;
}

inline json frame_json(const FrameRecord& f) {
  json j = {{"index", f.index},
            {"t", f.state.t},
            {"pose", {{"x", f.state.pos.x}, {"y", f.state.pos.y}, {"heading", f.state.heading}}},
            {"radius", f.radius},
            {"observation", build_observation(f.state, f.normalized, f.heading_gradient)}};
  if (f.plan) {
    const WaypointPlan& p = *f.plan;
    json candidates = json::array();
    for (const Candidate& c : p.candidates) candidates.push_back({c.cell.i, c.cell.j, c.cost});
    j["plan"] = {{"cell", {p.cell.i, p.cell.j}},
                 {"waypoint", {p.waypoint.x, p.waypoint.y}},
                 {"cost", p.cost},
                 {"generation", p.generation},
                 {"radius", p.radius},
                 {"radius_halved", p.radius_halved},
                 {"candidates", std::move(candidates)},
                 {"least_cost", cells_json(p.least_cost)},
                 {"path", cells_json(p.path)}};
  } else {
    j["plan"] = nullptr;
  }
  return j;
}

inline std::string frame_dir_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%06d", index);
  return buf;
}

inline void write_audit(const std::filesystem::path& dir, const Scenario& sc,
                        const EpisodeResult& r, const EpisodeMetrics& m) {
  std::filesystem::create_directories(dir);
  write_text_file(dir / "scenario.json", to_json(sc).dump(2) + "\n");
  write_text_file(dir / "trajectory.csv", format_trajectory(r.trajectory));
  json mj = metrics_json(m);
  mj["planner"] = to_string(r.planner);
  mj["frames"] = r.frame_count;
  write_text_file(dir / "metrics.json", mj.dump(2) + "\n");
  for (const FrameRecord& f : r.frames) {
    const std::filesystem::path fd = dir / "frames" / frame_dir_name(f.index);
    std::filesystem::create_directories(fd);
    write_grid_file(fd / "elevation.txt", f.elevation.height);
    write_grid_file(fd / "normalized.txt", f.normalized.height);
    save_mask(fd / "mask.txt", f.mask);
    write_grid_file(fd / "costmap.txt", f.costmap.cost);
    write_text_file(fd / "frame.json", frame_json(f).dump(2) + "\n");
  }
}

struct AuditCheck {
  std::filesystem::path dir;
  EpisodeMetrics stored;
  EpisodeMetrics recomputed;
  bool match = false;
};

/// Recomputes metrics from one episode directory and compares them with the
/// stored values exactly.
inline AuditCheck check_audit(const std::filesystem::path& dir) {
  AuditCheck c;
  c.dir = dir;
  const Scenario sc = load_scenario(dir / "scenario.json");
  const std::vector<Pose> poses = parse_trajectory(read_text_file(dir / "trajectory.csv"));
  json mj;
  try {
    mj = json::parse(read_text_file(dir / "metrics.json"));
    c.stored.success = mj.at("success").get<bool>();
    c.stored.failure_reason = mj.at("failure_reason").get<std::string>();
    c.stored.ceg = mj.at("ceg").get<double>();
    c.stored.norm_length = mj.at("norm_length").get<double>();
    c.stored.heading_dev = mj.at("heading_dev").get<double>();
  } catch (const json::exception& e) {
    throw FormatError(dir.string() + "/metrics.json: " + e.what());
  }
  c.recomputed = compute_metrics(poses, sc.world, sc.start, sc.goal);
  c.recomputed.success = c.stored.success;
  c.recomputed.failure_reason = c.stored.failure_reason;
  c.match = c.recomputed.ceg == c.stored.ceg &&
            c.recomputed.norm_length == c.stored.norm_length &&
            c.recomputed.heading_dev == c.stored.heading_dev;
  return c;
}

/// Episode directories below `root` (or `root` itself), sorted by path.
inline std::vector<std::filesystem::path> audit_episodes(const std::filesystem::path& root) {
  std::vector<std::filesystem::path> out;
  if (std::filesystem::exists(root / "metrics.json")) return {root};
  if (!std::filesystem::is_directory(root)) throw ConfigError("no audit directory " + root.string());
  for (const auto& e : std::filesystem::directory_iterator(root)) {
    if (e.is_directory() && std::filesystem::exists(e.path() / "metrics.json")) {
      out.push_back(e.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace terp

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

// Dynamic-window path tracker. Follows the least-cost cell path with
// velocities reachable under the acceleration limits and never selects a
// rollout that touches a blocked cell of the planning frame's cost-map.

#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "terp/grid.hpp"
#include "terp/terrain.hpp"

namespace terp {

struct TrackerConfig {
  double horizon = 1.5;
  int v_samples = 6;
  int omega_samples = 11;
  double lookahead = 1.0;
  double w_deviation = 1.0;
  double w_heading = 0.5;
  double w_velocity = 0.3;
};

struct Command {
  double v = 0.0;
  double omega = 0.0;
};

struct VelocityWindow {
  double v_lo = 0.0;
  double v_hi = 0.0;
  double omega_lo = 0.0;
  double omega_hi = 0.0;

  bool contains(const Command& c, double slack = 1e-9) const {
    return c.v >= v_lo - slack && c.v <= v_hi + slack &&
           c.omega >= omega_lo - slack && c.omega <= omega_hi + slack;
  }
};

/// Forward velocities and turn rates reachable from the current command within
/// one control period.
inline VelocityWindow dynamic_window(const RobotState& s, const SimConfig& cfg) {
  return {std::max(0.0, s.v - cfg.v_accel * cfg.dt),
          std::min(cfg.v_max, std::max(0.0, s.v) + cfg.v_accel * cfg.dt),
          std::max(-cfg.omega_max, s.omega - cfg.omega_accel * cfg.dt),
          std::min(cfg.omega_max, s.omega + cfg.omega_accel * cfg.dt)};
}

inline std::vector<double> linspace(double lo, double hi, int count) {
  if (count <= 1 || hi - lo < 1e-12) return {lo};
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) out[k] = lo + (hi - lo) * k / (count - 1.0);
  return out;
}

/// Poses after each of `steps` constant-command integration steps.
inline std::vector<Pose> rollout(const Pose& from, Command cmd, double dt, int steps) {
  std::vector<Pose> out;
  out.reserve(static_cast<std::size_t>(steps));
  Pose p = from;
  for (int k = 0; k < steps; ++k) {
    p = integrate_unicycle(p, cmd.v, cmd.omega, dt);
    out.push_back(p);
  }
  return out;
}

/// A cost-map together with the pose it was sensed from.
struct PlanningFrame {
  Pose pose;
  const CostMap* costmap = nullptr;

  CellIndex cell_of(Point2 world) const {
    return nearest_cell(world_to_robot(pose, world), costmap->res());
  }
  bool blocked(Point2 world) const { return costmap->blocked(cell_of(world)); }
};

struct PathProjection {
  Point2 closest;
  double deviation = 0.0;
  double arc_length = 0.0;  // along the polyline up to `closest`
};

inline PathProjection project_onto_path(std::span<const Point2> path, Point2 p) {
  PathProjection best{path.front(), distance(path.front(), p), 0.0};
  double walked = 0.0;
  for (std::size_t k = 1; k < path.size(); ++k) {
    const Point2 a = path[k - 1];
    const Point2 d = path[k] - a;
    const double len2 = d.x * d.x + d.y * d.y;
    const double len = std::sqrt(len2);
    double t = len2 > 0 ? ((p.x - a.x) * d.x + (p.y - a.y) * d.y) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const Point2 q = a + t * d;
    const double dev = distance(q, p);
    if (dev < best.deviation) best = {q, dev, walked + t * len};
    walked += len;
  }
  return best;
}

inline Point2 point_at_arc_length(std::span<const Point2> path, double s) {
  for (std::size_t k = 1; k < path.size(); ++k) {
    const double len = distance(path[k - 1], path[k]);
    if (s <= len && len > 0) return path[k - 1] + (s / len) * (path[k] - path[k - 1]);
    s -= len;
  }
  return path.back();
}

struct TrackResult {
  Command command;
  bool fallback = false;      // every rollout was discarded
  std::vector<Pose> rollout;  // chosen rollout (empty on fallback)
};

/// Scores every admissible rollout by end-point path deviation, heading error
/// to a carrot `lookahead` meters further along the path, and speed deficit.
inline TrackResult track_path(const RobotState& s, std::span<const Point2> path,
                              const PlanningFrame& frame, const SimConfig& sim,
                              const TrackerConfig& cfg = {}) {
  const VelocityWindow win = dynamic_window(s, sim);
  const int steps = std::max(1, static_cast<int>(std::lround(cfg.horizon / sim.dt)));
  TrackResult best;
  double best_score = kInf;
  for (double v : linspace(win.v_lo, win.v_hi, cfg.v_samples)) {
    for (double w : linspace(win.omega_lo, win.omega_hi, cfg.omega_samples)) {
      std::vector<Pose> poses = rollout(s.pose(), {v, w}, sim.dt, steps);
      if (std::ranges::any_of(poses, [&](const Pose& p) { return frame.blocked(p.pos); })) {
        continue;
      }
      const Pose& end = poses.back();
      const PathProjection proj = project_onto_path(path, end.pos);
      const Point2 carrot = point_at_arc_length(path, proj.arc_length + cfg.lookahead);
      const Point2 to_carrot = carrot - end.pos;
      const double head = norm(to_carrot) < 1e-9
                              ? 0.0
                              : std::abs(wrap_angle(std::atan2(to_carrot.y, to_carrot.x) -
                                                    end.heading));
      const double score = cfg.w_deviation * proj.deviation + cfg.w_heading * head +
                           cfg.w_velocity * (sim.v_max - v) / sim.v_max;
      if (score < best_score) {
        best_score = score;
        best = {{v, w}, false, std::move(poses)};
      }
    }
  }
  if (std::isfinite(best_score)) return best;

  // Nothing admissible: brake as hard as allowed and turn toward the carrot.
  const PathProjection proj = project_onto_path(path, s.pos);
  const Point2 carrot = point_at_arc_length(path, proj.arc_length + cfg.lookahead);
  const double bearing =
      wrap_angle(std::atan2(carrot.y - s.pos.y, carrot.x - s.pos.x) - s.heading);
  const double target = bearing >= 0 ? sim.omega_max : -sim.omega_max;
  return {{win.v_lo, std::clamp(target, win.omega_lo, win.omega_hi)}, true, {}};
}

}  // namespace terp

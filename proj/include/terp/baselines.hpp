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

// Comparison planners: a classic dynamic-window planner with slope obstacles
// and the ego-graph arc planners with and without a distance-to-goal term.

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "terp/grid.hpp"
#include "terp/terrain.hpp"
#include "terp/tracker.hpp"

namespace terp {

// Window samples closer to zero than this count as zero (linspace rounding).
inline constexpr double kTurnEpsilon = 1e-9;

struct DwaConfig {
  double slope_threshold = 0.35;  // m/m; steeper cells are obstacles
  double ignore_radius = 0.3;     // cells under the robot never count
  double robot_radius = 0.35;     // obstacle inflation around the robot centre
  double horizon = 1.5;
  int v_samples = 6;
  int omega_samples = 11;
  double w_heading = 1.0;
  double w_clearance = 0.3;
  double w_velocity = 0.2;
  double clearance_cap = 2.0;  // arc length searched for the first obstacle
};


struct DwaResult {
  Command command;
  bool fallback = false;
  double clearance = 0.0;     // free arc length of the chosen curvature
  std::vector<Pose> rollout;  // robot frame of the current pose
};

/// Obstacle cells: gradient magnitude above the slope threshold, excluding the
/// footprint.
inline Grid<std::uint8_t> slope_obstacles(const GradientField& g, const DwaConfig& cfg) {
  const Grid<double>& m = g.magnitude;
  Grid<std::uint8_t> obs(m.n(), m.res(), std::uint8_t{0});
  const int h = m.half();
  for (int i = -h; i < h; ++i) {
    for (int j = -h; j < h; ++j) {
      if (m.res() * std::hypot(i, j) <= cfg.ignore_radius) continue;
      obs(i, j) = m(i, j) > cfg.slope_threshold ? 1 : 0;
    }
  }
  return obs;
}

/// Obstacles grown by `radius`: a cell is set when any obstacle cell center
/// lies within `radius` of it.
inline Grid<std::uint8_t> inflate(const Grid<std::uint8_t>& obs, double radius) {
  Grid<std::uint8_t> out(obs.n(), obs.res(), std::uint8_t{0});
  const int h = obs.half();
  const int k = static_cast<int>(std::floor(radius / obs.res()));
  const double r2 = (radius / obs.res()) * (radius / obs.res());
  for (int i = -h; i < h; ++i) {
    for (int j = -h; j < h; ++j) {
      if (!obs(i, j)) continue;
      for (int di = -k; di <= k; ++di) {
        for (int dj = -k; dj <= k; ++dj) {
          const CellIndex c{i + di, j + dj};
          if (di * di + dj * dj <= r2 && out.contains(c)) out(c) = 1;
        }
      }
    }
  }
  return out;
}

/// Free arc length along the constant-curvature curve of (v, omega) from the
/// robot, up to `cap`. A command with v = 0 does not move; it is scored by the
/// free straight length along the heading it reaches after `horizon` seconds.
inline double free_arc_length(const Grid<std::uint8_t>& blocked, Command c, double cap,
                              double horizon = 0.0) {
  const double kappa = c.v > 0.0 ? c.omega / c.v : 0.0;
  const double turn = c.v > 0.0 ? 0.0 : c.omega * horizon;
  const double step = 0.5 * blocked.res();
  for (double s = step; s <= cap; s += step) {
    Point2 p{s * std::cos(turn), s * std::sin(turn)};
    if (std::abs(kappa) > 1e-12) {
      p = {std::sin(kappa * s) / kappa, (1.0 - std::cos(kappa * s)) / kappa};
    }
    const CellIndex cell = nearest_cell(p, blocked.res());
    if (!blocked.contains(cell)) return cap;
    if (blocked(cell)) return s - step;
  }
  return cap;
}

/// Distance covered by executing `v` for one step and then braking at the
/// acceleration limit, under the same forward-Euler update as the simulator.
inline double stopping_distance(double v, const SimConfig& sim) {
  double d = 0.0;
  for (double u = v; u > 0.0; u -= sim.v_accel * sim.dt) d += u * sim.dt;
  return d;
}

/// Dynamic-window planner: each sampled command is admissible when it can stop
/// before the first obstacle on its curve, and is scored by goal heading at the
/// end of the horizon, free arc length and speed.
inline DwaResult dwa_plan(const RobotState& s, const ElevationGrid& elevation,
                          const SimConfig& sim, const DwaConfig& cfg = {}) {
  const GradientField g = gradient_field(elevation);
  const Grid<std::uint8_t> blocked = inflate(slope_obstacles(g, cfg), cfg.robot_radius);
  const Point2 goal = world_to_robot(s.pose(), s.goal);
  const VelocityWindow win = dynamic_window(s, sim);
  const int steps = std::max(1, static_cast<int>(std::lround(cfg.horizon / sim.dt)));

  // Standing still is kept only as a last resort: it scores well on heading
  // forever and would otherwise be a fixed point in front of any obstacle.
  DwaResult best, still;
  double best_score = -kInf, still_score = -kInf;
  for (double v : linspace(win.v_lo, win.v_hi, cfg.v_samples)) {
    for (double w : linspace(win.omega_lo, win.omega_hi, cfg.omega_samples)) {
      const double dist = free_arc_length(blocked, {v, w}, cfg.clearance_cap, cfg.horizon);
      if (stopping_distance(v, sim) > dist) continue;
      std::vector<Pose> poses = rollout(Pose{}, {v, w}, sim.dt, steps);
      const Pose& end = poses.back();
      const Point2 to_goal = goal - end.pos;
      const double err =
          std::abs(wrap_angle(std::atan2(to_goal.y, to_goal.x) - end.heading));
      const double score = cfg.w_heading * (1.0 - err / std::numbers::pi) +
                           cfg.w_clearance * dist / cfg.clearance_cap +
                           cfg.w_velocity * v / sim.v_max;
      const bool standstill = v <= 0.0 && std::abs(w) <= kTurnEpsilon;
      double& top = standstill ? still_score : best_score;
      if (score > top) {
        top = score;
        (standstill ? still : best) = {{v, w}, false, dist, std::move(poses)};
      }
    }
  }
  if (best_score == -kInf && still_score > -kInf) return still;
  if (best_score > -kInf) return best;
  const double bearing = std::atan2(goal.y, goal.x);
  const double target = bearing >= 0 ? sim.omega_max : -sim.omega_max;
  return {{win.v_lo, std::clamp(target, win.omega_lo, win.omega_hi)}, true, 0.0, {}};
}

struct EgoGraphConfig {
  int arc_count = 11;
  double max_turn = deg_to_rad(60.0);  // heading change at the end of an arc
  double max_length = 2.0;
  double min_length = 1.2;
  double sample_spacing = 0.25;
  double w_heading = 1.0;
  double w_gradient = 1.0;
  double w_distance = 0.5;
};

struct EgoArc {
  double turn = 0.0;       // heading change over the arc
  double length = 0.0;
  std::vector<Point2> samples;  // robot frame
  Pose end;
  double alpha_end = 0.0;
  double gradient_sum = 0.0;
  double goal_distance_end = 0.0;
  double cost = 0.0;
};

struct EgoChoice {
  Command command;
  std::size_t index = 0;
  std::vector<EgoArc> arcs;
};

/// Constant-curvature arcs spanning +-max_turn, truncated near the goal.
inline std::vector<EgoArc> ego_arcs(double d_goal, const EgoGraphConfig& cfg) {
  const double length = std::clamp(d_goal, cfg.min_length, cfg.max_length);
  std::vector<EgoArc> arcs;
  for (double turn : linspace(-cfg.max_turn, cfg.max_turn, cfg.arc_count)) {
    EgoArc a;
    a.turn = turn;
    a.length = length;
    const double kappa = turn / length;
    auto at = [&](double s) -> Point2 {
      if (std::abs(kappa) < 1e-12) return {s, 0.0};
      return {std::sin(kappa * s) / kappa, (1.0 - std::cos(kappa * s)) / kappa};
    };
    const int count = std::max(1, static_cast<int>(std::lround(length / cfg.sample_spacing)));
    for (int k = 1; k <= count; ++k) a.samples.push_back(at(length * k / count));
    a.end = {at(length), turn};
    arcs.push_back(std::move(a));
  }
  return arcs;
}

namespace detail {

inline EgoChoice ego_choose(const RobotState& s, const GradientField& g,
                            const SimConfig& sim, const EgoGraphConfig& cfg,
                            bool with_distance) {
  const Point2 goal = world_to_robot(s.pose(), s.goal);
  EgoChoice choice;
  choice.arcs = ego_arcs(norm(goal), cfg);
  double best = kInf;
  for (std::size_t k = 0; k < choice.arcs.size(); ++k) {
    EgoArc& a = choice.arcs[k];
    const Point2 to_goal = goal - a.end.pos;
    a.alpha_end = wrap_angle(std::atan2(to_goal.y, to_goal.x) - a.end.heading);
    a.goal_distance_end = norm(to_goal);
    for (const Point2& p : a.samples) {
      const CellIndex c = nearest_cell(p, g.magnitude.res());
      if (g.magnitude.contains(c)) a.gradient_sum += g.magnitude(c);
    }
    a.cost = cfg.w_heading * std::abs(a.alpha_end) + cfg.w_gradient * a.gradient_sum;
    if (with_distance) a.cost += cfg.w_distance * a.goal_distance_end;
    if (a.cost < best) {
      best = a.cost;
      choice.index = k;
    }
  }
  const EgoArc& a = choice.arcs[choice.index];
  const double v = sim.v_max;
  choice.command = {v, std::clamp(v * a.turn / a.length, -sim.omega_max, sim.omega_max)};
  return choice;
}

}  // namespace detail

/// Arc minimizing w_a * |alpha_goal at arc end| + w_b * sum of G along it.
inline EgoChoice ego_graph_plan(const RobotState& s, const GradientField& g,
                                const SimConfig& sim, const EgoGraphConfig& cfg = {}) {
  return detail::ego_choose(s, g, sim, cfg, false);
}

/// Ego-graph cost plus w_c * distance to goal from the arc end.
inline EgoChoice ego_graph_plus_plan(const RobotState& s, const GradientField& g,
                                     const SimConfig& sim, const EgoGraphConfig& cfg = {}) {
  return detail::ego_choose(s, g, sim, cfg, true);
}

}  // namespace terp

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

// Synthetic terrain, robot-centric sensing with line-of-sight occlusion,
// differential-drive kinematics with terrain-derived attitude, the shaped
// reward and episode termination.

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "terp/errors.hpp"
#include "terp/grid.hpp"

namespace terp {

inline constexpr double deg_to_rad(double d) { return d * std::numbers::pi / 180.0; }

// ---------------------------------------------------------------------------
// World

enum class PrimitiveType { plane, hill, ramp, curb };

/// One additive terrain feature. `size` means sigma for hills, length/width
/// for ramps and curbs; `slope` is only used by planes. `yaw` rotates the
/// feature's local frame.
struct Primitive {
  PrimitiveType type = PrimitiveType::hill;
  Point2 center;
  Point2 size{1.0, 1.0};
  double height = 0.0;
  double yaw = 0.0;
  Point2 slope;

  double eval(Point2 p) const {
    const Point2 d = p - center;
    const double c = std::cos(yaw);
    const double s = std::sin(yaw);
    const double u = c * d.x + s * d.y;
    const double v = -s * d.x + c * d.y;
    switch (type) {
      case PrimitiveType::plane:
        return height + slope.x * d.x + slope.y * d.y;
      case PrimitiveType::hill: {
        const double q = (u / size.x) * (u / size.x) + (v / size.y) * (v / size.y);
        // Gaussian truncated at 6 sigma (residual < 2e-8 of the height).
        return q > 36.0 ? 0.0 : height * std::exp(-0.5 * q);
      }
      case PrimitiveType::ramp: {
        if (size.y > 0.0 && std::abs(v) > 0.5 * size.y) return 0.0;
        return height * std::clamp(u / size.x + 0.5, 0.0, 1.0);
      }
      case PrimitiveType::curb:
        return (std::abs(u) <= 0.5 * size.x && std::abs(v) <= 0.5 * size.y) ? height : 0.0;
    }
    return 0.0;
  }
};

enum class ScenarioClass { low, medium, high, curb };

inline const char* to_string(ScenarioClass c) {
  switch (c) {
    case ScenarioClass::low: return "low";
    case ScenarioClass::medium: return "medium";
    case ScenarioClass::high: return "high";
    case ScenarioClass::curb: return "curb";
  }
  return "low";
}

struct Extent {
  double x_min = -20.0;
  double x_max = 20.0;
  double y_min = -20.0;
  double y_max = 20.0;
};

/// Analytic height field z(x, y) as a sum of primitives over a bounded extent.
struct TerrainWorld {
  std::vector<Primitive> primitives;
  Extent extent;
  ScenarioClass cls = ScenarioClass::low;

  double z(Point2 p) const {
    double h = 0.0;
    for (const auto& prim : primitives) h += prim.eval(p);
    return h;
  }
  bool inside(Point2 p) const {
    return p.x >= extent.x_min && p.x <= extent.x_max && p.y >= extent.y_min &&
           p.y <= extent.y_max;
  }
};

/// Max minus min height over the extent, sampled every `step` meters.
inline double elevation_gain(const TerrainWorld& w, double step = 0.25) {
  double lo = kInf;
  double hi = -kInf;
  for (double x = w.extent.x_min; x <= w.extent.x_max + 1e-9; x += step) {
    for (double y = w.extent.y_min; y <= w.extent.y_max + 1e-9; y += step) {
      const double h = w.z({x, y});
      lo = std::min(lo, h);
      hi = std::max(hi, h);
    }
  }
  return hi - lo;
}

// ---------------------------------------------------------------------------
// Robot

struct RewardWeights {
  double beta_dist = 1.0;
  double beta_head = 0.5;
  double beta_stable = 1.0;
  double beta_grad = 1.0;
  std::vector<double> w;  // far -> near, ascending, unit sum

  /// Linear ramp from 0.1 (far) to 1.0 (adjacent to the robot), normalized.
  static std::vector<double> heading_weights(int count) {
    std::vector<double> w(static_cast<std::size_t>(count));
    double sum = 0.0;
    for (int k = 0; k < count; ++k) {
      w[k] = count == 1 ? 1.0 : 0.1 + 0.9 * k / (count - 1.0);
      sum += w[k];
    }
    for (double& x : w) x /= sum;
    return w;
  }

  void validate(std::size_t expected) const {
    if (beta_dist < 0 || beta_head < 0 || beta_stable < 0 || beta_grad < 0) {
      throw ContractError("reward betas must be >= 0");
    }
    if (w.size() != expected) throw ContractError("w length must be n/2");
    for (std::size_t k = 1; k < w.size(); ++k) {
      if (!(w[k] > w[k - 1])) throw ContractError("w must be strictly ascending");
    }
  }
};

/// Simulation and robot constants shared by every planner.
struct SimConfig {
  int n = 40;
  double res = 0.25;
  double r_sense = 5.0;
  double sensor_height = 0.8;
  double ray_step = 0.05;
  double occlusion_tolerance = 0.01;
  double footprint = 0.6;
  double clearance = 0.15;
  double stability_limit = deg_to_rad(35.0);
  double dt = 0.1;
  double v_max = 1.0;
  double omega_max = 1.0;
  double v_accel = 2.0;
  double omega_accel = 4.0;
  double goal_radius = 0.5;
  double t_max = 120.0;
  RewardWeights reward{1.0, 0.5, 1.0, 1.0, RewardWeights::heading_weights(20)};

  void validate() const {
    if (n < 4 || n % 2 != 0) throw ConfigError("n must be even and >= 4");
    if (!(res > 0) || !(r_sense > 0) || !(dt > 0) || !(v_max > 0) ||
        !(omega_max > 0) || !(footprint > 0) || !(ray_step > 0) ||
        !(v_accel > 0) || !(omega_accel > 0) || !(goal_radius > 0) ||
        !(t_max > 0) || clearance < 0 || !(stability_limit > 0)) {
      throw ConfigError("simulation constants must be positive");
    }
    try {
      reward.validate(static_cast<std::size_t>(n / 2));
    } catch (const ContractError& e) {
      throw ConfigError(e.what());
    }
  }
};

struct Pose {
  Point2 pos;
  double heading = 0.0;
};

struct RobotState {
  Point2 pos;
  double heading = 0.0;
  double roll = 0.0;
  double pitch = 0.0;
  double v = 0.0;
  double omega = 0.0;
  Point2 start;
  Point2 goal;
  double t = 0.0;

  Pose pose() const { return {pos, heading}; }
};

/// Robot-frame coordinates of a world point.
inline Point2 world_to_robot(const Pose& frame, Point2 p) {
  const Point2 d = p - frame.pos;
  const double c = std::cos(frame.heading);
  const double s = std::sin(frame.heading);
  return {c * d.x + s * d.y, -s * d.x + c * d.y};
}

inline Point2 robot_to_world(const Pose& frame, Point2 p) {
  const double c = std::cos(frame.heading);
  const double s = std::sin(frame.heading);
  return frame.pos + Point2{c * p.x - s * p.y, s * p.x + c * p.y};
}

/// One forward-Euler unicycle step. Planner rollouts use the same update so
/// a checked rollout reproduces the executed motion exactly.
inline Pose integrate_unicycle(const Pose& p, double v, double omega, double dt) {
  return {{p.pos.x + v * std::cos(p.heading) * dt,
           p.pos.y + v * std::sin(p.heading) * dt},
          p.heading + omega * dt};
}

// ---------------------------------------------------------------------------
// Sensing

/// Whether the sight line from `sensor` (absolute height) to the ground at
/// `target` is blocked by terrain in between.
inline bool line_of_sight_blocked(const TerrainWorld& world, Point2 from,
                                  double sensor_z, Point2 target,
                                  double target_z, double step,
                                  double tolerance) {
  const double d = distance(from, target);
  for (int k = 1; k * step < d; ++k) {
    const double f = k * step / d;
    const Point2 q = from + f * (target - from);
    const double sight = sensor_z + f * (target_z - sensor_z);
    if (world.z(q) > sight + tolerance) return true;
  }
  return false;
}

/// Heading-aligned local elevation grid, heights relative to the ground under
/// the robot. Cells beyond r_sense, outside the world or hidden from the
/// sensor mast are marked missing.
inline ElevationGrid sense_elevation(const TerrainWorld& world,
                                     const RobotState& state,
                                     const SimConfig& cfg) {
  if (!world.inside(state.pos)) throw SimulationError("robot outside world");
  ElevationGrid e(cfg.n, cfg.res);
  const double ground = world.z(state.pos);
  const double sensor = ground + cfg.sensor_height;
  const Pose frame = state.pose();
  const int h = cfg.n / 2;
  for (int i = -h; i < h; ++i) {
    for (int j = -h; j < h; ++j) {
      const Point2 local{cfg.res * i, cfg.res * j};
      if (norm(local) > cfg.r_sense) {
        e.mark_missing(i, j);
        continue;
      }
      const Point2 p = robot_to_world(frame, local);
      if (!world.inside(p)) {
        e.mark_missing(i, j);
        continue;
      }
      const double zt = world.z(p);
      if (line_of_sight_blocked(world, state.pos, sensor, p, zt, cfg.ray_step,
                                cfg.occlusion_tolerance)) {
        e.mark_missing(i, j);
        continue;
      }
      e.set(i, j, zt - ground);
    }
  }
  return e;
}

// ---------------------------------------------------------------------------
// Attitude and kinematics

struct Attitude {
  double roll = 0.0;
  double pitch = 0.0;
};

/// Least-squares plane over a footprint x footprint patch (7 x 7 samples)
/// under the robot. Pitch is positive nose-up, roll positive left-side-up.
inline Attitude estimate_attitude(const TerrainWorld& world, const Pose& pose,
                                  double footprint) {
  if (!(footprint > 0.0)) throw PreconditionError("footprint must be > 0");
  constexpr int kSamples = 7;
  const double c = std::cos(pose.heading);
  const double s = std::sin(pose.heading);
  const double center = world.z(pose.pos);
  double suz = 0.0, svz = 0.0, suu = 0.0, svv = 0.0;
  for (int a = 0; a < kSamples; ++a) {
    const double u = footprint * (a / (kSamples - 1.0) - 0.5);
    for (int b = 0; b < kSamples; ++b) {
      const double v = footprint * (b / (kSamples - 1.0) - 0.5);
      const Point2 p = pose.pos + Point2{c * u - s * v, s * u + c * v};
      const double z = world.z(p) - center;
      suz += u * z;
      svz += v * z;
      suu += u * u;
      svv += v * v;
    }
  }
  return {std::atan(svz / svv), std::atan(suz / suu)};
}

inline RobotState step_kinematics(const TerrainWorld& world,
                                  const RobotState& state, double v,
                                  double omega, const SimConfig& cfg) {
  constexpr double kSlack = 1e-9;
  if (std::abs(v) > cfg.v_max + kSlack || std::abs(omega) > cfg.omega_max + kSlack) {
    throw ContractError("velocity command exceeds limits");
  }
  if (!(cfg.dt > 0.0)) throw ContractError("dt must be > 0");
  RobotState next = state;
  const Pose p = integrate_unicycle(state.pose(), v, omega, cfg.dt);
  next.pos = p.pos;
  next.heading = wrap_angle(p.heading);
  next.v = v;
  next.omega = omega;
  next.t = state.t + cfg.dt;
  const Attitude att = estimate_attitude(world, next.pose(), cfg.footprint);
  next.roll = att.roll;
  next.pitch = att.pitch;
  return next;
}

/// Initial state at rest at `start` facing `heading`, attitude from terrain.
inline RobotState make_state(const TerrainWorld& world, Point2 start,
                             double heading, Point2 goal,
                             const SimConfig& cfg) {
  RobotState s;
  s.pos = start;
  s.start = start;
  s.goal = goal;
  s.heading = wrap_angle(heading);
  const Attitude att = estimate_attitude(world, s.pose(), cfg.footprint);
  s.roll = att.roll;
  s.pitch = att.pitch;
  return s;
}

// ---------------------------------------------------------------------------
// Goal geometry, reward and termination

struct GoalGeometry {
  double d_goal = 0.0;
  double alpha_goal = 0.0;      // heading -> goal bearing, (-pi, pi]
  double alpha_relative = 0.0;  // at the start: (start->goal) -> (start->robot)
};

inline GoalGeometry goal_geometry(const RobotState& s) {
  GoalGeometry g;
  const Point2 to_goal = s.goal - s.pos;
  g.d_goal = norm(to_goal);
  g.alpha_goal = g.d_goal == 0.0
                     ? 0.0
                     : wrap_angle(std::atan2(to_goal.y, to_goal.x) - s.heading);
  const Point2 moved = s.pos - s.start;
  const Point2 line = s.goal - s.start;
  if (norm(moved) > 1e-12 && norm(line) > 1e-12) {
    g.alpha_relative = wrap_angle(std::atan2(moved.y, moved.x) -
                                  std::atan2(line.y, line.x));
  }
  return g;
}

struct Reward {
  double dist = 0.0;
  double head = 0.0;
  double stable = 0.0;
  double grad = 0.0;
  double total = 0.0;
};

/// Goal-distance and heading penalties, the cos^2 stability reward and the
/// near-weighted heading-gradient penalty.
inline Reward compute_reward(const RobotState& s, std::span<const double> h,
                             const RewardWeights& wts) {
  wts.validate(h.size());
  const GoalGeometry g = goal_geometry(s);
  Reward r;
  r.dist = -g.d_goal;
  r.head = -std::abs(g.alpha_goal);
  const double cr = std::cos(s.roll);
  const double cp = std::cos(s.pitch);
  r.stable = cr * cr + cp * cp;
  double dot = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) dot += wts.w[k] * h[k];
  r.grad = -dot;
  r.total = wts.beta_dist * r.dist + wts.beta_head * r.head +
            wts.beta_stable * r.stable + wts.beta_grad * r.grad;
  return r;
}

struct EpisodeStatus {
  enum class Kind { running, success, failure };
  Kind kind = Kind::running;
  std::string reason;

  bool running() const { return kind == Kind::running; }
  bool success() const { return kind == Kind::success; }
  bool failure() const { return kind == Kind::failure; }
  static EpisodeStatus fail(std::string why) {
    return {Kind::failure, std::move(why)};
  }
};

/// Failure (tipped, blocked cell, left the world) takes precedence over
/// success; timeout applies only while neither has happened.
inline EpisodeStatus episode_status(const RobotState& s, const CostMap* costmap,
                                    const SimConfig& cfg,
                                    const TerrainWorld* world = nullptr) {
  if (std::abs(s.roll) > cfg.stability_limit ||
      std::abs(s.pitch) > cfg.stability_limit) {
    return EpisodeStatus::fail("tipped");
  }
  if (costmap != nullptr && costmap->blocked({0, 0})) {
    return EpisodeStatus::fail("blocked");
  }
  if (world != nullptr && !world->inside(s.pos)) {
    return EpisodeStatus::fail("out_of_bounds");
  }
  if (goal_geometry(s).d_goal < cfg.goal_radius) {
    return {EpisodeStatus::Kind::success, ""};
  }
  if (s.t > cfg.t_max + 1e-9) return EpisodeStatus::fail("timeout");
  return {};
}

}  // namespace terp

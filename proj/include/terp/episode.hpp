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

// Episode runners: the sense -> cost-map -> waypoint -> track replanning loop
// and the reactive loop shared by the comparison planners.

#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "terp/attention.hpp"
#include "terp/baselines.hpp"
#include "terp/errors.hpp"
#include "terp/grid.hpp"
#include "terp/metrics.hpp"
#include "terp/planner.hpp"
#include "terp/scenario.hpp"
#include "terp/terrain.hpp"
#include "terp/tracker.hpp"

namespace terp {

enum class PlannerKind { terp, terp_noattn, dwa, ego, ego_plus };

inline const char* to_string(PlannerKind k) {
  switch (k) {
    case PlannerKind::terp: return "terp";
    case PlannerKind::terp_noattn: return "terp-noattn";
    case PlannerKind::dwa: return "dwa";
    case PlannerKind::ego: return "ego";
    case PlannerKind::ego_plus: return "ego+";
  }
  return "terp";
}

inline PlannerKind planner_kind(const std::string& s) {
  if (s == "terp") return PlannerKind::terp;
  if (s == "terp-noattn") return PlannerKind::terp_noattn;
  if (s == "dwa") return PlannerKind::dwa;
  if (s == "ego") return PlannerKind::ego;
  if (s == "ego+") return PlannerKind::ego_plus;
  throw ConfigError("unknown planner '" + s + "'");
}

/// Everything a mask source may look at for one frame.
struct FrameInputs {
  int frame = 0;
  const RobotState& state;
  const ElevationGrid& normalized;
  const GradientField& gradient;
  double goal_bearing = 0.0;  // robot frame
  const Grid<std::uint8_t>* missing = nullptr;  // cells filled in, not sensed
};

using MaskSource = std::function<AttentionMask(const FrameInputs&)>;

inline MaskSource analytic_mask_source(AnalyticAttentionParams params = {}) {
  return [params](const FrameInputs& in) {
    return analytic_attention(in.gradient, in.goal_bearing, params,
                              params.sensed_range ? in.missing : nullptr);
  };
}

inline MaskSource uniform_mask_source() {
  return [](const FrameInputs& in) {
    return uniform_mask(in.normalized.n(), in.normalized.res());
  };
}

inline std::string mask_file_name(int frame) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "mask_%06d.txt", frame);
  return buf;
}

/// Reads `mask_NNNNNN.txt` for each frame from a directory of exported masks.
/// Clamp warnings are appended to `warnings` when provided.
inline MaskSource file_mask_source(std::filesystem::path dir,
                                   std::vector<std::string>* warnings = nullptr) {
  return [dir = std::move(dir), warnings](const FrameInputs& in) {
    LoadedMask m = load_mask(dir / mask_file_name(in.frame), in.normalized.n());
    if (warnings) warnings->insert(warnings->end(), m.warnings.begin(), m.warnings.end());
    return std::move(m.mask);
  };
}

struct FrameRecord {
  int index = 0;
  RobotState state;           // pose the frame was sensed from
  ElevationGrid elevation;    // infilled, relative to the robot's ground
  ElevationGrid normalized;
  std::vector<double> heading_gradient;
  AttentionMask mask;
  CostMap costmap;
  double radius = 0.0;
  std::optional<WaypointPlan> plan;  // empty when the planner got stuck
  double plan_ms = 0.0;              // sense through waypoint selection
};

/// Counters for the least-cost waypoint guarantee, checked while running.
struct GuaranteeChecks {
  long frames = 0;
  long candidate_violations = 0;  // selected cost above a same-generation candidate
  long poses = 0;
  long blocked_pose_violations = 0;  // executed pose in a cell blocked at planning time
  long radius_halvings = 0;
  long tracker_fallbacks = 0;
};

struct EpisodeResult {
  PlannerKind planner = PlannerKind::terp;
  std::vector<RobotState> trajectory;  // starts with the initial state
  std::vector<FrameRecord> frames;     // kept only when requested
  int frame_count = 0;
  std::vector<double> frame_ms;
  EpisodeStatus status;
  GuaranteeChecks checks;
};

struct EpisodeOptions {
  bool keep_frames = false;
  MaskSource mask;  // overrides the planner's default mask source
  std::function<void(const FrameRecord&)> on_frame;
};

namespace detail {

inline double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace detail

/// Replanning loop: sense, infill, normalize, attend, build the cost-map,
/// choose a least-cost waypoint and track the Dijkstra path until the waypoint
/// is reached or the replan period elapses.
inline EpisodeResult run_terp_episode(const Scenario& sc, const MaskSource& mask_source,
                                      const EpisodeOptions& opts = {}) {
  const SimConfig& sim = sc.sim;
  const PlannerConfig& pc = sc.planner;
  EpisodeResult out;
  RobotState state = sc.initial_state();
  out.trajectory.push_back(state);
  double prior_radius = sim.r_sense - sim.res;
  out.status = episode_status(state, nullptr, sim, &sc.world);

  while (out.status.running()) {
    const auto t0 = std::chrono::steady_clock::now();
    FrameRecord fr;
    fr.index = out.frame_count;
    fr.state = state;
    ElevationGrid sensed;
    try {
      sensed = sense_elevation(sc.world, state, sim);
      fr.elevation = infill_missing(sensed);
    } catch (const SensingError&) {
      out.status = EpisodeStatus::fail("sensing");
      break;
    }
    fr.normalized = normalize_elevation(fr.elevation, sim.clearance);
    const GradientField gradient = gradient_field(fr.elevation);
    fr.heading_gradient = gradient.heading;
    const Point2 goal = world_to_robot(state.pose(), state.goal);
    const double goal_bearing = std::atan2(goal.y, goal.x);
    fr.mask = mask_source({fr.index, state, fr.normalized, gradient, goal_bearing, &sensed.missing});
    fr.costmap = build_costmap(fr.normalized, fr.mask, pc.c_max);

    EpisodeStatus here = episode_status(state, &fr.costmap, sim, &sc.world);
    double radius = prior_radius;
    if (here.running()) {
      try {
        radius = explore_radius(fr.costmap, pc.k1, pc.k2, sim.r_sense, prior_radius);
      } catch (const DegenerateRegion&) {
        // keep the previous circle; waypoint selection expands the arc
      }
      if (norm(goal) < radius) radius = std::max(norm(goal), 2.0 * sim.res);
      fr.radius = radius;
      const DijkstraField field = dijkstra_field(fr.costmap, {0, 0}, pc.base_cost);
      try {
        fr.plan = select_waypoint(fr.costmap, pc, goal, field, radius);
      } catch (const PlannerStuck&) {
        here = EpisodeStatus::fail("stuck");
      }
    }
    fr.plan_ms = detail::ms_since(t0);
    out.frame_ms.push_back(fr.plan_ms);
    ++out.frame_count;

    if (fr.plan) {
      ++out.checks.frames;
      for (const Candidate& c : fr.plan->candidates) {
        if (fr.plan->cost > c.cost) ++out.checks.candidate_violations;
      }
      if (fr.plan->radius_halved) ++out.checks.radius_halvings;
      prior_radius = radius;
    }
    if (opts.on_frame) opts.on_frame(fr);
    if (!here.running()) {
      out.status = here;
      if (opts.keep_frames) out.frames.push_back(std::move(fr));
      break;
    }

    std::vector<Point2> path;
    for (const CellIndex c : fr.plan->path) {
      path.push_back(robot_to_world(state.pose(), {sim.res * c.i, sim.res * c.j}));
    }
    const Point2 waypoint = path.back();
    const PlanningFrame frame{state.pose(), &fr.costmap};
    const double t_plan = state.t;
    do {
      const TrackResult tr = track_path(state, path, frame, sim, sc.tracker);
      if (tr.fallback) ++out.checks.tracker_fallbacks;
      state = step_kinematics(sc.world, state, tr.command.v, tr.command.omega, sim);
      out.trajectory.push_back(state);
      ++out.checks.poses;
      if (frame.blocked(state.pos)) ++out.checks.blocked_pose_violations;
      out.status = episode_status(state, nullptr, sim, &sc.world);
    } while (out.status.running() && state.t - t_plan < pc.replan_period - 1e-9 &&
             distance(state.pos, waypoint) > pc.waypoint_radius);

    if (opts.keep_frames) out.frames.push_back(std::move(fr));
  }
  return out;
}

/// Reactive loop for the comparison planners: sense and command every step.
inline EpisodeResult run_reactive_episode(const Scenario& sc, PlannerKind kind,
                                          const EpisodeOptions& = {}) {
  const SimConfig& sim = sc.sim;
  EpisodeResult out;
  out.planner = kind;
  RobotState state = sc.initial_state();
  out.trajectory.push_back(state);
  out.status = episode_status(state, nullptr, sim, &sc.world);
  while (out.status.running()) {
    const auto t0 = std::chrono::steady_clock::now();
    ElevationGrid e;
    try {
      e = infill_missing(sense_elevation(sc.world, state, sim));
    } catch (const SensingError&) {
      out.status = EpisodeStatus::fail("sensing");
      break;
    }
    Command cmd;
    switch (kind) {
      case PlannerKind::dwa: {
        const DwaResult r = dwa_plan(state, e, sim, sc.dwa);
        if (r.fallback) ++out.checks.tracker_fallbacks;
        cmd = r.command;
        break;
      }
      case PlannerKind::ego:
        cmd = ego_graph_plan(state, gradient_field(e), sim, sc.ego).command;
        break;
      case PlannerKind::ego_plus:
        cmd = ego_graph_plus_plan(state, gradient_field(e), sim, sc.ego).command;
        break;
      default:
        throw ContractError("not a reactive planner");
    }
    out.frame_ms.push_back(detail::ms_since(t0));
    ++out.frame_count;
    state = step_kinematics(sc.world, state, cmd.v, cmd.omega, sim);
    out.trajectory.push_back(state);
    out.status = episode_status(state, nullptr, sim, &sc.world);
  }
  return out;
}

/// Runs one episode with any planner. Exceptions inside the episode become a
/// `crash` failure so suites keep going.
inline EpisodeResult run_episode(const Scenario& sc, PlannerKind kind,
                                 const EpisodeOptions& opts = {}) {
  try {
    EpisodeResult r;
    switch (kind) {
      case PlannerKind::terp:
        r = run_terp_episode(sc, opts.mask ? opts.mask : analytic_mask_source(), opts);
        break;
      case PlannerKind::terp_noattn:
        r = run_terp_episode(sc, uniform_mask_source(), opts);
        break;
      default:
        r = run_reactive_episode(sc, kind, opts);
        break;
    }
    r.planner = kind;
    return r;
  } catch (const std::exception& e) {
    EpisodeResult r;
    r.planner = kind;
    r.trajectory.push_back(sc.initial_state());
    r.status = EpisodeStatus::fail(std::string("crash: ") + e.what());
    return r;
  }
}

inline EpisodeMetrics episode_metrics(const EpisodeResult& r, const Scenario& sc) {
  const std::vector<Pose> poses = poses_of(r.trajectory);
  EpisodeMetrics m = compute_metrics(poses, sc.world, sc.start, sc.goal);
  m.success = r.status.success();
  m.failure_reason = r.status.reason;
  return m;
}

}  // namespace terp

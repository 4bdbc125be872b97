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

// Scenario configuration (JSON) and seeded procedural world generation.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "terp/baselines.hpp"
#include "terp/errors.hpp"
#include "terp/grid_io.hpp"
#include "terp/planner.hpp"
#include "terp/terrain.hpp"
#include "terp/tracker.hpp"

namespace terp {

using json = nlohmann::json;

struct Scenario {
  std::string name = "scenario";
  std::uint64_t seed = 0;
  TerrainWorld world;
  Point2 start;
  double start_heading = 0.0;
  Point2 goal;
  SimConfig sim;
  PlannerConfig planner;
  TrackerConfig tracker;
  DwaConfig dwa;
  EgoGraphConfig ego;

  RobotState initial_state() const {
    return make_state(world, start, start_heading, goal, sim);
  }
};

// ---------------------------------------------------------------------------
// JSON

namespace detail {

inline json to_json(Point2 p) { return json::array({p.x, p.y}); }

inline Point2 point_from(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ConfigError(std::string(what) + " must be [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

inline PrimitiveType primitive_type(const std::string& s) {
  if (s == "plane") return PrimitiveType::plane;
  if (s == "hill") return PrimitiveType::hill;
  if (s == "ramp") return PrimitiveType::ramp;
  if (s == "curb") return PrimitiveType::curb;
  throw ConfigError("unknown primitive type '" + s + "'");
}

inline const char* to_string(PrimitiveType t) {
  switch (t) {
    case PrimitiveType::plane: return "plane";
    case PrimitiveType::hill: return "hill";
    case PrimitiveType::ramp: return "ramp";
    case PrimitiveType::curb: return "curb";
  }
  return "hill";
}

}  // namespace detail

inline ScenarioClass scenario_class(const std::string& s) {
  if (s == "low") return ScenarioClass::low;
  if (s == "medium") return ScenarioClass::medium;
  if (s == "high") return ScenarioClass::high;
  if (s == "curb" || s == "city-curb") return ScenarioClass::curb;
  throw ConfigError("unknown scenario class '" + s + "'");
}

inline json to_json(const SimConfig& c) {
  return {{"n", c.n},
          {"res", c.res},
          {"r_sense", c.r_sense},
          {"sensor_height", c.sensor_height},
          {"ray_step", c.ray_step},
          {"occlusion_tolerance", c.occlusion_tolerance},
          {"footprint", c.footprint},
          {"clearance", c.clearance},
          {"stability_limit_deg", c.stability_limit * 180.0 / std::numbers::pi},
          {"dt", c.dt},
          {"v_max", c.v_max},
          {"omega_max", c.omega_max},
          {"v_accel", c.v_accel},
          {"omega_accel", c.omega_accel},
          {"goal_radius", c.goal_radius},
          {"t_max", c.t_max},
          {"reward",
           {{"beta", {c.reward.beta_dist, c.reward.beta_head, c.reward.beta_stable,
                      c.reward.beta_grad}},
            {"w", c.reward.w}}}};
}

inline SimConfig sim_from(const json& j, SimConfig c = {}) {
  using detail::read;
  const int old_n = c.n;
  read(j, "n", c.n);
  read(j, "res", c.res);
  read(j, "r_sense", c.r_sense);
  read(j, "sensor_height", c.sensor_height);
  read(j, "ray_step", c.ray_step);
  read(j, "occlusion_tolerance", c.occlusion_tolerance);
  read(j, "footprint", c.footprint);
  read(j, "clearance", c.clearance);
  if (j.contains("stability_limit_deg")) {
    c.stability_limit = deg_to_rad(j.at("stability_limit_deg").get<double>());
  }
  read(j, "dt", c.dt);
  read(j, "v_max", c.v_max);
  read(j, "omega_max", c.omega_max);
  read(j, "v_accel", c.v_accel);
  read(j, "omega_accel", c.omega_accel);
  read(j, "goal_radius", c.goal_radius);
  read(j, "t_max", c.t_max);
  if (c.n != old_n) c.reward.w = RewardWeights::heading_weights(c.n / 2);
  if (j.contains("reward")) {
    const json& r = j.at("reward");
    if (r.contains("beta")) {
      const auto b = r.at("beta").get<std::vector<double>>();
      if (b.size() != 4) throw ConfigError("reward.beta needs 4 values");
      c.reward.beta_dist = b[0];
      c.reward.beta_head = b[1];
      c.reward.beta_stable = b[2];
      c.reward.beta_grad = b[3];
    }
    detail::read(r, "w", c.reward.w);
  }
  c.validate();
  return c;
}

inline json to_json(const PlannerConfig& c) {
  return {{"c_max", c.c_max},         {"gamma_explore", c.gamma_explore},
          {"k1", c.k1},               {"k2", c.k2},
          {"base_cost", c.base_cost}, {"waypoint_radius", c.waypoint_radius},
          {"replan_period", c.replan_period}};
}

inline PlannerConfig planner_from(const json& j, PlannerConfig c = {}) {
  using detail::read;
  read(j, "c_max", c.c_max);
  read(j, "gamma_explore", c.gamma_explore);
  read(j, "k1", c.k1);
  read(j, "k2", c.k2);
  read(j, "base_cost", c.base_cost);
  read(j, "waypoint_radius", c.waypoint_radius);
  read(j, "replan_period", c.replan_period);
  c.validate();
  return c;
}

inline json to_json(const TrackerConfig& c) {
  return {{"horizon", c.horizon},         {"v_samples", c.v_samples},
          {"omega_samples", c.omega_samples}, {"lookahead", c.lookahead},
          {"w_deviation", c.w_deviation}, {"w_heading", c.w_heading},
          {"w_velocity", c.w_velocity}};
}

inline TrackerConfig tracker_from(const json& j, TrackerConfig c = {}) {
  using detail::read;
  read(j, "horizon", c.horizon);
  read(j, "v_samples", c.v_samples);
  read(j, "omega_samples", c.omega_samples);
  read(j, "lookahead", c.lookahead);
  read(j, "w_deviation", c.w_deviation);
  read(j, "w_heading", c.w_heading);
  read(j, "w_velocity", c.w_velocity);
  return c;
}

inline json to_json(const DwaConfig& c) {
  return {{"slope_threshold", c.slope_threshold}, {"ignore_radius", c.ignore_radius},
          {"robot_radius", c.robot_radius},
          {"horizon", c.horizon},                 {"v_samples", c.v_samples},
          {"omega_samples", c.omega_samples},     {"w_heading", c.w_heading},
          {"w_clearance", c.w_clearance},         {"w_velocity", c.w_velocity},
          {"clearance_cap", c.clearance_cap}};
}

inline DwaConfig dwa_from(const json& j, DwaConfig c = {}) {
  using detail::read;
  read(j, "slope_threshold", c.slope_threshold);
  read(j, "ignore_radius", c.ignore_radius);
  read(j, "robot_radius", c.robot_radius);
  read(j, "horizon", c.horizon);
  read(j, "v_samples", c.v_samples);
  read(j, "omega_samples", c.omega_samples);
  read(j, "w_heading", c.w_heading);
  read(j, "w_clearance", c.w_clearance);
  read(j, "w_velocity", c.w_velocity);
  read(j, "clearance_cap", c.clearance_cap);
  return c;
}

inline json to_json(const EgoGraphConfig& c) {
  return {{"arc_count", c.arc_count},
          {"max_turn_deg", c.max_turn * 180.0 / std::numbers::pi},
          {"max_length", c.max_length},
          {"min_length", c.min_length},
          {"sample_spacing", c.sample_spacing},
          {"w_heading", c.w_heading},
          {"w_gradient", c.w_gradient},
          {"w_distance", c.w_distance}};
}

inline EgoGraphConfig ego_from(const json& j, EgoGraphConfig c = {}) {
  using detail::read;
  read(j, "arc_count", c.arc_count);
  if (j.contains("max_turn_deg")) c.max_turn = deg_to_rad(j.at("max_turn_deg").get<double>());
  read(j, "max_length", c.max_length);
  read(j, "min_length", c.min_length);
  read(j, "sample_spacing", c.sample_spacing);
  read(j, "w_heading", c.w_heading);
  read(j, "w_gradient", c.w_gradient);
  read(j, "w_distance", c.w_distance);
  return c;
}

inline json to_json(const Scenario& s) {
  json prims = json::array();
  for (const auto& p : s.world.primitives) {
    json jp = {{"type", detail::to_string(p.type)},
               {"center", detail::to_json(p.center)},
               {"size", detail::to_json(p.size)},
               {"height", p.height},
               {"yaw", p.yaw}};
    if (p.type == PrimitiveType::plane) jp["slope"] = detail::to_json(p.slope);
    prims.push_back(std::move(jp));
  }
  const Extent& e = s.world.extent;
  return {{"name", s.name},
          {"class", to_string(s.world.cls)},
          {"seed", s.seed},
          {"extent", {{"x_min", e.x_min}, {"x_max", e.x_max}, {"y_min", e.y_min}, {"y_max", e.y_max}}},
          {"primitives", std::move(prims)},
          {"start", detail::to_json(s.start)},
          {"start_heading", s.start_heading},
          {"goal", detail::to_json(s.goal)},
          {"sim", to_json(s.sim)},
          {"planner", to_json(s.planner)},
          {"tracker", to_json(s.tracker)},
          {"dwa", to_json(s.dwa)},
          {"ego", to_json(s.ego)}};
}

inline Scenario scenario_from(const json& j) {
  if (!j.is_object()) throw ConfigError("scenario must be a JSON object");
  Scenario s;
  try {
    detail::read(j, "name", s.name);
    detail::read(j, "seed", s.seed);
    if (j.contains("class")) s.world.cls = scenario_class(j.at("class").get<std::string>());
    if (j.contains("extent")) {
      const json& e = j.at("extent");
      detail::read(e, "x_min", s.world.extent.x_min);
      detail::read(e, "x_max", s.world.extent.x_max);
      detail::read(e, "y_min", s.world.extent.y_min);
      detail::read(e, "y_max", s.world.extent.y_max);
    }
    if (j.contains("primitives")) {
      for (const json& jp : j.at("primitives")) {
        Primitive p;
        p.type = detail::primitive_type(jp.at("type").get<std::string>());
        if (jp.contains("center")) p.center = detail::point_from(jp.at("center"), "center");
        if (jp.contains("size")) p.size = detail::point_from(jp.at("size"), "size");
        detail::read(jp, "height", p.height);
        detail::read(jp, "yaw", p.yaw);
        if (jp.contains("slope")) p.slope = detail::point_from(jp.at("slope"), "slope");
        if (p.type != PrimitiveType::plane && !(p.size.x > 0)) {
          throw ConfigError("primitive size must be positive");
        }
        if (p.type == PrimitiveType::hill && !(p.size.y > 0)) {
          throw ConfigError("hill size must be positive");
        }
        s.world.primitives.push_back(p);
      }
    }
    if (!j.contains("start") || !j.contains("goal")) {
      throw ConfigError("scenario needs start and goal");
    }
    s.start = detail::point_from(j.at("start"), "start");
    s.goal = detail::point_from(j.at("goal"), "goal");
    if (j.contains("start_heading")) {
      detail::read(j, "start_heading", s.start_heading);
    } else {
      s.start_heading = std::atan2(s.goal.y - s.start.y, s.goal.x - s.start.x);
    }
    if (j.contains("sim")) s.sim = sim_from(j.at("sim"));
    if (j.contains("planner")) s.planner = planner_from(j.at("planner"));
    if (j.contains("tracker")) s.tracker = tracker_from(j.at("tracker"));
    if (j.contains("dwa")) s.dwa = dwa_from(j.at("dwa"));
    if (j.contains("ego")) s.ego = ego_from(j.at("ego"));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  const Extent& e = s.world.extent;
  if (!(e.x_max > e.x_min) || !(e.y_max > e.y_min)) throw ConfigError("empty extent");
  if (!s.world.inside(s.start) || !s.world.inside(s.goal)) {
    throw ConfigError("start and goal must lie inside the extent");
  }
  s.sim.validate();
  s.planner.validate();
  return s;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return scenario_from(j);
}

// ---------------------------------------------------------------------------
// Procedural generation

/// Portable uniform doubles from a 64-bit Mersenne Twister.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform(double lo, double hi) {
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }
  int integer(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
  }

 private:
  std::mt19937_64 engine_;
};

/// Local slope magnitude from central differences over +-half_span meters.
inline double terrain_slope(const TerrainWorld& w, Point2 p, double half_span = 0.3) {
  const double dx = (w.z({p.x + half_span, p.y}) - w.z({p.x - half_span, p.y})) / (2 * half_span);
  const double dy = (w.z({p.x, p.y + half_span}) - w.z({p.x, p.y - half_span})) / (2 * half_span);
  return std::hypot(dx, dy);
}

/// Whether start and goal are joined by 8-connected cells whose slope stays
/// below max_slope, on a global raster of the given spacing.
inline bool safely_connected(const TerrainWorld& w, Point2 start, Point2 goal,
                             double max_slope, double spacing = 0.25) {
  const Extent& e = w.extent;
  const int nx = static_cast<int>(std::floor((e.x_max - e.x_min) / spacing)) + 1;
  const int ny = static_cast<int>(std::floor((e.y_max - e.y_min) / spacing)) + 1;
  auto cell = [&](Point2 p) {
    return std::pair{static_cast<int>(std::lround((p.x - e.x_min) / spacing)),
                     static_cast<int>(std::lround((p.y - e.y_min) / spacing))};
  };
  std::vector<std::uint8_t> state(static_cast<std::size_t>(nx) * ny, 0);  // 0 unknown, 1 safe, 2 unsafe, 3 seen
  auto safe = [&](int a, int b) {
    std::uint8_t& s = state[static_cast<std::size_t>(a) * ny + b];
    if (s == 0) {
      const Point2 p{e.x_min + a * spacing, e.y_min + b * spacing};
      s = terrain_slope(w, p) < max_slope ? 1 : 2;
    }
    return s == 1;
  };
  auto [sa, sb] = cell(start);
  auto [ga, gb] = cell(goal);
  if (!safe(sa, sb) || !safe(ga, gb)) return false;
  std::deque<std::pair<int, int>> open{{sa, sb}};
  state[static_cast<std::size_t>(sa) * ny + sb] = 3;
  while (!open.empty()) {
    auto [a, b] = open.front();
    open.pop_front();
    if (a == ga && b == gb) return true;
    for (int da = -1; da <= 1; ++da) {
      for (int db = -1; db <= 1; ++db) {
        const int na = a + da;
        const int nb = b + db;
        if (na < 0 || nb < 0 || na >= nx || nb >= ny) continue;
        if (!safe(na, nb)) continue;
        state[static_cast<std::size_t>(na) * ny + nb] = 3;
        open.emplace_back(na, nb);
      }
    }
  }
  return false;
}

/// Class rule on the realized elevation gain (low <= 1 m, medium 1-2 m,
/// high >= 3 m); city-curb worlds need a curb above the ground clearance.
inline bool class_matches(const TerrainWorld& w, double clearance) {
  const double gain = elevation_gain(w);
  switch (w.cls) {
    case ScenarioClass::low: return gain <= 1.0;
    case ScenarioClass::medium: return gain >= 1.0 && gain <= 2.0;
    case ScenarioClass::high: return gain >= 3.0;
    case ScenarioClass::curb:
      return std::ranges::any_of(w.primitives, [&](const Primitive& p) {
        return p.type == PrimitiveType::curb && p.height > clearance;
      });
  }
  return false;
}

namespace detail {

struct Layout {
  Point2 start;
  Point2 goal;
  double heading = 0.0;  // start -> goal
  double half_span = 0.0;
};

inline Layout random_layout(Rng& rng, double d_lo, double d_hi) {
  Layout l;
  const double d = rng.uniform(d_lo, d_hi);
  const double a = rng.uniform(-std::numbers::pi, std::numbers::pi);
  l.start = {-0.5 * d * std::cos(a), -0.5 * d * std::sin(a)};
  l.goal = {0.5 * d * std::cos(a), 0.5 * d * std::sin(a)};
  l.heading = a;
  l.half_span = 0.5 * d;
  return l;
}

inline Point2 along(const Layout& l, double t, double lateral) {
  const Point2 dir{std::cos(l.heading), std::sin(l.heading)};
  const Point2 left{-dir.y, dir.x};
  return l.start + (2.0 * l.half_span * t) * dir + lateral * left;
}

inline Point2 random_point_away(Rng& rng, const Extent& e, const Layout& l, double margin,
                                double keep_out) {
  for (;;) {
    const Point2 p{rng.uniform(e.x_min + margin, e.x_max - margin),
                   rng.uniform(e.y_min + margin, e.y_max - margin)};
    if (distance(p, l.start) > keep_out && distance(p, l.goal) > keep_out) return p;
  }
}

inline void add_hills(Rng& rng, std::vector<Primitive>& out, const Extent& e, const Layout& l,
                      int count, double h_lo, double h_hi, double s_lo, double s_hi,
                      double keep_out) {
  for (int k = 0; k < count; ++k) {
    Primitive p;
    p.type = PrimitiveType::hill;
    p.center = random_point_away(rng, e, l, 2.0, keep_out);
    p.height = rng.uniform(h_lo, h_hi);
    p.size = {rng.uniform(s_lo, s_hi), rng.uniform(s_lo, s_hi)};
    p.yaw = rng.uniform(0.0, std::numbers::pi);
    out.push_back(p);
  }
}

inline TerrainWorld candidate_world(Rng& rng, ScenarioClass cls, Layout& l) {
  TerrainWorld w;
  w.cls = cls;
  const double margin = 6.0;
  auto extent_for = [&](const Layout& lay) {
    const double r = lay.half_span + margin;
    return Extent{-r, r, -r, r};
  };
  switch (cls) {
    case ScenarioClass::low:
    case ScenarioClass::medium: {
      l = random_layout(rng, 12.0, 16.0);
      w.extent = extent_for(l);
      const bool low = cls == ScenarioClass::low;
      Primitive main;
      main.type = PrimitiveType::hill;
      main.center = along(l, rng.uniform(0.35, 0.65), rng.uniform(-1.5, 1.5));
      main.height = low ? rng.uniform(0.5, 0.9) : rng.uniform(1.3, 1.9);
      main.size = {rng.uniform(1.5, 2.5), rng.uniform(1.5, 2.5)};
      main.yaw = rng.uniform(0.0, std::numbers::pi);
      w.primitives.push_back(main);
      add_hills(rng, w.primitives, w.extent, l, rng.integer(2, 4), low ? 0.2 : 0.5,
                low ? 0.8 : 1.6, 1.2, 2.5, 2.5);
      break;
    }
    case ScenarioClass::high: {
      l = random_layout(rng, 18.0, 22.0);
      w.extent = extent_for(l);
      Primitive main;
      main.type = PrimitiveType::hill;
      main.center = along(l, rng.uniform(0.4, 0.6), rng.uniform(-1.5, 1.5));
      main.height = rng.uniform(3.0, 4.0);
      main.size = {rng.uniform(2.5, 3.5), rng.uniform(2.5, 3.5)};
      main.yaw = rng.uniform(0.0, std::numbers::pi);
      w.primitives.push_back(main);
      add_hills(rng, w.primitives, w.extent, l, rng.integer(2, 4), 1.0, 2.5, 1.5, 3.0, 3.0);
      add_hills(rng, w.primitives, w.extent, l, rng.integer(0, 2), -1.2, -0.5, 1.5, 2.5, 3.0);
      break;
    }
    case ScenarioClass::curb: {
      l = random_layout(rng, 12.0, 16.0);
      w.extent = extent_for(l);
      Primitive block;
      block.type = PrimitiveType::curb;
      block.center = along(l, rng.uniform(0.4, 0.6), rng.uniform(-1.0, 1.0));
      block.size = {rng.uniform(1.5, 3.0), rng.uniform(4.0, 8.0)};
      block.yaw = l.heading + rng.uniform(-0.3, 0.3);
      block.height = rng.uniform(0.4, 0.5);
      w.primitives.push_back(block);
      const int extra = rng.integer(2, 4);
      for (int k = 0; k < extra; ++k) {
        Primitive c;
        c.type = PrimitiveType::curb;
        c.center = random_point_away(rng, w.extent, l, 2.0, 4.0);
        c.size = {rng.uniform(1.0, 6.0), rng.uniform(1.0, 3.0)};
        c.yaw = rng.uniform(0.0, std::numbers::pi);
        c.height = rng.uniform(0.4, 0.5);
        w.primitives.push_back(c);
      }
      break;
    }
  }
  return w;
}

}  // namespace detail

/// Seeded world of the requested class. Rejects draws whose realized gain
/// violates the class, whose start or goal is not level, or whose start and
/// goal are not joined by terrain flatter than 25 degrees.
inline Scenario generate_scenario(ScenarioClass cls, std::uint64_t seed,
                                  const Scenario& defaults = {}) {
  Rng rng(seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(cls) + 1);
  const double level = std::tan(deg_to_rad(5.0));
  const double passable = std::tan(deg_to_rad(25.0));
  for (int attempt = 0; attempt < 1000; ++attempt) {
    detail::Layout l;
    TerrainWorld w = detail::candidate_world(rng, cls, l);
    if (!class_matches(w, defaults.sim.clearance)) continue;
    if (terrain_slope(w, l.start) > level || terrain_slope(w, l.goal) > level) continue;
    if (!safely_connected(w, l.start, l.goal, passable)) continue;
    Scenario s = defaults;
    s.name = std::string(to_string(cls)) + "-" + std::to_string(seed);
    s.seed = seed;
    s.world = std::move(w);
    s.start = l.start;
    s.goal = l.goal;
    s.start_heading = l.heading;
    return s;
  }
  throw ConfigError("could not generate a valid " + std::string(to_string(cls)) + " world");
}

}  // namespace terp

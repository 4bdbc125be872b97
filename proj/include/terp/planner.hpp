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

// Cost-map construction, exploration radius, candidate arcs, Dijkstra
// least-cost fields and least-cost waypoint selection.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <queue>
#include <string>
#include <tuple>
#include <vector>

#include "terp/attention.hpp"
#include "terp/errors.hpp"
#include "terp/grid.hpp"

namespace terp {

struct PlannerConfig {
  double c_max = 0.3;
  double gamma_explore = std::numbers::pi / 3.0;
  double k1 = 1.0;
  double k2 = 0.5;
  double base_cost = 1.0;
  double waypoint_radius = 0.4;
  double replan_period = 1.5;

  void validate() const {
    if (!(k1 > 0) || k2 < 0 || !(gamma_explore > 0) ||
        gamma_explore > std::numbers::pi + 1e-12 || !(c_max > 0) ||
        !(base_cost > 0) || !(waypoint_radius > 0) || !(replan_period > 0)) {
      throw ConfigError("invalid planner configuration");
    }
  }
};

/// C = |E_N * A|, then every entry above c_max becomes +inf.
inline CostMap build_costmap(const ElevationGrid& normalized,
                             const AttentionMask& mask, double c_max) {
  if (!normalized.height.same_shape(mask.weight)) {
    throw ContractError("elevation and mask sizes differ");
  }
  if (normalized.any_missing()) {
    throw PreconditionError("cost-map needs an infilled elevation grid");
  }
  CostMap c{Grid<double>(normalized.n(), normalized.res(), 0.0)};
  const auto e = normalized.height.cells();
  const auto a = mask.weight.cells();
  auto out = c.cost.cells();
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (a[k] < 0.0 || a[k] > 1.0) throw ContractError("mask weight outside [0, 1]");
    const double v = std::abs(e[k] * a[k]);
    out[k] = v > c_max ? kInf : v;
  }
  return c;
}

/// Cells whose centers lie within `radius` meters of the robot.
template <typename Fn>
void for_each_in_circle(int n, double res, double radius, Fn&& fn) {
  const int h = n / 2;
  for (int i = -h; i < h; ++i) {
    for (int j = -h; j < h; ++j) {
      if (res * std::hypot(i, j) <= radius) fn(CellIndex{i, j});
    }
  }
}

/// r = min(r_sense - res, k1 + k2 / mean(finite C inside the circle of the
/// previous radius)). Throws DegenerateRegion when that circle has no finite
/// cell.
inline double explore_radius(const CostMap& c, double k1, double k2,
                             double r_sense, double prior_radius) {
  const double cap = r_sense - c.res();
  double sum = 0.0;
  std::size_t count = 0;
  for_each_in_circle(c.n(), c.res(), prior_radius, [&](CellIndex idx) {
    const double v = c.cost(idx);
    if (std::isfinite(v)) {
      sum += v;
      ++count;
    }
  });
  if (count == 0) throw DegenerateRegion("exploration circle fully blocked");
  const double mean = sum / static_cast<double>(count);
  if (mean == 0.0) return cap;
  return std::min(cap, k1 + k2 / mean);
}

/// Robot-frame bearing of a cell (0 along the heading, positive to the left).
inline double cell_bearing(CellIndex c) { return std::atan2(c.j, c.i); }

/// Cells crossed by the arc of width gamma (generation 1) or the ring segment
/// of width 2 * gamma minus the generation-1 cells (generation 2), sampled
/// every res / radius radians and ordered by bearing error.
inline std::vector<CellIndex> candidate_arc(int n, double res, double radius,
                                            double gamma, double goal_bearing,
                                            int generation) {
  if (generation != 1 && generation != 2) {
    throw ContractError("arc generation must be 1 or 2");
  }
  if (!(radius >= 2.0 * res - 1e-12)) {
    throw PreconditionError("exploration radius must be >= 2 * res");
  }
  const double step = res / radius;
  const int h = n / 2;
  auto enumerate = [&](double half_width) {
    std::vector<CellIndex> cells;
    const int m = static_cast<int>(std::floor(half_width / step + 1e-9));
    for (int k = -m; k <= m; ++k) {
      const double a = goal_bearing + k * step;
      const CellIndex c = nearest_cell({radius * std::cos(a), radius * std::sin(a)}, res);
      if (c.i < -h || c.i >= h || c.j < -h || c.j >= h) continue;
      cells.push_back(c);
    }
    std::ranges::sort(cells);
    cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
    return cells;
  };

  std::vector<CellIndex> cells = enumerate(0.5 * gamma);
  if (generation == 2) {
    const std::vector<CellIndex> inner = std::move(cells);
    const std::vector<CellIndex> outer = enumerate(gamma);
    cells.clear();
    std::ranges::set_difference(outer, inner, std::back_inserter(cells));
  }
  if (cells.empty()) throw RangeError("candidate arc lies outside the grid");
  std::ranges::stable_sort(cells, [&](CellIndex a, CellIndex b) {
    return std::abs(wrap_angle(cell_bearing(a) - goal_bearing)) <
           std::abs(wrap_angle(cell_bearing(b) - goal_bearing));
  });
  return cells;
}

/// Single-source least-cost field over 8-connected finite cells.
struct DijkstraField {
  Grid<double> cost;          // kInf where unreachable
  Grid<std::int32_t> parent;  // storage offset of the predecessor, -1 at roots

  std::vector<CellIndex> path_to(CellIndex target) const {
    std::vector<CellIndex> path;
    if (!cost.contains(target) || std::isinf(cost(target))) return path;
    std::int32_t at = static_cast<std::int32_t>(cost.offset(target.i, target.j));
    while (at >= 0) {
      path.push_back(cost.index_of(static_cast<std::size_t>(at)));
      at = parent.cells()[static_cast<std::size_t>(at)];
    }
    std::ranges::reverse(path);
    return path;
  }
};

/// Edge weight for moving into `dest`: step length * (base + C(dest)).
inline double edge_weight(double res, bool diagonal, double base, double dest_cost) {
  const double len = diagonal ? res * std::numbers::sqrt2 : res;
  return len * (base + dest_cost);
}

inline DijkstraField dijkstra_field(const CostMap& c, CellIndex source = {0, 0},
                                    double base = 1.0) {
  const Grid<double>& grid = c.cost;
  if (!grid.contains(source) || std::isinf(grid(source))) {
    throw PreconditionError("Dijkstra source must be a finite cell");
  }
  DijkstraField f{Grid<double>(grid.n(), grid.res(), kInf),
                  Grid<std::int32_t>(grid.n(), grid.res(), -1)};
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  std::vector<std::uint8_t> done(grid.size(), 0);
  const std::size_t src = grid.offset(source.i, source.j);
  f.cost.cells()[src] = 0.0;
  open.emplace(0.0, src);
  while (!open.empty()) {
    const auto [d, at] = open.top();
    open.pop();
    if (done[at]) continue;
    done[at] = 1;
    const CellIndex u = grid.index_of(at);
    for (int di = -1; di <= 1; ++di) {
      for (int dj = -1; dj <= 1; ++dj) {
        if (di == 0 && dj == 0) continue;
        const CellIndex v{u.i + di, u.j + dj};
        if (!grid.contains(v)) continue;
        const double cv = grid(v);
        if (std::isinf(cv)) continue;
        const std::size_t vo = grid.offset(v.i, v.j);
        if (done[vo]) continue;
        const double nd = d + edge_weight(grid.res(), di != 0 && dj != 0, base, cv);
        if (nd < f.cost.cells()[vo]) {
          f.cost.cells()[vo] = nd;
          f.parent.cells()[vo] = static_cast<std::int32_t>(at);
          open.emplace(nd, vo);
        }
      }
    }
  }
  return f;
}

struct Candidate {
  CellIndex cell;
  double cost = kInf;
};

struct WaypointPlan {
  CellIndex cell;
  Point2 waypoint;               // robot frame, meters
  std::vector<CellIndex> path;   // (0,0) ... cell
  double cost = kInf;
  int generation = 1;
  double radius = 0.0;
  bool radius_halved = false;    // fallback beyond the second arc was used
  std::vector<Candidate> candidates;  // the generation that produced the plan
  std::vector<CellIndex> least_cost;  // argmin set of that generation
};

/// Picks the least-cost arc candidate, breaking cost ties by distance to the
/// goal and then by bearing error. Falls back to the 2 * gamma arc, then to
/// half the radius, before giving up with PlannerStuck.
inline WaypointPlan select_waypoint(const CostMap& c, const PlannerConfig& cfg,
                                    Point2 goal, const DijkstraField& field,
                                    double radius) {
  const double res = c.res();
  const double goal_bearing = std::atan2(goal.y, goal.x);
  std::vector<double> radii{radius};
  if (0.5 * radius >= 2.0 * res) radii.push_back(0.5 * radius);

  for (std::size_t ri = 0; ri < radii.size(); ++ri) {
    for (int gen = 1; gen <= 2; ++gen) {
      std::vector<CellIndex> arc;
      try {
        arc = candidate_arc(c.n(), res, radii[ri], cfg.gamma_explore, goal_bearing, gen);
      } catch (const RangeError&) {
        continue;
      }
      WaypointPlan plan;
      plan.generation = gen;
      plan.radius = radii[ri];
      plan.radius_halved = ri > 0;
      double best = kInf;
      for (const CellIndex cell : arc) {
        const double cost = field.cost(cell);
        plan.candidates.push_back({cell, cost});
        best = std::min(best, cost);
      }
      if (std::isinf(best)) continue;
      for (const auto& cand : plan.candidates) {
        if (cand.cost == best) plan.least_cost.push_back(cand.cell);
      }
      auto key = [&](CellIndex cell) {
        const Point2 p{res * cell.i, res * cell.j};
        return std::make_tuple(distance(p, goal),
                               std::abs(wrap_angle(cell_bearing(cell) - goal_bearing)),
                               cell);
      };
      plan.cell = *std::ranges::min_element(
          plan.least_cost, [&](CellIndex a, CellIndex b) { return key(a) < key(b); });
      plan.waypoint = {res * plan.cell.i, res * plan.cell.j};
      plan.cost = best;
      plan.path = field.path_to(plan.cell);
      return plan;
    }
  }
  throw PlannerStuck("no finite waypoint candidate");
}

}  // namespace terp

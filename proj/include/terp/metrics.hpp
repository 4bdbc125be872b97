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

#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "terp/grid.hpp"
#include "terp/terrain.hpp"

namespace terp {

struct EpisodeMetrics {
  bool success = false;
  double ceg = 0.0;          // meters of absolute elevation change
  double norm_length = 0.0;  // path length / straight-line start-goal distance
  double heading_dev = 0.0;  // radians, summed per control step
  double wall_time = 0.0;    // seconds; never written to deterministic outputs
  std::string failure_reason;
};

/// Cumulative elevation gradient, normalized length and summed goal heading
/// deviation of a logged trajectory.
inline EpisodeMetrics compute_metrics(std::span<const Pose> trajectory,
                                      const TerrainWorld& world, Point2 start,
                                      Point2 goal) {
  EpisodeMetrics m;
  if (trajectory.empty()) throw PreconditionError("empty trajectory");
  double length = 0.0;
  double prev_z = world.z(trajectory.front().pos);
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    const Pose& p = trajectory[k];
    if (k > 0) {
      const double z = world.z(p.pos);
      m.ceg += std::abs(z - prev_z);
      prev_z = z;
      length += distance(trajectory[k - 1].pos, p.pos);
    }
    const Point2 to_goal = goal - p.pos;
    if (norm(to_goal) > 0.0) {
      m.heading_dev += std::abs(wrap_angle(std::atan2(to_goal.y, to_goal.x) - p.heading));
    }
  }
  const double straight = distance(start, goal);
  m.norm_length = straight > 0.0 ? length / straight : 0.0;
  return m;
}

inline std::vector<Pose> poses_of(std::span<const RobotState> states) {
  std::vector<Pose> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back(s.pose());
  return out;
}

}  // namespace terp

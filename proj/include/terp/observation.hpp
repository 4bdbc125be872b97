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

// Observation vector shared by the environment server and the audit dump:
// flattened normalized elevation, five pose terms and the heading gradient.

#pragma once

#include <cmath>
#include <vector>

#include "terp/errors.hpp"
#include "terp/grid.hpp"
#include "terp/terrain.hpp"

namespace terp {

inline constexpr int kPoseTerms = 5;

inline std::size_t observation_size(int n) {
  return static_cast<std::size_t>(n) * n + kPoseTerms + n / 2;
}

/// E_N row-major (ascending i, then j), then d_goal, alpha_goal,
/// alpha_relative, |roll|, |pitch|, then h ordered far to near.
inline std::vector<double> build_observation(const RobotState& s, const ElevationGrid& normalized,
                                             const std::vector<double>& heading_gradient) {
  const Grid<double>& e = normalized.height;
  if (heading_gradient.size() != static_cast<std::size_t>(e.half())) {
    throw ContractError("heading gradient length must be n/2");
  }
  std::vector<double> obs;
  obs.reserve(observation_size(e.n()));
  const int h = e.half();
  for (int i = -h; i < h; ++i) {
    for (int j = -h; j < h; ++j) obs.push_back(e(i, j));
  }
  const GoalGeometry g = goal_geometry(s);
  obs.push_back(g.d_goal);
  obs.push_back(g.alpha_goal);
  obs.push_back(g.alpha_relative);
  obs.push_back(std::abs(s.roll));
  obs.push_back(std::abs(s.pitch));
  obs.insert(obs.end(), heading_gradient.begin(), heading_gradient.end());
  return obs;
}

}  // namespace terp

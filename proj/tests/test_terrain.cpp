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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "terp/grid.hpp"
#include "terp/terrain.hpp"
#include "test_support.hpp"

namespace terp {
namespace {

using std::numbers::pi;
using testing::flat_world;
using testing::plane_world;
using testing::state_at;

TerrainWorld wall_world() {
  TerrainWorld w = flat_world();
  Primitive wall;
  wall.type = PrimitiveType::curb;
  wall.center = {2.0, 0.0};
  wall.size = {0.5, 6.0};
  wall.height = 2.0;
  w.primitives.push_back(wall);
  return w;
}

// Independent occlusion oracle: march the straight sight line in world
// coordinates from the mast top to the ground under each cell.
bool oracle_hidden(const TerrainWorld& w, Point2 from, double mast, Point2 to) {
  const double z0 = w.z(from) + mast;
  const double z1 = w.z(to);
  const double dx = to.x - from.x, dy = to.y - from.y;
  const double d = std::sqrt(dx * dx + dy * dy);
  for (double s = 0.05; s < d; s += 0.05) {
    const double f = s / d;
    if (w.z({from.x + f * dx, from.y + f * dy}) > z0 + f * (z1 - z0) + 0.01) return true;
  }
  return false;
}

void expect_matches_oracle(const TerrainWorld& w, const RobotState& s, const SimConfig& cfg) {
  const ElevationGrid e = sense_elevation(w, s, cfg);
  const int h = cfg.n / 2;
  const double c = std::cos(s.heading), sn = std::sin(s.heading);
  for (int i = -h; i < h; ++i) {
    for (int j = -h; j < h; ++j) {
      const double lx = cfg.res * i, ly = cfg.res * j;
      const Point2 p{s.pos.x + c * lx - sn * ly, s.pos.y + sn * lx + c * ly};
      const bool want = std::hypot(lx, ly) > cfg.r_sense || !w.inside(p) ||
                        oracle_hidden(w, s.pos, cfg.sensor_height, p);
      ASSERT_EQ(e.is_missing(i, j), want) << "cell " << i << "," << j;
      if (!want) EXPECT_NEAR(e.height(i, j), w.z(p) - w.z(s.pos), 1e-12);
    }
  }
}

TEST(Sensing, FlatWorldIsZeroInRange) {
  const SimConfig cfg;
  const TerrainWorld w = flat_world();
  const ElevationGrid e = sense_elevation(w, state_at(w, {0, 0}, 0.3, {5, 0}), cfg);
  for (int i = -20; i < 20; ++i) {
    for (int j = -20; j < 20; ++j) {
      const bool in_range = std::hypot(0.25 * i, 0.25 * j) <= cfg.r_sense;
      EXPECT_EQ(e.is_missing(i, j), !in_range);
      if (in_range) EXPECT_EQ(e.height(i, j), 0.0);
    }
  }
}

TEST(Sensing, CellBeyondRangeIsMissing) {
  const SimConfig cfg;
  const TerrainWorld w = flat_world();
  const ElevationGrid e = sense_elevation(w, state_at(w, {0, 0}, 0.0, {5, 0}), cfg);
  EXPECT_TRUE(e.is_missing(-20, -20));
  EXPECT_TRUE(e.is_missing(19, 19));
  EXPECT_FALSE(e.is_missing(19, 0));
}

TEST(Sensing, WallOccludesCellsBehindIt) {
  const SimConfig cfg;
  const TerrainWorld w = wall_world();
  const RobotState s = state_at(w, {0, 0}, 0.0, {8, 0});
  const ElevationGrid e = sense_elevation(w, s, cfg);
  EXPECT_TRUE(e.is_missing(14, 0));
  EXPECT_FALSE(e.is_missing(4, 0));
  expect_matches_oracle(w, s, cfg);
}

TEST(Sensing, RandomHillWorldsMatchRayMarch) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> pos(-3.0, 3.0), hgt(-1.5, 2.0), sig(0.4, 1.5),
      ang(-pi, pi);
  SimConfig cfg;
  cfg.n = 16;
  cfg.res = 0.25;
  cfg.r_sense = 2.0;
  for (int trial = 0; trial < 10; ++trial) {
    TerrainWorld w = flat_world(4.0);
    for (int k = 0; k < 4; ++k) {
      Primitive p;
      p.center = {pos(rng), pos(rng)};
      p.size = {sig(rng), sig(rng)};
      p.height = hgt(rng);
      w.primitives.push_back(p);
    }
    expect_matches_oracle(w, state_at(w, {pos(rng) / 2, pos(rng) / 2}, ang(rng), {3, 3}), cfg);
  }
}

TEST(Sensing, OutsideWorldIsSimulationError) {
  const TerrainWorld w = flat_world(5.0);
  RobotState s = state_at(w, {0, 0}, 0.0, {1, 0});
  s.pos = {6.0, 0.0};
  EXPECT_THROW(sense_elevation(w, s, SimConfig{}), SimulationError);
}

TEST(Attitude, FlatIsLevel) {
  const Attitude a = estimate_attitude(flat_world(), {{1, 2}, 0.7}, 0.6);
  EXPECT_EQ(a.roll, 0.0);
  EXPECT_EQ(a.pitch, 0.0);
}

TEST(Attitude, RampAlongHeadingIsPitch) {
  const double a = 0.3;
  const TerrainWorld w = plane_world(std::tan(a), 0.0);
  const Attitude att = estimate_attitude(w, {{0, 0}, 0.0}, 0.6);
  EXPECT_NEAR(att.pitch, a, 1e-12);
  EXPECT_NEAR(att.roll, 0.0, 1e-12);
}

TEST(Attitude, RampAcrossHeadingIsRoll) {
  const double a = 0.3;
  const TerrainWorld w = plane_world(std::tan(a), 0.0);
  const Attitude att = estimate_attitude(w, {{0, 0}, pi / 2}, 0.6);
  EXPECT_NEAR(att.pitch, 0.0, 1e-12);
  EXPECT_NEAR(std::abs(att.roll), a, 1e-12);
}

TEST(Attitude, InvariantToConstantOffset) {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    TerrainWorld w = flat_world();
    Primitive hill;
    hill.center = {u(rng), u(rng)};
    hill.size = {1.0 + u(rng) * 0.5, 1.0};
    hill.height = 2.0 * u(rng);
    w.primitives.push_back(hill);
    const Pose pose{{u(rng), u(rng)}, pi * u(rng)};
    const Attitude a = estimate_attitude(w, pose, 0.6);
    Primitive lift;
    lift.type = PrimitiveType::plane;
    lift.height = 5.0 * u(rng);
    w.primitives.push_back(lift);
    const Attitude b = estimate_attitude(w, pose, 0.6);
    EXPECT_NEAR(a.roll, b.roll, 1e-12);
    EXPECT_NEAR(a.pitch, b.pitch, 1e-12);
  }
}

TEST(Attitude, NonPositiveFootprintRejected) {
  EXPECT_THROW(estimate_attitude(flat_world(), {}, 0.0), PreconditionError);
}

TEST(Kinematics, ZeroCommandKeepsPose) {
  const TerrainWorld w = flat_world();
  const RobotState s = state_at(w, {1, -1}, 0.4, {5, 5});
  const RobotState t = step_kinematics(w, s, 0.0, 0.0, SimConfig{});
  EXPECT_EQ(t.pos, s.pos);
  EXPECT_EQ(t.heading, s.heading);
  EXPECT_NEAR(t.t, 0.1, 1e-15);
}

TEST(Kinematics, StraightStep) {
  const TerrainWorld w = flat_world();
  const RobotState t = step_kinematics(w, state_at(w, {0, 0}, 0.0, {5, 0}), 1.0, 0.0, SimConfig{});
  EXPECT_NEAR(t.pos.x, 0.1, 1e-15);
  EXPECT_EQ(t.pos.y, 0.0);
}

TEST(Kinematics, DisplacementEqualsSpeedTimesDtWithoutTurning) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> v(-1.0, 1.0), ang(-pi, pi);
  const TerrainWorld w = plane_world(0.2, -0.1);
  for (int trial = 0; trial < 100; ++trial) {
    const RobotState s = state_at(w, {v(rng), v(rng)}, ang(rng), {5, 5});
    const double speed = v(rng);
    const RobotState t = step_kinematics(w, s, speed, 0.0, SimConfig{});
    EXPECT_NEAR(distance(t.pos, s.pos), std::abs(speed) * 0.1, 1e-12);
  }
}

TEST(Kinematics, CircleCloses) {
  const TerrainWorld w = flat_world();
  SimConfig cfg;
  cfg.dt = 0.01;
  RobotState s = state_at(w, {0, 0}, 0.0, {5, 0});
  const int steps = static_cast<int>(std::lround(2 * pi / cfg.dt));
  double far = 0.0;
  for (int k = 0; k < steps; ++k) {
    s = step_kinematics(w, s, 1.0, 1.0, cfg);
    far = std::max(far, norm(s.pos));
  }
  EXPECT_LT(norm(s.pos), 0.05);
  EXPECT_NEAR(far, 2.0, 0.05);  // closed-form diameter 2v/omega
}

TEST(Kinematics, LimitViolationIsContractError) {
  const TerrainWorld w = flat_world();
  const RobotState s = state_at(w, {0, 0}, 0.0, {5, 0});
  EXPECT_THROW(step_kinematics(w, s, 1.5, 0.0, SimConfig{}), ContractError);
  EXPECT_THROW(step_kinematics(w, s, 0.0, -1.2, SimConfig{}), ContractError);
}

RewardWeights unit_betas(int half) {
  return {1.0, 1.0, 1.0, 1.0, RewardWeights::heading_weights(half)};
}

TEST(Reward, AtGoalOnlyStability) {
  const TerrainWorld w = flat_world();
  const RobotState s = state_at(w, {3, 0}, 0.0, {3, 0});
  const std::vector<double> h(20, 0.0);
  const Reward r = compute_reward(s, h, unit_betas(20));
  EXPECT_DOUBLE_EQ(r.total, 2.0);
  EXPECT_EQ(r.stable, 2.0);
}

TEST(Reward, DistanceAndHeadingPenalties) {
  const TerrainWorld w = flat_world();
  const RobotState s = state_at(w, {0, 0}, -pi / 4, {3, 0});
  const std::vector<double> h(20, 0.0);
  const Reward r = compute_reward(s, h, unit_betas(20));
  EXPECT_NEAR(r.total, -3.0 - pi / 4 + 2.0, 1e-12);
}

TEST(Reward, GradientTermMatchesDotProductOracle) {
  const SimConfig cfg;
  const TerrainWorld w = plane_world(0.15, 0.05);
  const RobotState s = state_at(w, {0, 0}, 0.2, {5, 0});
  const ElevationGrid e = infill_missing(sense_elevation(w, s, cfg));
  const GradientField g = gradient_field(e);
  // Weights and h rebuilt from the raw grid.
  double wsum = 0.0, dot = 0.0;
  std::vector<double> wv(20);
  for (int k = 0; k < 20; ++k) wsum += (wv[k] = 0.1 + 0.9 * k / 19.0);
  for (int k = 0; k < 20; ++k) {
    const int i = 19 - k;
    const double di = i == 19 ? (e.height(i, 0) - e.height(i - 1, 0)) / 0.25
                              : (e.height(i + 1, 0) - e.height(i - 1, 0)) / 0.5;
    const double dj = (e.height(i, 1) - e.height(i, -1)) / 0.5;
    dot += wv[k] / wsum * std::hypot(di, dj);
  }
  const Reward r = compute_reward(s, g.heading, cfg.reward);
  EXPECT_NEAR(r.grad, -dot, 1e-12);
  EXPECT_LT(r.grad, 0.0);
}

TEST(Reward, ComponentSigns) {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(-1.0, 1.0), att(-1.5, 1.5), hv(0.0, 2.0);
  const TerrainWorld w = flat_world();
  const SimConfig cfg;
  for (int trial = 0; trial < 500; ++trial) {
    RobotState s = state_at(w, {5 * u(rng), 5 * u(rng)}, pi * u(rng), {5 * u(rng), 5 * u(rng)});
    s.roll = att(rng);
    s.pitch = att(rng);
    std::vector<double> h(20);
    for (double& x : h) x = hv(rng);
    const Reward r = compute_reward(s, h, cfg.reward);
    EXPECT_LE(r.dist, 0.0);
    EXPECT_LE(r.head, 0.0);
    EXPECT_LE(r.grad, 0.0);
    EXPECT_GE(r.stable, 0.0);
    EXPECT_LT(r.stable, 2.0);
  }
}

TEST(Reward, InvalidWeightsRejected) {
  const TerrainWorld w = flat_world();
  const RobotState s = state_at(w, {0, 0}, 0.0, {3, 0});
  const std::vector<double> h(20, 0.0);
  RewardWeights bad = unit_betas(20);
  bad.beta_head = -1.0;
  EXPECT_THROW(compute_reward(s, h, bad), ContractError);
  RewardWeights flat_w = unit_betas(20);
  flat_w.w.assign(20, 0.05);
  EXPECT_THROW(compute_reward(s, h, flat_w), ContractError);
  EXPECT_THROW(compute_reward(s, std::vector<double>(10, 0.0), unit_betas(20)), ContractError);
}

TEST(Status, GoalRadiusIsSuccess) {
  const TerrainWorld w = flat_world();
  const RobotState s = state_at(w, {0, 0}, 0.0, {0.2, 0});
  EXPECT_TRUE(episode_status(s, nullptr, SimConfig{}).success());
}

TEST(Status, PitchBeyondLimitTips) {
  const TerrainWorld w = flat_world();
  RobotState s = state_at(w, {0, 0}, 0.0, {0.2, 0});
  s.pitch = 40.0 * pi / 180.0;
  const EpisodeStatus st = episode_status(s, nullptr, SimConfig{});
  EXPECT_TRUE(st.failure());
  EXPECT_EQ(st.reason, "tipped");
}

TEST(Status, PastTimeLimitTimesOut) {
  const SimConfig cfg;
  const TerrainWorld w = flat_world();
  RobotState s = state_at(w, {0, 0}, 0.0, {4, 0});
  s.t = cfg.t_max;
  EXPECT_TRUE(episode_status(s, nullptr, cfg).running());
  s.t = cfg.t_max + cfg.dt;
  EXPECT_EQ(episode_status(s, nullptr, cfg).reason, "timeout");
}

TEST(Status, BlockedRobotCellFails) {
  const TerrainWorld w = flat_world();
  const RobotState s = state_at(w, {0, 0}, 0.0, {4, 0});
  CostMap c{Grid<double>(8, 0.25, 0.0)};
  EXPECT_TRUE(episode_status(s, &c, SimConfig{}).running());
  c.cost(0, 0) = kInf;
  EXPECT_EQ(episode_status(s, &c, SimConfig{}).reason, "blocked");
}

TEST(GoalGeometry, Examples) {
  const TerrainWorld w = flat_world();
  EXPECT_EQ(goal_geometry(state_at(w, {2, 2}, 0.0, {2, 2})).d_goal, 0.0);
  EXPECT_EQ(goal_geometry(state_at(w, {0, 0}, 0.0, {4, 0})).alpha_goal, 0.0);
  RobotState s = state_at(w, {0, 0}, 0.0, {4, 4});
  s.pos = {1.5, 1.5};
  EXPECT_NEAR(goal_geometry(s).alpha_relative, 0.0, 1e-12);
  EXPECT_EQ(goal_geometry(state_at(w, {0, 0}, 1.0, {4, 4})).alpha_relative, 0.0);
}

TEST(GoalGeometry, BearingIsWrapped) {
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  const TerrainWorld w = flat_world();
  for (int trial = 0; trial < 500; ++trial) {
    const GoalGeometry g =
        goal_geometry(state_at(w, {u(rng), u(rng)}, u(rng), {u(rng), u(rng)}));
    EXPECT_GT(g.alpha_goal, -pi);
    EXPECT_LE(g.alpha_goal, pi);
    EXPECT_GE(g.d_goal, 0.0);
  }
}

}  // namespace
}  // namespace terp

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

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <future>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <gtest/gtest.h>

#include "terp/audit.hpp"
#include "terp/env_server.hpp"
#include "terp/metrics.hpp"
#include "terp/observation.hpp"
#include "terp/render.hpp"
#include "terp/suite.hpp"
#include "test_support.hpp"

namespace terp {
namespace {

namespace fs = std::filesystem;
using std::numbers::pi;

struct TempDir {
  fs::path path;
  TempDir() {
    char tmpl[] = "/tmp/terp_test_XXXXXX";
    path = ::mkdtemp(tmpl);
  }
  ~TempDir() { fs::remove_all(path); }
};

json flat_scenario_json(double t_max = 120.0) {
  return json{{"name", "flat"},
              {"class", "low"},
              {"extent", {{"x_min", -5}, {"x_max", 15}, {"y_min", -10}, {"y_max", 10}}},
              {"primitives", json::array()},
              {"start", {0, 0}},
              {"goal", {6, 0}},
              {"sim", {{"t_max", t_max}}}};
}

SuiteConfig flat_suite() {
  return suite_from(json{{"name", "flat"}, {"scenarios", {flat_scenario_json()}}});
}

std::vector<Pose> straight_poses(Point2 a, Point2 b, int steps, double heading) {
  std::vector<Pose> out;
  for (int k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) / steps;
    out.push_back({{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)}, heading});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Metrics

TEST(Metrics, FlatStraightRun) {
  const TerrainWorld w = testing::flat_world();
  const auto poses = straight_poses({0, 0}, {6, 0}, 60, 0.0);
  const EpisodeMetrics m = compute_metrics(poses, w, {0, 0}, {6, 0});
  EXPECT_EQ(m.ceg, 0.0);
  EXPECT_NEAR(m.norm_length, 1.0, 1e-12);
  // The last pose sits on the goal, where the bearing is undefined.
  EXPECT_EQ(m.heading_dev, 0.0);
}

TEST(Metrics, BumpCegIsTwiceThePeak) {
  TerrainWorld w = testing::flat_world();
  w.primitives.push_back({PrimitiveType::hill, {5, 0}, {1, 1}, 1.0});
  const auto poses = straight_poses({0, 0}, {10, 0}, 200, 0.0);
  const EpisodeMetrics m = compute_metrics(poses, w, {0, 0}, {10, 0});
  EXPECT_NEAR(m.ceg, 2.0, 0.05);
  // Monotone up then down through a sampled peak: 2 z_peak - z_start - z_end.
  EXPECT_NEAR(m.ceg, 2.0 * w.z({5, 0}) - w.z({0, 0}) - w.z({10, 0}), 1e-12);
}

TEST(Metrics, HeadingDeviationSumsPerPose) {
  const TerrainWorld w = testing::flat_world();
  std::vector<Pose> facing(10, Pose{{0, 0}, 0.0});
  EXPECT_EQ(compute_metrics(facing, w, {0, 0}, {5, 0}).heading_dev, 0.0);
  std::vector<Pose> away(4, Pose{{0, 0}, pi});
  EXPECT_NEAR(compute_metrics(away, w, {0, 0}, {5, 0}).heading_dev, 4 * pi, 1e-12);
  std::vector<Pose> side(3, Pose{{0, 0}, -pi / 2});
  EXPECT_NEAR(compute_metrics(side, w, {0, 0}, {0, 5}).heading_dev, 3 * pi, 1e-12);
}

TEST(Metrics, EmptyTrajectoryRejected) {
  EXPECT_THROW(compute_metrics({}, testing::flat_world(), {0, 0}, {1, 0}), PreconditionError);
}

TEST(Metrics, SuccessfulRunIsNotShorterThanItsReach) {
  const Scenario sc = scenario_from(flat_scenario_json());
  for (PlannerKind k : {PlannerKind::terp, PlannerKind::dwa, PlannerKind::ego,
                        PlannerKind::ego_plus}) {
    const EpisodeMetrics m = episode_metrics(run_episode(sc, k), sc);
    ASSERT_TRUE(m.success) << to_string(k);
    const double d = distance(sc.start, sc.goal);
    EXPECT_GE(m.norm_length, 1.0 - 2.0 * sc.sim.res / d) << to_string(k);
  }
}

// ---------------------------------------------------------------------------
// Suites and CSV

TEST(Suite, ParseSeeds) {
  EXPECT_EQ(parse_seeds("1..30").count(), 30u);
  EXPECT_EQ(parse_seeds("7").first, 7u);
  EXPECT_EQ(parse_seeds("7").count(), 1u);
  EXPECT_THROW(parse_seeds("5..1"), ConfigError);
  EXPECT_THROW(parse_seeds("a..3"), ConfigError);
  EXPECT_THROW(parse_seeds("-1"), ConfigError);
  EXPECT_THROW(parse_seeds(""), ConfigError);
}

TEST(Suite, FlatSuiteSucceedsForEveryPlanner) {
  const SuiteConfig cfg = flat_suite();
  for (PlannerKind k : {PlannerKind::terp, PlannerKind::terp_noattn, PlannerKind::dwa,
                        PlannerKind::ego, PlannerKind::ego_plus}) {
    const auto rows = run_suite(cfg, k, parse_seeds("1..2"), {.threads = 1});
    const SuiteSummary s = summarize(rows);
    EXPECT_EQ(s.successes, 2u) << to_string(k);
    EXPECT_EQ(s.success_percent, 100.0);
    for (const auto& r : rows) {
      EXPECT_EQ(r.checks.candidate_violations, 0);
      EXPECT_EQ(r.checks.blocked_pose_violations, 0);
    }
  }
}

TEST(Suite, CsvIsIdenticalAcrossThreadCounts) {
  const SuiteConfig cfg =
      suite_from(json{{"name", "mixed"}, {"scenarios", {{{"generate", "low"}}, flat_scenario_json()}}});
  const auto one = run_suite(cfg, PlannerKind::terp, parse_seeds("1..3"), {.threads = 1});
  const auto two = run_suite(cfg, PlannerKind::terp, parse_seeds("1..3"), {.threads = 2});
  ASSERT_EQ(one.size(), 6u);
  EXPECT_EQ(format_csv(cfg.name, one), format_csv(cfg.name, two));
  EXPECT_EQ(one[0].scenario, "low-1");
  EXPECT_EQ(one[3].scenario, "flat-1");
}

TEST(Suite, SummaryBlockIsRational) {
  std::vector<EpisodeRow> rows(3);
  rows[0].metrics = {true, 1.0, 1.1, 0.0};
  rows[1].metrics = {false, 5.0, 2.0, 0.0};
  rows[2].metrics = {true, 3.0, 1.3, 0.0};
  const std::string csv = format_csv("s", rows);
  EXPECT_NE(csv.find("\n# summary\n"), std::string::npos);
  EXPECT_NE(csv.find("success_rate,2/3\n"), std::string::npos);
  EXPECT_NE(csv.find("ceg_median,3.000000\n"), std::string::npos);
  EXPECT_NE(csv.find("ceg_success_median,2.000000\n"), std::string::npos);
  const SuiteSummary s = summarize(rows);
  EXPECT_NEAR(s.success_percent, 200.0 / 3.0, 1e-12);
}

TEST(Suite, CsvQuotesAwkwardFields) {
  std::vector<EpisodeRow> rows(1);
  rows[0].scenario = "a,b";
  rows[0].metrics.failure_reason = "crash: say \"no\"";
  const std::string csv = format_csv("s", rows);
  EXPECT_NE(csv.find(",\"a,b\","), std::string::npos);
  EXPECT_NE(csv.find("\"crash: say \"\"no\"\"\""), std::string::npos);
}

TEST(Suite, CrashingEpisodeIsRecordedAsFailure) {
  const Scenario sc = scenario_from(flat_scenario_json());
  EpisodeOptions opts;
  opts.mask = [](const FrameInputs&) -> AttentionMask { throw std::runtime_error("boom"); };
  const EpisodeResult r = run_episode(sc, PlannerKind::terp, opts);
  EXPECT_FALSE(r.status.success());
  EXPECT_EQ(r.status.reason, "crash: boom");
  EXPECT_EQ(r.trajectory.size(), 1u);

  // A missing mask directory entry crashes each episode, not the suite.
  TempDir tmp;
  const auto rows = run_suite(flat_suite(), PlannerKind::terp, parse_seeds("1..2"),
                              {.threads = 1, .mask_dir = tmp.path});
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& row : rows) {
    EXPECT_FALSE(row.metrics.success);
    EXPECT_EQ(row.metrics.failure_reason.rfind("crash:", 0), 0u);
  }
}

TEST(Suite, BadConfigsAreConfigErrors) {
  EXPECT_THROW(suite_from(json::array()), ConfigError);
  EXPECT_THROW(suite_from(json{{"name", "x"}}), ConfigError);
  EXPECT_THROW(suite_from(json{{"scenarios", json::array()}}), ConfigError);
  EXPECT_THROW(suite_from(json{{"scenarios", {{{"generate", "alpine"}}}}}), ConfigError);
  EXPECT_THROW(suite_from(json{{"sim", {{"n", 7}}}, {"scenarios", {{{"generate", "low"}}}}}),
               ConfigError);
  EXPECT_THROW(load_suite("/nonexistent/suite.json"), FormatError);
}

TEST(Suite, ShippedSuitesLoad) {
  for (const char* name : {"flat", "low", "medium", "high", "curb"}) {
    const SuiteConfig cfg = load_suite(fs::path(TERP_SOURCE_DIR) / "suites" / (std::string(name) + ".json"));
    EXPECT_FALSE(cfg.entries.empty()) << name;
  }
}

// ---------------------------------------------------------------------------
// Rendering

TEST(Render, TracksBecomePolylines) {
  const TerrainWorld w = testing::flat_world(5.0);
  const std::string none = render_svg(w, {}, {0, 0}, {3, 0});
  EXPECT_EQ(none.find("<polyline"), std::string::npos);
  EXPECT_NE(none.find("id=\"start\""), std::string::npos);
  EXPECT_NE(none.find("id=\"goal\""), std::string::npos);

  RenderTrack t{"terp", {{0, 0}, {1, 0}, {2, 1}, {3, 0}}};
  const std::string one = render_svg(w, {t}, {0, 0}, {3, 0});
  const auto at = one.find("points=\"");
  ASSERT_NE(at, std::string::npos);
  const std::string pts = one.substr(at + 8, one.find('"', at + 8) - at - 8);
  std::istringstream ss(pts);
  int vertices = 0;
  for (std::string tok; ss >> tok;) ++vertices;
  EXPECT_EQ(vertices, 4);
  EXPECT_EQ(pts.substr(0, pts.find(' ')), "100.00,100.00");
}

TEST(Render, OutputIsDeterministic) {
  TerrainWorld w = testing::flat_world(8.0);
  w.primitives.push_back({PrimitiveType::hill, {2, 1}, {1.5, 1}, 1.2});
  const std::vector<RenderTrack> tracks{{"a<b", {{0, 0}, {4, 2}}}, {"dwa", {{0, 0}, {4, -2}}}};
  const std::string a = render_svg(w, tracks, {0, 0}, {4, 0});
  EXPECT_EQ(a, render_svg(w, tracks, {0, 0}, {4, 0}));
  EXPECT_NE(a.find("a&lt;b"), std::string::npos);
}

// ---------------------------------------------------------------------------
// Environment server

json call(EnvSession& s, const json& req) { return json::parse(s.handle(req.dump())); }

TEST(Env, ObservationSize) {
  EXPECT_EQ(observation_size(40), 1625u);
  EXPECT_EQ(observation_size(16), 269u);
  for (int n = 4; n <= 64; n += 2) {
    EXPECT_EQ(observation_size(n), static_cast<std::size_t>(n * n + 5 + n / 2));
  }
}

TEST(Env, ResetReportsObservation) {
  EnvSession s(env_config_from(flat_scenario_json()));
  const json r = call(s, {{"cmd", "reset"}});
  EXPECT_EQ(r.at("obs").size(), 1625u);
  EXPECT_EQ(r.at("info").at("obs_size"), 1625);
  EXPECT_EQ(r.at("info").at("n"), 40);
  EXPECT_EQ(r.at("info").at("scenario"), "flat");

  json small = flat_scenario_json();
  small["sim"]["n"] = 16;
  small["sim"]["r_sense"] = 2.0;
  EnvSession s16(env_config_from(small));
  EXPECT_EQ(call(s16, {{"cmd", "reset"}}).at("obs").size(), 269u);
}

TEST(Env, ObservationLayoutMatchesSensing) {
  EnvSession s(env_config_from(flat_scenario_json()));
  const json r = call(s, {{"cmd", "reset"}});
  const RobotState& st = s.state();
  const auto obs = r.at("obs").get<std::vector<double>>();
  const GoalGeometry g = goal_geometry(st);
  EXPECT_DOUBLE_EQ(obs[1600], g.d_goal);
  EXPECT_DOUBLE_EQ(obs[1601], g.alpha_goal);
  EXPECT_DOUBLE_EQ(obs[1602], g.alpha_relative);
  EXPECT_DOUBLE_EQ(obs[1600], 6.0);
}

TEST(Env, StepRewardMatchesRewardFunction) {
  const Scenario sc = scenario_from(flat_scenario_json());
  EnvSession s(env_config_from(flat_scenario_json()));
  call(s, {{"cmd", "reset"}});
  const json r = call(s, {{"cmd", "step"}, {"action", {0.0, 0.0}}});
  const ElevationGrid e = infill_missing(sense_elevation(sc.world, s.state(), sc.sim));
  const Reward want = compute_reward(s.state(), gradient_field(e).heading, sc.sim.reward);
  EXPECT_DOUBLE_EQ(r.at("reward").get<double>(), want.total);
  EXPECT_DOUBLE_EQ(r.at("components").at("dist").get<double>(), want.dist);
  EXPECT_DOUBLE_EQ(r.at("components").at("head").get<double>(), want.head);
  EXPECT_FALSE(r.at("done").get<bool>());
  EXPECT_EQ(r.at("info").at("status"), "running");
  EXPECT_NEAR(r.at("info").at("t").get<double>(), sc.sim.dt, 1e-12);
}

TEST(Env, ProtocolErrors) {
  EnvSession s(env_config_from(flat_scenario_json(0.25)));
  auto kind = [&](const std::string& line) {
    const json r = json::parse(s.handle(line));
    return r.contains("error") ? r.at("kind").get<std::string>() : std::string();
  };
  EXPECT_EQ(kind(R"({"cmd":"step","action":[0,0]})"), "protocol");
  EXPECT_EQ(kind("{not json"), "parse");
  EXPECT_EQ(kind(R"({"command":"reset"})"), "protocol");
  EXPECT_EQ(kind(R"({"cmd":"jump"})"), "protocol");
  EXPECT_EQ(kind(R"({"cmd":"reset"})"), "");
  EXPECT_EQ(kind(R"({"cmd":"step","action":[2,0]})"), "protocol");
  EXPECT_EQ(kind(R"({"cmd":"step","action":[0]})"), "protocol");
  EXPECT_EQ(kind(R"({"cmd":"step","action":["a",0]})"), "protocol");

  json last;
  for (int k = 0; k < 3; ++k) last = call(s, {{"cmd", "step"}, {"action", {0, 0}}});
  EXPECT_TRUE(last.at("done").get<bool>());
  EXPECT_EQ(last.at("info").at("reason"), "timeout");
  EXPECT_EQ(kind(R"({"cmd":"step","action":[0,0]})"), "protocol");
  EXPECT_EQ(kind(R"({"cmd":"reset"})"), "");
  EXPECT_EQ(kind(R"({"cmd":"step","action":[0,0]})"), "");
}

TEST(Env, CloseEndsStream) {
  EnvSession s(env_config_from(flat_scenario_json()));
  std::istringstream in("{\"cmd\":\"reset\"}\n\n{\"cmd\":\"close\"}\n{\"cmd\":\"reset\"}\n");
  std::ostringstream out;
  serve_stream(in, out, s);
  EXPECT_TRUE(s.closed());
  std::istringstream replies(out.str());
  std::vector<std::string> lines;
  for (std::string l; std::getline(replies, l);) lines.push_back(l);
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[1], R"({"ok":true})");
}

TEST(Env, GeneratedWorldFollowsResetSeed) {
  EnvSession s(env_config_from(json{{"generate", "low"}, {"seed", 4}}));
  EXPECT_EQ(call(s, {{"cmd", "reset"}}).at("info").at("scenario"), "low-4");
  EXPECT_EQ(call(s, {{"cmd", "reset"}, {"seed", 9}}).at("info").at("scenario"), "low-9");
  EXPECT_EQ(call(s, {{"cmd", "reset"}, {"seed", -1}}).at("kind"), "protocol");
  EXPECT_THROW(env_config_from(json{{"generate", "alpine"}}), ConfigError);
}

std::string read_line(int fd) {
  std::string line;
  char c;
  while (::recv(fd, &c, 1, 0) == 1 && c != '\n') line += c;
  return line;
}

TEST(Env, TcpServesOneClient) {
  const EnvConfig cfg = env_config_from(flat_scenario_json());
  std::promise<int> port;
  std::thread server([&] { serve_tcp(0, cfg, [&](int p) { port.set_value(p); }, 1); });
  const int p = port.get_future().get();
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(static_cast<std::uint16_t>(p));
  ASSERT_EQ(::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr), 0);
  const std::string reqs =
      "{\"cmd\":\"reset\"}\n{\"cmd\":\"step\",\"action\":[1,0]}\n{\"cmd\":\"close\"}\n";
  ASSERT_EQ(::send(fd, reqs.data(), reqs.size(), 0), static_cast<ssize_t>(reqs.size()));
  EXPECT_EQ(json::parse(read_line(fd)).at("obs").size(), 1625u);
  EXPECT_TRUE(json::parse(read_line(fd)).contains("reward"));
  EXPECT_EQ(read_line(fd), R"({"ok":true})");
  ::close(fd);
  server.join();
}

// ---------------------------------------------------------------------------
// Scenarios

TEST(Scenario, JsonRoundTrip) {
  const Scenario a = generate_scenario(ScenarioClass::high, 3);
  const json ja = to_json(a);
  const Scenario b = scenario_from(ja);
  EXPECT_EQ(to_json(b).dump(), ja.dump());
  EXPECT_EQ(b.world.z({1.3, -0.7}), a.world.z({1.3, -0.7}));
}

TEST(Scenario, BadScenarioIsConfigError) {
  json j = flat_scenario_json();
  j["class"] = "alpine";
  EXPECT_THROW(scenario_from(j), ConfigError);
  j = flat_scenario_json();
  j["primitives"] = {{{"type", "crater"}}};
  EXPECT_THROW(scenario_from(j), ConfigError);
}

TEST(Generator, WorldsMatchTheirClass) {
  for (ScenarioClass c : {ScenarioClass::low, ScenarioClass::medium, ScenarioClass::high,
                          ScenarioClass::curb}) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const Scenario s = generate_scenario(c, seed);
      EXPECT_EQ(s.world.cls, c);
      EXPECT_TRUE(class_matches(s.world, s.sim.clearance)) << s.name;
      EXPECT_TRUE(s.world.inside(s.start));
      EXPECT_TRUE(s.world.inside(s.goal));
      EXPECT_LE(terrain_slope(s.world, s.start), std::tan(deg_to_rad(5.0)) + 1e-12);
    }
  }
}

TEST(Generator, SeedsAreDeterministic) {
  EXPECT_EQ(to_json(generate_scenario(ScenarioClass::medium, 11)).dump(),
            to_json(generate_scenario(ScenarioClass::medium, 11)).dump());
  EXPECT_NE(to_json(generate_scenario(ScenarioClass::medium, 11)).dump(),
            to_json(generate_scenario(ScenarioClass::medium, 12)).dump());
}

// ---------------------------------------------------------------------------
// Audit dumps and exported masks

TEST(Audit, WrittenMetricsRecompute) {
  TempDir tmp;
  const auto rows = run_suite(flat_suite(), PlannerKind::terp, parse_seeds("1"),
                              {.threads = 1, .audit_dir = tmp.path});
  const auto dirs = audit_episodes(tmp.path);
  ASSERT_EQ(dirs.size(), 1u);
  EXPECT_EQ(dirs[0].filename(), "flat-1_terp");
  EXPECT_TRUE(check_audit(dirs[0]).match);
  EXPECT_TRUE(fs::exists(dirs[0] / "frames" / "frame_000000" / "mask.txt"));
  EXPECT_TRUE(fs::exists(dirs[0] / "frames" / "frame_000000" / "costmap.txt"));
  EXPECT_EQ(static_cast<int>(std::distance(fs::directory_iterator(dirs[0] / "frames"),
                                           fs::directory_iterator{})),
            rows[0].frames);

  // Tamper with one pose.
  std::string traj = read_text_file(dirs[0] / "trajectory.csv");
  const auto line2 = traj.find('\n', traj.find('\n') + 1) + 1;
  const auto comma = traj.find(',', line2) + 1;
  traj.replace(comma, traj.find(',', comma) - comma, "0.5");
  write_text_file(dirs[0] / "trajectory.csv", traj);
  EXPECT_FALSE(check_audit(dirs[0]).match);
}

TEST(Audit, TrajectoryRoundTrip) {
  const Scenario sc = scenario_from(flat_scenario_json());
  const EpisodeResult r = run_episode(sc, PlannerKind::ego);
  const auto poses = parse_trajectory(format_trajectory(r.trajectory));
  ASSERT_EQ(poses.size(), r.trajectory.size());
  for (std::size_t k = 0; k < poses.size(); ++k) {
    EXPECT_EQ(poses[k].pos.x, r.trajectory[k].pos.x);
    EXPECT_EQ(poses[k].pos.y, r.trajectory[k].pos.y);
    EXPECT_EQ(poses[k].heading, r.trajectory[k].heading);
  }
  EXPECT_THROW(parse_trajectory("t,x\n"), FormatError);
}

TEST(MaskDir, ExportedMasksReproduceTheRun) {
  TempDir tmp;
  const Scenario sc = generate_scenario(ScenarioClass::medium, 2);
  EpisodeOptions record;
  record.on_frame = [&](const FrameRecord& f) {
    save_mask(tmp.path / mask_file_name(f.index), f.mask);
  };
  const EpisodeResult a = run_episode(sc, PlannerKind::terp, record);
  EpisodeOptions replay;
  replay.mask = file_mask_source(tmp.path);
  const EpisodeResult b = run_episode(sc, PlannerKind::terp, replay);
  EXPECT_EQ(a.status.reason, b.status.reason);
  ASSERT_EQ(a.trajectory.size(), b.trajectory.size());
  for (std::size_t k = 0; k < a.trajectory.size(); ++k) {
    EXPECT_EQ(a.trajectory[k].pos.x, b.trajectory[k].pos.x);
    EXPECT_EQ(a.trajectory[k].pos.y, b.trajectory[k].pos.y);
  }
}

TEST(MaskDir, UniformMasksReproduceTheAblation) {
  TempDir tmp;
  const Scenario sc = generate_scenario(ScenarioClass::low, 5);
  const EpisodeResult ablation = run_episode(sc, PlannerKind::terp_noattn);
  for (int f = 0; f < ablation.frame_count; ++f) {
    save_mask(tmp.path / mask_file_name(f), uniform_mask(sc.sim.n, sc.sim.res));
  }
  EpisodeOptions opts;
  opts.mask = file_mask_source(tmp.path);
  const EpisodeResult b = run_episode(sc, PlannerKind::terp, opts);
  ASSERT_EQ(ablation.trajectory.size(), b.trajectory.size());
  EXPECT_EQ(ablation.trajectory.back().pos.x, b.trajectory.back().pos.x);
  EXPECT_EQ(ablation.trajectory.back().pos.y, b.trajectory.back().pos.y);
}

// ---------------------------------------------------------------------------
// Command line

int run_cli(const std::string& args, std::string* out = nullptr) {
  const std::string cmd = std::string(TERP_CLI) + " " + args + " 2>/dev/null";
  FILE* p = ::popen(cmd.c_str(), "r");
  if (!p) return -1;
  std::string text;
  char buf[4096];
  for (std::size_t got; (got = std::fread(buf, 1, sizeof buf, p)) > 0;) text.append(buf, got);
  const int status = ::pclose(p);
  if (out) *out = text;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, RunWritesCsvAndRenders) {
  TempDir tmp;
  const std::string suite = (fs::path(TERP_SOURCE_DIR) / "suites" / "flat.json").string();
  const fs::path csv = tmp.path / "flat.csv";
  std::string out;
  ASSERT_EQ(run_cli("run --suite " + suite + " --planner ego --seeds 1..2 --threads 1 --out " +
                        csv.string() + " --render " + (tmp.path / "svg").string(),
                    &out),
            0);
  EXPECT_NE(out.find("success 2/2"), std::string::npos);
  EXPECT_NE(read_text_file(csv).find("success_rate,2/2\n"), std::string::npos);
  EXPECT_TRUE(fs::exists(tmp.path / "svg" / "flat-1_ego.svg"));
}

TEST(Cli, ExitCodes) {
  TempDir tmp;
  const std::string suite = (fs::path(TERP_SOURCE_DIR) / "suites" / "flat.json").string();
  const std::string out = " --out " + (tmp.path / "x.csv").string();
  EXPECT_EQ(run_cli("run --suite /nonexistent.json" + out), 2);
  EXPECT_EQ(run_cli("run --suite " + suite + " --seeds 9..1" + out), 2);
  EXPECT_EQ(run_cli("run --suite " + suite + " --mask-dir /nonexistent" + out), 2);
  EXPECT_NE(run_cli("run --suite " + suite + " --planner rrt" + out), 0);
  EXPECT_EQ(run_cli("serve --scenario " + suite + " --transport tcp:abc"), 2);
  EXPECT_EQ(run_cli("metrics --audit " + tmp.path.string()), 2);

  const fs::path audit = tmp.path / "audit";
  ASSERT_EQ(run_cli("run --suite " + suite + " --seeds 1 --threads 1 --audit " + audit.string() + out), 0);
  EXPECT_EQ(run_cli("metrics --audit " + audit.string()), 0);
  const fs::path metrics = audit / "flat-1_terp" / "metrics.json";
  json m = json::parse(read_text_file(metrics));
  m["ceg"] = m["ceg"].get<double>() + 1.0;
  write_text_file(metrics, m.dump(2));
  std::string table;
  EXPECT_EQ(run_cli("metrics --audit " + audit.string(), &table), 3);
  EXPECT_NE(table.find(",no\n"), std::string::npos);
}

TEST(Cli, ServeOverStdio) {
  TempDir tmp;
  const fs::path req = tmp.path / "req.jsonl";
  write_text_file(req, "{\"cmd\":\"reset\"}\n{\"cmd\":\"step\",\"action\":[0.5,0.1]}\n"
                       "{\"cmd\":\"close\"}\n");
  const std::string scenario =
      (fs::path(TERP_SOURCE_DIR) / "scenarios" / "flat.json").string();
  std::string out;
  ASSERT_EQ(run_cli("serve --scenario " + scenario + " < " + req.string(), &out), 0);
  std::istringstream lines(out);
  std::vector<json> replies;
  for (std::string l; std::getline(lines, l);) replies.push_back(json::parse(l));
  ASSERT_EQ(replies.size(), 3u);
  EXPECT_EQ(replies[0].at("obs").size(), 1625u);
  EXPECT_EQ(replies[1].at("obs").size(), 1625u);
  EXPECT_EQ(replies[2], json({{"ok", true}}));
}

}  // namespace
}  // namespace terp

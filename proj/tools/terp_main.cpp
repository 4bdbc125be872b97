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

// terp: run benchmark suites, serve the training environment, recompute
// metrics from audit dumps.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "terp/audit.hpp"
#include "terp/env_server.hpp"
#include "terp/errors.hpp"
#include "terp/render.hpp"
#include "terp/suite.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitCheck = 3;

int run_command(const std::string& suite_path, const std::string& planner_name,
                const std::string& seeds_text, const std::string& out,
                const std::string& render_dir, const std::string& audit_dir,
                const std::string& mask_dir, unsigned threads) {
  const terp::SuiteConfig cfg = terp::load_suite(suite_path);
  const terp::PlannerKind planner = terp::planner_kind(planner_name);
  const terp::SeedRange seeds = terp::parse_seeds(seeds_text);
  terp::RunOptions opts;
  opts.threads = threads;
  opts.keep_trajectories = !render_dir.empty();
  if (!audit_dir.empty()) opts.audit_dir = audit_dir;
  if (!mask_dir.empty()) {
    if (!std::filesystem::is_directory(mask_dir)) {
      throw terp::ConfigError("mask directory not found: " + mask_dir);
    }
    opts.mask_dir = mask_dir;
  }
  const std::vector<terp::EpisodeRow> rows = terp::run_suite(cfg, planner, seeds, opts);
  terp::write_text_file(out, terp::format_csv(cfg.name, rows));

  if (!render_dir.empty()) {
    std::filesystem::create_directories(render_dir);
    const std::size_t per_entry = seeds.count();
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const terp::Scenario sc = terp::suite_scenario(cfg, cfg.entries[k / per_entry], rows[k].seed);
      std::vector<terp::RenderTrack> tracks{{terp::to_string(planner), {}}};
      for (const terp::Pose& p : rows[k].trajectory) tracks[0].points.push_back(p.pos);
      terp::render_trajectory(sc.world, tracks, sc.start, sc.goal,
                              std::filesystem::path(render_dir) /
                                  (terp::episode_id(sc, planner) + ".svg"));
    }
  }

  const terp::SuiteSummary s = terp::summarize(rows);
  double max_ms = 0.0;
  for (const auto& r : rows) max_ms = std::max(max_ms, r.max_frame_ms);
  std::printf("%s %s: success %zu/%zu (%.1f%%), CEG median %.3f (successful %.3f), "
              "max frame %.2f ms\n",
              cfg.name.c_str(), terp::to_string(planner), s.successes, s.episodes,
              s.success_percent, s.ceg.median, s.ceg_success.median, max_ms);
  return 0;
}

int serve_command(const std::string& transport, const std::string& scenario_path) {
  const terp::EnvConfig cfg = terp::load_env_config(scenario_path);
  if (transport == "stdio") {
    terp::EnvSession session(cfg);
    terp::serve_stream(std::cin, std::cout, session);
    return 0;
  }
  if (transport.rfind("tcp:", 0) == 0) {
    const std::string port_text = transport.substr(4);
    if (port_text.empty() || port_text.find_first_not_of("0123456789") != std::string::npos) {
      throw terp::ConfigError("bad port in '" + transport + "'");
    }
    const int port = std::stoi(port_text);
    if (port > 65535) throw terp::ConfigError("port out of range");
    terp::serve_tcp(port, cfg, [](int p) {
      std::fprintf(stderr, "listening on 127.0.0.1:%d\n", p);
    });
    return 0;
  }
  throw terp::ConfigError("transport must be stdio or tcp:<port>");
}

int metrics_command(const std::string& audit_dir) {
  const auto dirs = terp::audit_episodes(audit_dir);
  if (dirs.empty()) throw terp::ConfigError("no episodes under " + audit_dir);
  bool all_match = true;
  std::printf("episode,success,ceg,norm_length,heading_dev,match\n");
  for (const auto& d : dirs) {
    const terp::AuditCheck c = terp::check_audit(d);
    all_match = all_match && c.match;
    std::printf("%s,%d,%.6f,%.6f,%.6f,%s\n", d.filename().string().c_str(),
                c.recomputed.success ? 1 : 0, c.recomputed.ceg, c.recomputed.norm_length,
                c.recomputed.heading_dev, c.match ? "yes" : "no");
  }
  return all_match ? 0 : kExitCheck;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Uneven-terrain navigation benchmark"};
  app.require_subcommand(1);

  std::string suite, planner = "terp", seeds = "1..30", out = "results.csv";
  std::string render_dir, audit_dir, mask_dir;
  unsigned threads = 0;
  CLI::App* run = app.add_subcommand("run", "Run a scenario suite with one planner");
  run->add_option("--suite", suite, "Suite JSON file")->required();
  run->add_option("--planner", planner, "terp, terp-noattn, dwa, ego or ego+")
      ->check(CLI::IsMember({"terp", "terp-noattn", "dwa", "ego", "ego+"}));
  run->add_option("--seeds", seeds, "Inclusive seed range a..b");
  run->add_option("--out", out, "CSV output path");
  run->add_option("--render", render_dir, "Directory for SVG renders");
  run->add_option("--audit", audit_dir, "Directory for per-frame audit dumps");
  run->add_option("--mask-dir", mask_dir, "Exported attention masks for the terp planner");
  run->add_option("--threads", threads, "Worker threads (0: all cores)");

  std::string transport = "stdio", scenario;
  CLI::App* serve = app.add_subcommand("serve", "Serve the training environment");
  serve->add_option("--transport", transport, "stdio or tcp:<port>");
  serve->add_option("--scenario", scenario, "Scenario or generator JSON")->required();

  std::string metrics_dir;
  CLI::App* metrics = app.add_subcommand("metrics", "Recompute metrics from an audit dump");
  metrics->add_option("--audit", metrics_dir, "Audit directory")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return run_command(suite, planner, seeds, out, render_dir, audit_dir, mask_dir, threads);
    if (*serve) return serve_command(transport, scenario);
    if (*metrics) return metrics_command(metrics_dir);
  } catch (const terp::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const terp::FormatError& e) {
    std::fprintf(stderr, "format error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

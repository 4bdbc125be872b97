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

// Scenario suites: configuration, parallel episode execution with a
// deterministic merge, aggregate statistics and CSV output.

#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "terp/audit.hpp"
#include "terp/episode.hpp"
#include "terp/errors.hpp"
#include "terp/grid_io.hpp"
#include "terp/metrics.hpp"
#include "terp/scenario.hpp"

namespace terp {

/// One suite entry: either a procedurally generated class (one world per seed)
/// or a fixed world shared by every seed.
struct SuiteEntry {
  std::optional<ScenarioClass> generate;
  Scenario fixed;
};

struct SuiteConfig {
  std::string name = "suite";
  Scenario defaults;  // numeric sections applied to generated worlds
  std::vector<SuiteEntry> entries;
};

struct SeedRange {
  std::uint64_t first = 1;
  std::uint64_t last = 1;
  std::size_t count() const { return static_cast<std::size_t>(last - first + 1); }
};

/// Parses `a..b` (inclusive) or a single seed.
inline SeedRange parse_seeds(const std::string& text) {
  auto number = [&](const std::string& s) -> std::uint64_t {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
      throw ConfigError("bad seed range '" + text + "'");
    }
    return std::stoull(s);
  };
  const auto dots = text.find("..");
  SeedRange r;
  if (dots == std::string::npos) {
    r.first = r.last = number(text);
  } else {
    r.first = number(text.substr(0, dots));
    r.last = number(text.substr(dots + 2));
  }
  if (r.last < r.first) throw ConfigError("empty seed range '" + text + "'");
  return r;
}

inline SuiteConfig suite_from(const json& j, const std::filesystem::path& base = {}) {
  if (!j.is_object()) throw ConfigError("suite must be a JSON object");
  SuiteConfig cfg;
  try {
    detail::read(j, "name", cfg.name);
    if (j.contains("sim")) cfg.defaults.sim = sim_from(j.at("sim"));
    if (j.contains("planner")) cfg.defaults.planner = planner_from(j.at("planner"));
    if (j.contains("tracker")) cfg.defaults.tracker = tracker_from(j.at("tracker"));
    if (j.contains("dwa")) cfg.defaults.dwa = dwa_from(j.at("dwa"));
    if (j.contains("ego")) cfg.defaults.ego = ego_from(j.at("ego"));
    if (!j.contains("scenarios") || !j.at("scenarios").is_array()) {
      throw ConfigError("suite needs a 'scenarios' array");
    }
    for (const json& e : j.at("scenarios")) {
      SuiteEntry entry;
      if (e.contains("generate")) {
        entry.generate = scenario_class(e.at("generate").get<std::string>());
      } else if (e.contains("file")) {
        entry.fixed = load_scenario(base / e.at("file").get<std::string>());
      } else {
        entry.fixed = scenario_from(e);
      }
      cfg.entries.push_back(std::move(entry));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("suite: ") + e.what());
  }
  if (cfg.entries.empty()) throw ConfigError("suite has no scenarios");
  cfg.defaults.sim.validate();
  cfg.defaults.planner.validate();
  return cfg;
}

inline SuiteConfig load_suite(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return suite_from(j, path.parent_path());
}

/// Materializes the scenario for one (entry, seed) pair.
inline Scenario suite_scenario(const SuiteConfig& cfg, const SuiteEntry& entry,
                               std::uint64_t seed) {
  if (entry.generate) return generate_scenario(*entry.generate, seed, cfg.defaults);
  Scenario s = entry.fixed;
  s.name = entry.fixed.name + "-" + std::to_string(seed);
  s.seed = seed;
  return s;
}

struct EpisodeRow {
  std::string scenario;
  std::string scenario_class;
  std::uint64_t seed = 0;
  PlannerKind planner = PlannerKind::terp;
  EpisodeMetrics metrics;
  int frames = 0;
  std::size_t steps = 0;
  double max_frame_ms = 0.0;  // timing; excluded from the CSV
  GuaranteeChecks checks;
  std::vector<Pose> trajectory;
};

struct RunOptions {
  unsigned threads = 0;  // 0: hardware concurrency
  bool keep_trajectories = false;
  std::optional<std::filesystem::path> mask_dir;
  std::optional<std::filesystem::path> audit_dir;
};

inline std::string episode_id(const Scenario& sc, PlannerKind k) {
  return sc.name + "_" + to_string(k);
}

/// Runs every (entry, seed) episode for one planner. Rows come back in
/// (entry, seed) order whatever the thread count.
inline std::vector<EpisodeRow> run_suite(const SuiteConfig& cfg, PlannerKind planner,
                                         SeedRange seeds, const RunOptions& opts = {}) {
  const std::size_t per_entry = seeds.count();
  const std::size_t total = cfg.entries.size() * per_entry;
  std::vector<EpisodeRow> rows(total);
  std::vector<std::string> errors(total);

  auto run_one = [&](std::size_t k) {
    const SuiteEntry& entry = cfg.entries[k / per_entry];
    const std::uint64_t seed = seeds.first + k % per_entry;
    EpisodeRow& row = rows[k];
    row.seed = seed;
    row.planner = planner;
    Scenario sc;
    try {
      sc = suite_scenario(cfg, entry, seed);
    } catch (const std::exception& e) {
      errors[k] = e.what();
      return;
    }
    row.scenario = sc.name;
    row.scenario_class = to_string(sc.world.cls);
    EpisodeOptions eo;
    eo.keep_frames = opts.audit_dir.has_value();
    if (opts.mask_dir && (planner == PlannerKind::terp)) {
      std::filesystem::path dir = *opts.mask_dir / episode_id(sc, planner);
      if (!std::filesystem::is_directory(dir)) dir = *opts.mask_dir;
      eo.mask = file_mask_source(dir);
    }
    const auto t0 = std::chrono::steady_clock::now();
    EpisodeResult r = run_episode(sc, planner, eo);
    row.metrics = episode_metrics(r, sc);
    row.metrics.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    row.frames = r.frame_count;
    row.steps = r.trajectory.size() - 1;
    for (double ms : r.frame_ms) row.max_frame_ms = std::max(row.max_frame_ms, ms);
    row.checks = r.checks;
    if (opts.keep_trajectories) row.trajectory = poses_of(r.trajectory);
    if (opts.audit_dir) {
      try {
        write_audit(*opts.audit_dir / episode_id(sc, planner), sc, r, row.metrics);
      } catch (const std::exception& e) {
        errors[k] = std::string("audit: ") + e.what();
      }
    }
  };

  unsigned workers = opts.threads ? opts.threads : std::thread::hardware_concurrency();
  workers = std::clamp<unsigned>(workers, 1u, static_cast<unsigned>(std::max<std::size_t>(total, 1)));
  if (workers == 1) {
    for (std::size_t k = 0; k < total; ++k) run_one(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < total; k = next++) run_one(k);
      });
    }
  }
  for (const std::string& e : errors) {
    if (!e.empty()) throw ConfigError(e);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Aggregation

struct Stat {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double median = std::numeric_limits<double>::quiet_NaN();
};

inline Stat stat_of(std::vector<double> v) {
  Stat s;
  if (v.empty()) return s;
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  s.median = v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
  return s;
}

struct SuiteSummary {
  std::size_t episodes = 0;
  std::size_t successes = 0;
  double success_percent = 0.0;
  // Over all episodes, then over successful episodes only.
  Stat ceg, norm_length, heading_dev;
  Stat ceg_success, norm_length_success, heading_dev_success;
};

inline SuiteSummary summarize(const std::vector<EpisodeRow>& rows) {
  SuiteSummary s;
  s.episodes = rows.size();
  std::vector<double> ceg, len, dev, ceg_ok, len_ok, dev_ok;
  for (const EpisodeRow& r : rows) {
    ceg.push_back(r.metrics.ceg);
    len.push_back(r.metrics.norm_length);
    dev.push_back(r.metrics.heading_dev);
    if (!r.metrics.success) continue;
    ++s.successes;
    ceg_ok.push_back(r.metrics.ceg);
    len_ok.push_back(r.metrics.norm_length);
    dev_ok.push_back(r.metrics.heading_dev);
  }
  s.success_percent =
      s.episodes ? 100.0 * static_cast<double>(s.successes) / static_cast<double>(s.episodes)
                 : 0.0;
  s.ceg = stat_of(ceg);
  s.norm_length = stat_of(len);
  s.heading_dev = stat_of(dev);
  s.ceg_success = stat_of(ceg_ok);
  s.norm_length_success = stat_of(len_ok);
  s.heading_dev_success = stat_of(dev_ok);
  return s;
}

namespace detail {

inline std::string fixed6(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

/// One row per episode, then a summary block. Timing never appears, so equal
/// inputs give equal bytes.
inline std::string format_csv(const std::string& suite, const std::vector<EpisodeRow>& rows) {
  using detail::fixed6;
  std::string out =
      "suite,scenario,class,seed,planner,success,failure_reason,ceg,norm_length,heading_dev,"
      "frames,steps,candidate_violations,blocked_pose_violations\n";
  for (const EpisodeRow& r : rows) {
    out += detail::csv_field(suite) + "," + detail::csv_field(r.scenario) + "," +
           r.scenario_class + "," + std::to_string(r.seed) + "," + to_string(r.planner) + "," +
           (r.metrics.success ? "1" : "0") + "," + detail::csv_field(r.metrics.failure_reason) +
           "," + fixed6(r.metrics.ceg) + "," + fixed6(r.metrics.norm_length) + "," +
           fixed6(r.metrics.heading_dev) + "," + std::to_string(r.frames) + "," +
           std::to_string(r.steps) + "," + std::to_string(r.checks.candidate_violations) + "," +
           std::to_string(r.checks.blocked_pose_violations) + "\n";
  }
  const SuiteSummary s = summarize(rows);
  out += "\n# summary\n";
  out += "episodes," + std::to_string(s.episodes) + "\n";
  out += "successes," + std::to_string(s.successes) + "\n";
  out += "success_rate," + std::to_string(s.successes) + "/" + std::to_string(s.episodes) + "\n";
  out += "success_percent," + fixed6(s.success_percent) + "\n";
  auto stat = [&](const char* name, const Stat& st) {
    out += std::string(name) + "_mean," + fixed6(st.mean) + "\n";
    out += std::string(name) + "_median," + fixed6(st.median) + "\n";
  };
  stat("ceg", s.ceg);
  stat("norm_length", s.norm_length);
  stat("heading_dev", s.heading_dev);
  stat("ceg_success", s.ceg_success);
  stat("norm_length_success", s.norm_length_success);
  stat("heading_dev_success", s.heading_dev_success);
  return out;
}

}  // namespace terp

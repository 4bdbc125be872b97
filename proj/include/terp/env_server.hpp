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

// Line-delimited JSON environment server for training the attention network:
// reset / step / close over stdio or a TCP socket, one client at a time.

#pragma once

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "terp/errors.hpp"
#include "terp/grid.hpp"
#include "terp/observation.hpp"
#include "terp/scenario.hpp"
#include "terp/terrain.hpp"

namespace terp {

/// What `reset` starts from: a fixed scenario, or a generated class whose
/// world is drawn from the seed given to reset (default `seed`).
struct EnvConfig {
  std::optional<ScenarioClass> generate;
  std::uint64_t seed = 1;
  Scenario scenario;  // the fixed world, or numeric defaults when generating
};

/// Accepts a scenario file, or `{"generate": "<class>", "seed": k, ...}` with
/// optional numeric sections.
inline EnvConfig env_config_from(const json& j) {
  EnvConfig c;
  if (j.is_object() && j.contains("generate")) {
    try {
      c.generate = scenario_class(j.at("generate").get<std::string>());
      detail::read(j, "seed", c.seed);
      if (j.contains("sim")) c.scenario.sim = sim_from(j.at("sim"));
      if (j.contains("planner")) c.scenario.planner = planner_from(j.at("planner"));
    } catch (const json::exception& e) {
      throw ConfigError(std::string("env config: ") + e.what());
    }
    return c;
  }
  c.scenario = scenario_from(j);
  return c;
}

inline EnvConfig load_env_config(const std::filesystem::path& path) {
  try {
    return env_config_from(json::parse(read_text_file(path)));
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

class EnvSession {
 public:
  explicit EnvSession(EnvConfig cfg) : cfg_(std::move(cfg)) {}

  bool closed() const { return closed_; }

  /// Handles one request line and returns the reply line (no newline).
  std::string handle(const std::string& line) {
    json req;
    try {
      req = json::parse(line);
    } catch (const json::parse_error& e) {
      return error("parse", e.what());
    }
    if (!req.is_object() || !req.contains("cmd") || !req.at("cmd").is_string()) {
      return error("protocol", "request needs a string 'cmd'");
    }
    const std::string cmd = req.at("cmd").get<std::string>();
    try {
      if (cmd == "reset") return reset(req);
      if (cmd == "step") return step(req);
      if (cmd == "close") {
        closed_ = true;
        return json{{"ok", true}}.dump();
      }
    } catch (const std::exception& e) {
      return error("simulation", e.what());
    }
    return error("protocol", "unknown cmd '" + cmd + "'");
  }

  const Scenario& scenario() const { return current_; }
  const RobotState& state() const { return state_; }

 private:
  static std::string error(const char* kind, const std::string& what) {
    return json{{"error", what}, {"kind", kind}}.dump();
  }

  struct Sensed {
    std::vector<double> obs;
    std::vector<double> heading;
  };

  Sensed sense() const {
    const ElevationGrid e = infill_missing(sense_elevation(current_.world, state_, current_.sim));
    const ElevationGrid normalized = normalize_elevation(e, current_.sim.clearance);
    const GradientField g = gradient_field(e);
    return {build_observation(state_, normalized, g.heading), g.heading};
  }

  std::string reset(const json& req) {
    if (cfg_.generate) {
      std::uint64_t seed = cfg_.seed;
      if (req.contains("seed")) {
        if (!req.at("seed").is_number_unsigned()) {
          return error("protocol", "seed must be a non-negative integer");
        }
        seed = req.at("seed").get<std::uint64_t>();
      }
      current_ = generate_scenario(*cfg_.generate, seed, cfg_.scenario);
    } else {
      current_ = cfg_.scenario;
    }
    state_ = current_.initial_state();
    const Sensed s = sense();
    last_ = s;
    active_ = true;
    done_ = false;
    return json{{"obs", s.obs},
                {"info", {{"scenario", current_.name}, {"n", current_.sim.n},
                          {"obs_size", s.obs.size()}}}}
        .dump();
  }

  std::string step(const json& req) {
    if (!active_) return error("protocol", "step before reset");
    if (done_) return error("protocol", "step after episode end; send reset");
    if (!req.contains("action") || !req.at("action").is_array() ||
        req.at("action").size() != 2) {
      return error("protocol", "action must be [v, omega]");
    }
    double a[2];
    for (int k = 0; k < 2; ++k) {
      const json& x = req.at("action")[k];
      if (!x.is_number()) return error("protocol", "action entries must be numbers");
      a[k] = x.get<double>();
      if (!std::isfinite(a[k]) || a[k] < -1.0 || a[k] > 1.0) {
        return error("protocol", "action entries must lie in [-1, 1]");
      }
    }
    const SimConfig& sim = current_.sim;
    state_ = step_kinematics(current_.world, state_, a[0] * sim.v_max, a[1] * sim.omega_max, sim);
    const EpisodeStatus status = episode_status(state_, nullptr, sim, &current_.world);
    if (current_.world.inside(state_.pos)) last_ = sense();
    const Reward r = compute_reward(state_, last_.heading, sim.reward);
    done_ = !status.running();
    const char* kind = status.running() ? "running" : status.success() ? "success" : "failure";
    return json{{"obs", last_.obs},
                {"reward", r.total},
                {"components",
                 {{"dist", r.dist}, {"head", r.head}, {"stable", r.stable}, {"grad", r.grad}}},
                {"done", done_},
                {"info", {{"status", kind}, {"reason", status.reason}, {"t", state_.t}}}}
        .dump();
  }

  EnvConfig cfg_;
  Scenario current_;
  RobotState state_;
  Sensed last_;
  bool active_ = false;
  bool done_ = false;
  bool closed_ = false;
};

/// Serves one session over a line stream until `close` or end of input.
inline void serve_stream(std::istream& in, std::ostream& out, EnvSession& session) {
  std::string line;
  while (!session.closed() && std::getline(in, line)) {
    if (line.empty()) continue;
    out << session.handle(line) << '\n' << std::flush;
  }
}

/// Listens on 127.0.0.1:`port` (0 picks a free port) and serves clients one
/// after another, each with a fresh session. `ready` receives the bound port.
/// Returns after `max_clients` clients when it is nonzero.
inline void serve_tcp(int port, const EnvConfig& cfg, const std::function<void(int)>& ready = {},
                      int max_clients = 0) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw SimulationError(std::string("socket: ") + std::strerror(errno));
  struct Closer {
    int fd;
    ~Closer() { ::close(fd); }
  } closer{fd};
  const int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(fd, 1) < 0) {
    throw ConfigError(std::string("cannot listen: ") + std::strerror(errno));
  }
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  if (ready) ready(ntohs(addr.sin_port));

  for (int served = 0; max_clients == 0 || served < max_clients; ++served) {
    const int client = ::accept(fd, nullptr, nullptr);
    if (client < 0) {
      if (errno == EINTR) continue;
      throw SimulationError(std::string("accept: ") + std::strerror(errno));
    }
    Closer client_closer{client};
    EnvSession session(cfg);
    std::string buffer;
    char chunk[4096];
    while (!session.closed()) {
      const ssize_t got = ::recv(client, chunk, sizeof chunk, 0);
      if (got <= 0) break;
      buffer.append(chunk, static_cast<std::size_t>(got));
      std::size_t nl;
      while (!session.closed() && (nl = buffer.find('\n')) != std::string::npos) {
        const std::string line = buffer.substr(0, nl);
        buffer.erase(0, nl + 1);
        if (line.empty()) continue;
        const std::string reply = session.handle(line) + "\n";
        for (std::size_t sent = 0; sent < reply.size();) {
          const ssize_t k = ::send(client, reply.data() + sent, reply.size() - sent, MSG_NOSIGNAL);
          if (k <= 0) break;
          sent += static_cast<std::size_t>(k);
        }
      }
    }
  }
}

}  // namespace terp

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

// Top-down SVG renders: shaded heightmap, trajectory polylines, start and goal
// markers and a legend. Output depends only on the inputs.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "terp/grid_io.hpp"
#include "terp/terrain.hpp"

namespace terp {

struct RenderTrack {
  std::string label;
  std::vector<Point2> points;
};

struct RenderOptions {
  double pixels_per_meter = 20.0;
  int max_shade_cells = 120;  // per side
};

namespace detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline constexpr const char* kTrackColors[] = {"#d62728", "#1f77b4", "#2ca02c", "#ff7f0e",
                                               "#9467bd", "#8c564b", "#e377c2", "#17becf"};

}  // namespace detail

inline std::string render_svg(const TerrainWorld& world, const std::vector<RenderTrack>& tracks,
                              Point2 start, Point2 goal, const RenderOptions& opt = {}) {
  using detail::num;
  const Extent& e = world.extent;
  const double s = opt.pixels_per_meter;
  const double w = (e.x_max - e.x_min) * s;
  const double h = (e.y_max - e.y_min) * s;
  auto px = [&](Point2 p) { return num((p.x - e.x_min) * s) + "," + num((e.y_max - p.y) * s); };

  const double span = std::max(e.x_max - e.x_min, e.y_max - e.y_min);
  const double cell = std::max(0.25, span / opt.max_shade_cells);
  const int nx = static_cast<int>(std::ceil((e.x_max - e.x_min) / cell));
  const int ny = static_cast<int>(std::ceil((e.y_max - e.y_min) / cell));
  std::vector<double> z(static_cast<std::size_t>(nx) * ny);
  for (int a = 0; a < nx; ++a) {
    for (int b = 0; b < ny; ++b) {
      const Point2 c{std::min(e.x_min + (a + 0.5) * cell, e.x_max),
                     std::min(e.y_min + (b + 0.5) * cell, e.y_max)};
      z[static_cast<std::size_t>(a) * ny + b] = world.z(c);
    }
  }
  const auto [lo, hi] = std::minmax_element(z.begin(), z.end());
  const double z_lo = *lo;
  const double z_span = *hi - *lo;

  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) +
                    "\" height=\"" + num(h) + "\" viewBox=\"0 0 " + num(w) + " " + num(h) +
                    "\">\n<g id=\"heightmap\" shape-rendering=\"crispEdges\">\n";
  for (int a = 0; a < nx; ++a) {
    for (int b = 0; b < ny; ++b) {
      const double v = z_span > 0 ? (z[static_cast<std::size_t>(a) * ny + b] - z_lo) / z_span : 0.0;
      const int g = static_cast<int>(std::lround(40 + 200 * v));
      char fill[8];
      std::snprintf(fill, sizeof fill, "#%02x%02x%02x", g, g, g);
      const double x0 = a * cell;
      const double y1 = std::min((b + 1) * cell, e.y_max - e.y_min);
      const double wx = std::min(cell, (e.x_max - e.x_min) - x0);
      const double wy = y1 - b * cell;
      out += "<rect x=\"" + num(x0 * s) + "\" y=\"" + num(h - y1 * s) + "\" width=\"" +
             num(wx * s) + "\" height=\"" + num(wy * s) + "\" fill=\"" + fill + "\"/>\n";
    }
  }
  out += "</g>\n";

  for (std::size_t k = 0; k < tracks.size(); ++k) {
    const char* color = detail::kTrackColors[k % std::size(detail::kTrackColors)];
    out += "<polyline class=\"track\" fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"2\" points=\"";
    for (std::size_t p = 0; p < tracks[k].points.size(); ++p) {
      if (p) out += ' ';
      out += px(tracks[k].points[p]);
    }
    out += "\"/>\n";
  }

  auto marker = [&](Point2 p, const char* color, const char* id) {
    const std::string xy = px(p);
    const auto comma = xy.find(',');
    out += "<circle id=\"" + std::string(id) + "\" cx=\"" + xy.substr(0, comma) + "\" cy=\"" +
           xy.substr(comma + 1) + "\" r=\"6\" fill=\"" + color +
           "\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
  };
  marker(start, "#ffffff", "start");
  marker(goal, "#ffd700", "goal");

  out += "<g id=\"legend\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out += "<rect x=\"4\" y=\"4\" width=\"170\" height=\"" +
         num(22.0 + 16.0 * static_cast<double>(tracks.size() + 1)) +
         "\" fill=\"#ffffff\" fill-opacity=\"0.8\"/>\n";
  out += "<text x=\"10\" y=\"20\">z " + num(z_lo) + " .. " + num(z_lo + z_span) +
         " m</text>\n";
  for (std::size_t k = 0; k < tracks.size(); ++k) {
    const double y = 36.0 + 16.0 * static_cast<double>(k);
    const char* color = detail::kTrackColors[k % std::size(detail::kTrackColors)];
    out += "<line x1=\"10\" y1=\"" + num(y - 4) + "\" x2=\"30\" y2=\"" + num(y - 4) +
           "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    out += "<text x=\"36\" y=\"" + num(y) + "\">" + detail::xml_escape(tracks[k].label) +
           "</text>\n";
  }
  out += "</g>\n</svg>\n";
  return out;
}

inline void render_trajectory(const TerrainWorld& world, const std::vector<RenderTrack>& tracks,
                              Point2 start, Point2 goal, const std::filesystem::path& path,
                              const RenderOptions& opt = {}) {
  write_text_file(path, render_svg(world, tracks, start, goal, opt));
}

}  // namespace terp

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

// Grid exchange format: optional `#` comment lines, a header line `n res`,
// then n rows of n values. Missing cells are written as `nan`, blocked
// cost-map cells as `inf`.

#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "terp/errors.hpp"
#include "terp/grid.hpp"

namespace terp {

struct GridFile {
  Grid<double> values;
  std::vector<std::string> comments;  // without the leading "# "
};

/// Shortest decimal text that round-trips to the same double.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw FormatError("cannot format number");
  return std::string(buf, end);
}

inline double parse_number(std::string_view tok) {
  double v = 0.0;
  auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || end != tok.data() + tok.size()) {
    throw FormatError("bad number '" + std::string(tok) + "'");
  }
  return v;
}

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t k = 0;
  while (k < line.size()) {
    while (k < line.size() && (line[k] == ' ' || line[k] == '\t' || line[k] == '\r')) ++k;
    const std::size_t start = k;
    while (k < line.size() && line[k] != ' ' && line[k] != '\t' && line[k] != '\r') ++k;
    if (k > start) out.push_back(line.substr(start, k - start));
  }
  return out;
}

}  // namespace detail

inline GridFile parse_grid(std::string_view text) {
  GridFile out;
  std::vector<std::string_view> lines;
  for (std::size_t pos = 0; pos < text.size();) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  std::size_t row = 0;
  while (row < lines.size() && !lines[row].empty() && lines[row][0] == '#') {
    std::string_view c = lines[row].substr(1);
    if (!c.empty() && c[0] == ' ') c.remove_prefix(1);
    out.comments.emplace_back(c);
    ++row;
  }
  if (row >= lines.size()) throw FormatError("missing header line");
  const auto header = detail::split_ws(lines[row++]);
  if (header.size() != 2) throw FormatError("header must be `n res`");
  int n = 0;
  {
    auto [end, ec] = std::from_chars(header[0].data(),
                                     header[0].data() + header[0].size(), n);
    if (ec != std::errc{} || end != header[0].data() + header[0].size()) {
      throw FormatError("bad grid size");
    }
  }
  const double res = parse_number(header[1]);
  if (n < 4 || n % 2 != 0 || !(res > 0.0)) {
    throw FormatError("invalid grid header");
  }
  out.values = Grid<double>(n, res, 0.0);
  const int h = n / 2;
  for (int r = 0; r < n; ++r, ++row) {
    if (row >= lines.size()) throw FormatError("too few rows");
    const auto toks = detail::split_ws(lines[row]);
    if (toks.size() != static_cast<std::size_t>(n)) {
      throw FormatError("row " + std::to_string(r) + " has " +
                        std::to_string(toks.size()) + " values, expected " +
                        std::to_string(n));
    }
    for (int c = 0; c < n; ++c) out.values(r - h, c - h) = parse_number(toks[c]);
  }
  for (; row < lines.size(); ++row) {
    if (!detail::split_ws(lines[row]).empty()) {
      throw FormatError("trailing data after grid");
    }
  }
  return out;
}

inline std::string format_grid(const Grid<double>& g,
                               const std::vector<std::string>& comments = {}) {
  std::string out;
  for (const auto& c : comments) out += "# " + c + "\n";
  out += std::to_string(g.n()) + " " + format_number(g.res()) + "\n";
  const int h = g.half();
  for (int i = -h; i < h; ++i) {
    for (int j = -h; j < h; ++j) {
      if (j > -h) out += ' ';
      out += format_number(g(i, j));
    }
    out += '\n';
  }
  return out;
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

inline GridFile read_grid_file(const std::filesystem::path& path) {
  return parse_grid(read_text_file(path));
}

inline void write_grid_file(const std::filesystem::path& path,
                            const Grid<double>& g,
                            const std::vector<std::string>& comments = {}) {
  write_text_file(path, format_grid(g, comments));
}

inline Grid<double> to_grid(const ElevationGrid& e) { return e.height; }

inline ElevationGrid elevation_from(const Grid<double>& g) {
  ElevationGrid e(g.n(), g.res());
  const int h = g.half();
  for (int i = -h; i < h; ++i) {
    for (int j = -h; j < h; ++j) {
      if (std::isnan(g(i, j))) {
        e.mark_missing(i, j);
      } else {
        e.set(i, j, g(i, j));
      }
    }
  }
  return e;
}

}  // namespace terp

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

// Robot-centric grids and the pure math shared by sensing, attention and
// planning.
//
// Indexing: a grid of side n stores cells (i, j) with i, j in [-n/2, n/2).
// The robot sits at (0, 0). +i points along the robot heading, +j to its
// left, so the robot-frame position of a cell is res * (i, j).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "terp/errors.hpp"

namespace terp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct CellIndex {
  int i = 0;
  int j = 0;
  friend bool operator==(const CellIndex&, const CellIndex&) = default;
  friend auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
inline double norm(Point2 p) { return std::hypot(p.x, p.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  a = std::fmod(a, kTwoPi);
  if (a <= -std::numbers::pi) a += kTwoPi;
  if (a > std::numbers::pi) a -= kTwoPi;
  return a;
}

/// Dense n x n grid addressed by centered indices.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int n, double res, T fill = T{}) : n_(n), res_(res) {
    if (n < 4 || n % 2 != 0) {
      throw PreconditionError("grid side must be even and >= 4, got " +
                              std::to_string(n));
    }
    if (!(res > 0.0)) throw PreconditionError("grid resolution must be > 0");
    cells_.assign(static_cast<std::size_t>(n) * n, fill);
  }

  int n() const { return n_; }
  int half() const { return n_ / 2; }
  double res() const { return res_; }
  std::size_t size() const { return cells_.size(); }

  bool contains(int i, int j) const {
    return i >= -half() && i < half() && j >= -half() && j < half();
  }
  bool contains(CellIndex c) const { return contains(c.i, c.j); }

  std::size_t offset(int i, int j) const {
    return static_cast<std::size_t>(i + half()) * n_ + (j + half());
  }
  CellIndex index_of(std::size_t offset) const {
    return {static_cast<int>(offset / n_) - half(),
            static_cast<int>(offset % n_) - half()};
  }

  T& operator()(int i, int j) { return cells_[offset(i, j)]; }
  const T& operator()(int i, int j) const { return cells_[offset(i, j)]; }
  T& operator()(CellIndex c) { return (*this)(c.i, c.j); }
  const T& operator()(CellIndex c) const { return (*this)(c.i, c.j); }

  T& at(int i, int j) {
    check(i, j);
    return (*this)(i, j);
  }
  const T& at(int i, int j) const {
    check(i, j);
    return (*this)(i, j);
  }

  std::span<T> cells() { return cells_; }
  std::span<const T> cells() const { return cells_; }

  bool same_shape(const auto& other) const {
    return n_ == other.n() && res_ == other.res();
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  void check(int i, int j) const {
    if (!contains(i, j)) {
      throw RangeError("cell (" + std::to_string(i) + ", " +
                       std::to_string(j) + ") outside grid of side " +
                       std::to_string(n_));
    }
  }

  int n_ = 0;
  double res_ = 0.0;
  std::vector<T> cells_;
};

/// Local height field in meters. Unsensed cells are flagged in `missing`.
struct ElevationGrid {
  Grid<double> height;
  Grid<std::uint8_t> missing;

  ElevationGrid() = default;
  ElevationGrid(int n, double res)
      : height(n, res, 0.0), missing(n, res, std::uint8_t{0}) {}

  int n() const { return height.n(); }
  double res() const { return height.res(); }
  bool is_missing(int i, int j) const { return missing(i, j) != 0; }
  bool any_missing() const {
    return std::ranges::any_of(missing.cells(),
                               [](std::uint8_t m) { return m != 0; });
  }
  void set(int i, int j, double h) {
    height(i, j) = h;
    missing(i, j) = 0;
  }
  void mark_missing(int i, int j) {
    height(i, j) = std::numeric_limits<double>::quiet_NaN();
    missing(i, j) = 1;
  }

  friend bool operator==(const ElevationGrid& a, const ElevationGrid& b) {
    if (!(a.missing == b.missing) || !a.height.same_shape(b.height)) {
      return false;
    }
    for (std::size_t k = 0; k < a.height.size(); ++k) {
      if (a.missing.cells()[k] == 0 &&
          a.height.cells()[k] != b.height.cells()[k]) {
        return false;
      }
    }
    return true;
  }
};

enum class MaskProvider { analytic, learned, uniform };

inline const char* to_string(MaskProvider p) {
  switch (p) {
    case MaskProvider::analytic: return "analytic";
    case MaskProvider::learned: return "learned";
    case MaskProvider::uniform: return "uniform";
  }
  return "analytic";
}

/// Per-cell attention weights in [0, 1].
struct AttentionMask {
  Grid<double> weight;
  MaskProvider provider = MaskProvider::analytic;

  int n() const { return weight.n(); }
  double res() const { return weight.res(); }
};

/// Non-negative traversal costs; kInf marks untraversable cells.
struct CostMap {
  Grid<double> cost;

  int n() const { return cost.n(); }
  double res() const { return cost.res(); }
  bool blocked(CellIndex c) const {
    return !cost.contains(c) || std::isinf(cost(c));
  }
};

/// Gradient magnitude per cell plus the heading gradient vector, ordered from
/// the far end of the forward column to the robot cell.
struct GradientField {
  Grid<double> magnitude;
  std::vector<double> heading;
};

// ---------------------------------------------------------------------------
// Index <-> robot-frame conversion

inline Point2 to_world(CellIndex c, double res, int n) {
  if (!(res > 0.0)) throw PreconditionError("res must be > 0");
  const int h = n / 2;
  if (c.i < -h || c.i >= h || c.j < -h || c.j >= h) {
    throw RangeError("cell outside grid");
  }
  return {res * c.i, res * c.j};
}

inline CellIndex to_index(Point2 p, double res, int n) {
  if (!(res > 0.0)) throw PreconditionError("res must be > 0");
  const double fi = std::round(p.x / res);
  const double fj = std::round(p.y / res);
  const int h = n / 2;
  if (!(fi >= -h && fi < h && fj >= -h && fj < h)) {
    throw RangeError("point outside grid");
  }
  return {static_cast<int>(fi), static_cast<int>(fj)};
}

/// Nearest cell to a robot-frame point; may lie outside any grid.
inline CellIndex nearest_cell(Point2 p, double res) {
  return {static_cast<int>(std::lround(p.x / res)),
          static_cast<int>(std::lround(p.y / res))};
}

// ---------------------------------------------------------------------------
// Elevation processing

inline std::pair<double, double> elevation_range(const ElevationGrid& e) {
  double lo = kInf;
  double hi = -kInf;
  for (std::size_t k = 0; k < e.height.size(); ++k) {
    if (e.missing.cells()[k]) continue;
    lo = std::min(lo, e.height.cells()[k]);
    hi = std::max(hi, e.height.cells()[k]);
  }
  return {lo, hi};
}

/// Shifts heights by the ground clearance and adds a 0.1 * (e_max - e_min)
/// penalty to every cell that still rises above it.
inline ElevationGrid normalize_elevation(const ElevationGrid& e,
                                         double clearance) {
  if (e.any_missing()) {
    throw PreconditionError("normalize_elevation needs an infilled grid");
  }
  if (!(clearance >= 0.0)) throw PreconditionError("clearance must be >= 0");
  const auto [e_min, e_max] = elevation_range(e);
  const double penalty = 0.1 * (e_max - e_min);
  ElevationGrid out = e;
  for (double& v : out.height.cells()) {
    const double shifted = v - clearance;
    v = shifted > 0.0 ? shifted + penalty : shifted;
  }
  return out;
}

/// Index into the forward column for entry k of the heading gradient vector.
inline int heading_row(int n, int k) { return n / 2 - 1 - k; }

/// Central-difference gradient magnitude (one-sided on the border), in m/m.
inline GradientField gradient_field(const ElevationGrid& e) {
  if (e.any_missing()) {
    throw PreconditionError("gradient_field needs an infilled grid");
  }
  const Grid<double>& z = e.height;
  const int h = z.half();
  const double res = z.res();
  auto partial = [&](int lo, int hi, int idx, auto at) {
    if (idx == lo) return (at(idx + 1) - at(idx)) / res;
    if (idx == hi) return (at(idx) - at(idx - 1)) / res;
    return (at(idx + 1) - at(idx - 1)) / (2.0 * res);
  };

  GradientField g{Grid<double>(z.n(), res, 0.0), {}};
  for (int i = -h; i < h; ++i) {
    for (int j = -h; j < h; ++j) {
      const double di = partial(-h, h - 1, i, [&](int r) { return z(r, j); });
      const double dj = partial(-h, h - 1, j, [&](int c) { return z(i, c); });
      g.magnitude(i, j) = std::hypot(di, dj);
    }
  }
  g.heading.resize(static_cast<std::size_t>(h));
  for (int k = 0; k < h; ++k) g.heading[k] = g.magnitude(heading_row(z.n(), k), 0);
  return g;
}

/// Fills each missing cell with its nearest sensed neighbour (Euclidean index
/// distance, ties to the smaller row, then the smaller column).
inline ElevationGrid infill_missing(const ElevationGrid& e) {
  const int n = e.n();
  const int h = n / 2;
  if (std::ranges::all_of(e.missing.cells(),
                          [](std::uint8_t m) { return m != 0; })) {
    throw SensingError("no sensed cell to infill from");
  }
  ElevationGrid out = e;
  for (int i = -h; i < h; ++i) {
    for (int j = -h; j < h; ++j) {
      if (!e.is_missing(i, j)) continue;
      long best_d2 = std::numeric_limits<long>::max();
      CellIndex best{};
      // Rings of growing Chebyshev radius; a ring at radius r holds no cell
      // closer than r, so stop once r^2 exceeds the best squared distance.
      for (int r = 1; r < n && static_cast<long>(r) * r <= best_d2; ++r) {
        for (int a = i - r; a <= i + r; ++a) {
          const bool edge_row = (a == i - r || a == i + r);
          const int step = edge_row ? 1 : 2 * r;
          for (int b = j - r; b <= j + r; b += step) {
            if (!e.missing.contains(a, b) || e.is_missing(a, b)) continue;
            const long d2 = static_cast<long>(a - i) * (a - i) +
                            static_cast<long>(b - j) * (b - j);
            const CellIndex cand{a, b};
            if (d2 < best_d2 || (d2 == best_d2 && cand < best)) {
              best_d2 = d2;
              best = cand;
            }
          }
        }
      }
      out.set(i, j, e.height(best));
    }
  }
  return out;
}

}  // namespace terp

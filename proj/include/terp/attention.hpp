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

// Attention mask providers: the analytic goal-cone mask, masks exported by a
// trained network (loaded from grid exchange files) and the uniform mask used
// for the no-attention ablation.

#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "terp/errors.hpp"
#include "terp/grid.hpp"
#include "terp/grid_io.hpp"

namespace terp {

struct AnalyticAttentionParams {
  double floor = 0.05;    // epsilon: weight far from the robot / off-cone
  double sharpness = 2.0; // exponent on the angular cosine
  bool sensed_range = true;  // take the G range over sensed cells only
};

/// A(i,j) = clamp(eps + dist_weight * angle_weight * G_hat, 0, 1), where G_hat
/// is the min-max normalized gradient magnitude, angle_weight is
/// max(0, cos(bearing - goal_bearing))^p and dist_weight falls linearly from
/// 1 at the robot to eps at the grid edge.
inline AttentionMask analytic_attention(const GradientField& gradient,
                                        double goal_bearing,
                                        const AnalyticAttentionParams& params = {},
                                        const Grid<std::uint8_t>* missing = nullptr) {
  const Grid<double>& g = gradient.magnitude;
  if (gradient.heading.size() != static_cast<std::size_t>(g.half())) {
    throw ContractError("gradient field heading vector has wrong length");
  }
  if (missing && !missing->same_shape(g)) {
    throw ContractError("missing-cell mask does not match the gradient grid");
  }
  double lo = kInf;
  double hi = -kInf;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (missing && missing->cells()[k]) continue;
    lo = std::min(lo, g.cells()[k]);
    hi = std::max(hi, g.cells()[k]);
  }
  const double span = hi - lo;
  const double eps = params.floor;
  const double edge = g.res() * g.half();

  AttentionMask mask{Grid<double>(g.n(), g.res(), eps), MaskProvider::analytic};
  if (!(span > 0.0)) return mask;

  const int h = g.half();
  for (int i = -h; i < h; ++i) {
    for (int j = -h; j < h; ++j) {
      const double g_hat = std::clamp((g(i, j) - lo) / span, 0.0, 1.0);
      const double d = g.res() * std::hypot(i, j);
      const double dist_w = std::max(eps, 1.0 - (1.0 - eps) * d / edge);
      double ang_w = 1.0;
      if (i != 0 || j != 0) {
        const double c = std::cos(std::atan2(j, i) - goal_bearing);
        ang_w = std::pow(std::max(0.0, c), params.sharpness);
      }
      mask.weight(i, j) = std::clamp(eps + dist_w * ang_w * g_hat, 0.0, 1.0);
    }
  }
  return mask;
}

inline AttentionMask uniform_mask(int n, double res) {
  if (n < 4) throw PreconditionError("mask side must be >= 4");
  return {Grid<double>(n, res, 1.0), MaskProvider::uniform};
}

struct LoadedMask {
  AttentionMask mask;
  std::vector<std::string> warnings;
};

inline std::optional<MaskProvider> parse_provider(const std::string& s) {
  if (s == "analytic") return MaskProvider::analytic;
  if (s == "learned") return MaskProvider::learned;
  if (s == "uniform") return MaskProvider::uniform;
  return std::nullopt;
}

/// Parses a mask in grid exchange format. Values outside [0, 1] are clamped
/// with a warning; a `# provider: ...` comment sets the provenance (learned
/// when absent).
inline LoadedMask parse_mask(std::string_view text, std::optional<int> expected_n = {}) {
  GridFile file = parse_grid(text);
  if (expected_n && file.values.n() != *expected_n) {
    throw FormatError("mask size " + std::to_string(file.values.n()) +
                      " does not match grid size " + std::to_string(*expected_n));
  }
  LoadedMask out{{std::move(file.values), MaskProvider::learned}, {}};
  for (const auto& c : file.comments) {
    constexpr std::string_view kKey = "provider:";
    if (c.rfind(kKey, 0) != 0) continue;
    std::string value = c.substr(kKey.size());
    value.erase(0, value.find_first_not_of(' '));
    value.erase(value.find_last_not_of(" \r") + 1);
    auto p = parse_provider(value);
    if (!p) throw FormatError("unknown mask provider '" + value + "'");
    out.mask.provider = *p;
  }
  std::size_t clamped = 0;
  for (double& v : out.mask.weight.cells()) {
    if (!std::isfinite(v)) throw FormatError("non-finite mask entry");
    if (v < 0.0 || v > 1.0) {
      v = std::clamp(v, 0.0, 1.0);
      ++clamped;
    }
  }
  if (clamped > 0) {
    out.warnings.push_back("clamped " + std::to_string(clamped) +
                           " mask value(s) into [0, 1]");
  }
  return out;
}

inline LoadedMask load_mask(const std::filesystem::path& path,
                            std::optional<int> expected_n = {}) {
  return parse_mask(read_text_file(path), expected_n);
}

inline std::string format_mask(const AttentionMask& mask) {
  return format_grid(mask.weight, {std::string("provider: ") + to_string(mask.provider)});
}

inline void save_mask(const std::filesystem::path& path, const AttentionMask& mask) {
  write_text_file(path, format_mask(mask));
}

}  // namespace terp

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

#pragma once

#include <stdexcept>
#include <string>

namespace terp {

// Index or point that falls outside the robot-centric grid.
struct RangeError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

struct PreconditionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Caller violated an interface contract (size mismatch, velocity limit, ...).
struct ContractError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct SensingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SimulationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed grid exchange file or mask.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Every cell inside the exploration circle is untraversable.
struct DegenerateRegion : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// No finite waypoint candidate after all arc expansions.
struct PlannerStuck : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace terp

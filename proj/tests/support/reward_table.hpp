// Copyright 2026 The cosched Authors.
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


// Hand-derived shepherd rewards. Inputs are chosen so every intermediate
// value is a dyadic rational, which makes exact comparison meaningful.
// Limits are server1's 36 cores, 20 ways and 10 bandwidth units.

#pragma once

#include <array>
#include <vector>

namespace cosched::testing {

struct RewardCase {
  bool predicted_met;
  std::vector<double> latency_ms;
  std::vector<double> target_ms;
  std::array<double, 3> usage;
  double expected;
};

inline constexpr std::array<double, 3> kRewardLimits = {36.0, 20.0, 10.0};

inline const std::vector<RewardCase>& reward_table() {
  static const std::vector<RewardCase> table = {
      // All targets met: 2 + mean over resources of (1 - usage / limit).
      {true, {20}, {40}, {0, 0, 0}, 3.0},
      {false, {20}, {40}, {0, 0, 0}, 3.0},
      {true, {40}, {40}, {36, 20, 10}, 2.0},
      {true, {10, 30}, {40, 30}, {18, 10, 5}, 2.5},
      {true, {5, 5, 5}, {10, 10, 10}, {9, 5, 2.5}, 2.75},
      {true, {1}, {2}, {27, 15, 7.5}, 2.25},
      {false, {1, 1}, {2, 2}, {9, 10, 7.5}, 2.5},
      {true, {3}, {3}, {36, 10, 0}, 2.5},
      {true, {8}, {9}, {72, 40, 20}, 2.0},  // usage above the limit clamps
      {true, {0}, {5}, {18, 5, 0}, 2.75},
      {true, {12, 12, 12, 12}, {12, 12, 12, 12}, {27, 5, 5}, 2.5},
      // Some target missed: indicator + mean min(1, target / latency).
      {true, {80}, {40}, {0, 0, 0}, 1.5},
      {false, {80}, {40}, {0, 0, 0}, 0.5},
      {true, {80, 20}, {40, 40}, {18, 10, 5}, 1.75},
      {false, {80, 20}, {40, 40}, {18, 10, 5}, 0.75},
      {false, {160, 40, 40, 40}, {40, 40, 40, 40}, {1, 1, 1}, 0.8125},
      {true, {160, 80, 40}, {40, 40, 30}, {1, 1, 1}, 1.5},
      {false, {160, 80, 40}, {40, 40, 30}, {1, 1, 1}, 0.5},
      {false, {80, 80, 80}, {40, 40, 40}, {36, 20, 10}, 0.5},
      {true, {41}, {41 - 1}, {0, 0, 0}, 1.0 + 40.0 / 41.0},
      {false, {4000}, {1000}, {5, 5, 5}, 0.25},
      {false, {30, 64}, {32, 32}, {0, 0, 0}, 0.75},
      {true, {10, 10.5}, {10, 10}, {0, 0, 0}, 1.0 + (1.0 + 10.0 / 10.5) / 2.0},
      {false, {100, 100}, {25, 50}, {0, 0, 0}, 0.375},
  };
  return table;
}

}  // namespace cosched::testing

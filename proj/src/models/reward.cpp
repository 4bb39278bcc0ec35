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


#include <algorithm>

#include "cosched/error.hpp"
#include "cosched/models.hpp"

namespace cosched {
namespace {

void check_lengths(std::span<const double> latencies, std::span<const double> targets) {
  if (latencies.empty() || latencies.size() != targets.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "reward needs one target per latency and at least one service");
  }
}

}  // namespace

double reward_qos(bool predicted_met, std::span<const double> latencies_ms,
                  std::span<const double> targets_ms) {
  check_lengths(latencies_ms, targets_ms);
  double sum = 0.0;
  for (std::size_t i = 0; i < latencies_ms.size(); ++i) {
    const double l = latencies_ms[i];
    sum += l <= 0.0 ? 1.0 : std::min(1.0, targets_ms[i] / l);
  }
  return (predicted_met ? 1.0 : 0.0) + sum / static_cast<double>(latencies_ms.size());
}

double reward_resource(const std::array<double, kResourceKinds>& lc_usage,
                       const std::array<double, kResourceKinds>& limits) {
  double sum = 0.0;
  for (int k = 0; k < kResourceKinds; ++k) {
    if (!(limits[k] > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "resource limits must be positive");
    }
    sum += 1.0 - std::clamp(lc_usage[k] / limits[k], 0.0, 1.0);
  }
  return sum / kResourceKinds;
}

double compute_reward(bool predicted_met, std::span<const double> latencies_ms,
                      std::span<const double> targets_ms,
                      const std::array<double, kResourceKinds>& lc_usage,
                      const std::array<double, kResourceKinds>& limits) {
  check_lengths(latencies_ms, targets_ms);
  bool all_met = true;
  for (std::size_t i = 0; i < latencies_ms.size(); ++i) {
    if (latencies_ms[i] > targets_ms[i]) all_met = false;
  }
  if (all_met) return 2.0 + reward_resource(lc_usage, limits);
  return reward_qos(predicted_met, latencies_ms, targets_ms);
}

}  // namespace cosched

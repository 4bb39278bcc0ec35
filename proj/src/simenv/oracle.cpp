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
#include <cmath>
#include <vector>

#include "cosched/error.hpp"
#include "cosched/simenv.hpp"

namespace cosched {
namespace {

// Latency table over cores 1..C and ways 1..W at full bandwidth.
class LatencyGrid {
 public:
  LatencyGrid(const LatencySurface& surface, const ServerSpec& server, double load)
      : cores_(server.n_cores), ways_(server.n_llc_ways),
        values_(static_cast<std::size_t>(cores_ * ways_)) {
    for (int c = 1; c <= cores_; ++c) {
      for (int w = 1; w <= ways_; ++w) {
        values_[index(c, w)] = surface.latency_ms(
            server, {double(c), double(w), double(server.mem_bw_units)}, load);
      }
    }
  }
  double at(int c, int w) const { return values_[index(c, w)]; }

 private:
  std::size_t index(int c, int w) const {
    return static_cast<std::size_t>((c - 1) * ways_ + (w - 1));
  }
  int cores_;
  int ways_;
  std::vector<double> values_;
};

}  // namespace

OaaResult oracle_oaa_rcliff(const LatencySurface& surface, const ServerSpec& server,
                            double load, double qos_target_ms) {
  server.validate();
  if (!(load > 0.0 && load <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "oracle load must be in (0,1]");
  }
  const LatencyGrid grid(surface, server, load);
  auto ok = [&](int c, int w) { return grid.at(c, w) <= qos_target_ms; };

  // Pareto-minimal satisfying cells, scored by normalized resource cost.
  OaaResult best;
  double best_cost = 0.0;
  for (int w = 1; w <= server.n_llc_ways; ++w) {
    for (int c = 1; c <= server.n_cores; ++c) {
      if (!ok(c, w)) continue;
      const bool minimal = (c == 1 || !ok(c - 1, w)) && (w == 1 || !ok(c, w - 1));
      if (!minimal) break;
      const double cost = double(c) / server.n_cores + double(w) / server.n_llc_ways;
      const bool better =
          !best.feasible || cost < best_cost ||
          (cost == best_cost && (c < best.oaa_cores ||
                                 (c == best.oaa_cores && w < best.oaa_ways)));
      if (better) {
        best.feasible = true;
        best.oaa_cores = c;
        best.oaa_ways = w;
        best_cost = cost;
      }
      break;
    }
  }
  if (!best.feasible) return best;

  const int c = best.oaa_cores, w = best.oaa_ways;
  const double here = grid.at(c, w);
  best.rcliff_cores = c;
  best.rcliff_ways = w;
  if (c > 1) {
    best.rcliff_cores = c - 1;
    best.cliff_ratio = grid.at(c - 1, w) / here;
  }
  if (w > 1) {
    const double ratio = grid.at(c, w - 1) / here;
    if (c == 1 || ratio >= best.cliff_ratio) {
      best.rcliff_cores = c;
      best.rcliff_ways = w - 1;
      best.cliff_ratio = ratio;
    }
  }

  best.oaa_bw_units = server.mem_bw_units;
  for (int b = 1; b <= server.mem_bw_units; ++b) {
    if (surface.latency_ms(server, {double(c), double(w), double(b)}, load) <=
        qos_target_ms) {
      best.oaa_bw_units = b;
      break;
    }
  }
  return best;
}

double max_adjacent_latency_ratio(const LatencySurface& surface,
                                  const ServerSpec& server, double load) {
  const LatencyGrid grid(surface, server, load);
  double worst = 1.0;
  for (int c = 1; c <= server.n_cores; ++c) {
    for (int w = 1; w <= server.n_llc_ways; ++w) {
      const double here = grid.at(c, w);
      if (c > 1) worst = std::max(worst, grid.at(c - 1, w) / here);
      if (w > 1) worst = std::max(worst, grid.at(c, w - 1) / here);
    }
  }
  return worst;
}

}  // namespace cosched

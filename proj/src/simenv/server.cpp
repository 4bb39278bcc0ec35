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


#include <cmath>
#include <numeric>

#include "cosched/error.hpp"
#include "cosched/simenv.hpp"

namespace cosched {

void ServerSpec::validate() const {
  if (n_cores < 1 || n_llc_ways < 1) {
    throw Error(ErrorCode::kConfig,
                "server " + platform_id + ": needs at least one core and one way");
  }
  if (mem_bw_units != kBandwidthUnits) {
    throw Error(ErrorCode::kConfig, "server " + platform_id +
                                        ": mem_bw_units must be 10");
  }
  if (!(way_mb > 0.0) || !(freq_ghz > 0.0) || !(mem_bw_gbps > 0.0)) {
    throw Error(ErrorCode::kConfig,
                "server " + platform_id + ": way size, frequency and bandwidth must be positive");
  }
}

ServerSpec ServerSpec::preset(std::string_view platform_id) {
  if (platform_id == "server1") {
    return {"server1", 36, 20, kBandwidthUnits, 2.25, 2.3, 76.8};
  }
  if (platform_id == "server2") {
    return {"server2", 64, 12, kBandwidthUnits, 4.0, 2.0, 94.0};
  }
  if (platform_id == "server3") {
    return {"server3", 48, 11, kBandwidthUnits, 3.25, 2.2, 102.4};
  }
  throw Error(ErrorCode::kConfig,
              "unknown platform '" + std::string(platform_id) + "'");
}

std::vector<std::string> ServerSpec::preset_ids() {
  return {"server1", "server2", "server3"};
}

Grant& Grant::operator+=(const Grant& o) {
  cores += o.cores;
  ways += o.ways;
  bw_units += o.bw_units;
  return *this;
}

Grant& Grant::operator-=(const Grant& o) {
  cores -= o.cores;
  ways -= o.ways;
  bw_units -= o.bw_units;
  return *this;
}

Grant full_grant(const ServerSpec& server) {
  return {server.n_cores, server.n_llc_ways, server.mem_bw_units};
}

}  // namespace cosched

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

#include <random>

#include "cosched/error.hpp"
#include "cosched/harness.hpp"

namespace cosched {
namespace {

constexpr int kMaxDraws = 20000;

ServiceSpec lc_service(std::string id, std::mt19937_64& rng, double load, double shrink) {
  SurfaceParams p = SurfaceFamily::sample(rng);
  p.noise_seed = rng();
  p.working_set_mb *= shrink;
  p.bw_demand *= shrink;
  ServiceSpec s;
  s.id = std::move(id);
  s.surface = LatencySurface(p);
  s.load_schedule = {{0.0, load}};
  return s;
}

ServiceSpec be_service() {
  ServiceSpec s;
  s.id = "be0";
  s.kind = ServiceKind::kBestEffort;
  s.be = be_preset("default");
  s.load_schedule = {{0.0, 1.0}};
  return s;
}

// True when even the rounded-up equal share of the server leaves at least
// one LC service violating QoS.
bool equal_split_fails(const Scenario& s) {
  int n = 0;
  for (const auto& svc : s.services) n += svc.is_lc();
  const ServerSpec& server = s.server;
  auto ceil_div = [n](int total) { return double((total + n - 1) / n); };
  const EffectiveGrant share{ceil_div(server.n_cores), ceil_div(server.n_llc_ways),
                             ceil_div(server.mem_bw_units)};
  for (const auto& svc : s.services) {
    if (!svc.is_lc()) continue;
    if (svc.surface.latency_ms(server, share, svc.load_at(0.0)) > svc.qos_target_ms()) {
      return true;
    }
  }
  return false;
}

// Draws LC sets until the oracle allocations fit next to `be`.
Scenario feasible_draw(const ServerSpec& server, int n_lc, bool with_be, double max_load,
                       std::mt19937_64& rng, std::string name, std::uint64_t seed,
                       bool contended = false) {
  // Larger co-locations get smaller working sets and bandwidth demand so
  // that feasible draws stay common.
  const double shrink = n_lc > 3 ? 3.0 / n_lc : 1.0;
  std::uniform_real_distribution<double> load(0.15, max_load);
  for (int attempt = 0; attempt < kMaxDraws; ++attempt) {
    Scenario s;
    s.name = name;
    s.server = server;
    s.seed = seed;
    for (int i = 0; i < n_lc; ++i) {
      s.services.push_back(lc_service("lc" + std::to_string(i), rng, load(rng), shrink));
    }
    if (with_be) s.services.push_back(be_service());
    if (contended && !equal_split_fails(s)) continue;
    if (oaa_fits(s)) {
      s.validate();
      return s;
    }
  }
  throw Error(ErrorCode::kInfeasible, "no feasible draw for " + name);
}

}  // namespace

std::vector<Scenario> three_lc_suite(const ServerSpec& server, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Scenario> out;
  for (int i = 0; i < count; ++i) {
    out.push_back(feasible_draw(server, 3, false, 0.6, rng, "three-lc-" + std::to_string(i),
                                seed * 1000 + i, true));
  }
  return out;
}

std::vector<Scenario> be_suite(const ServerSpec& server, int min_lc, int max_lc, int per_level,
                               std::uint64_t seed) {
  if (min_lc < 1 || max_lc < min_lc || per_level < 1) {
    throw Error(ErrorCode::kConfig, "bad BE suite shape");
  }
  std::mt19937_64 rng(seed);
  std::vector<Scenario> out;
  for (int n = min_lc; n <= max_lc; ++n) {
    for (int i = 0; i < per_level; ++i) {
      out.push_back(feasible_draw(server, n, true, 0.5,
                                  rng, "be-" + std::to_string(n) + "lc-" + std::to_string(i),
                                  seed * 1000 + n * 100 + i));
    }
  }
  return out;
}

Scenario churn_scenario(const ServerSpec& server, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < kMaxDraws; ++attempt) {
    Scenario s = feasible_draw(server, 3, false, 0.35, rng, "churn", seed);
    auto& stepped = s.services[0];
    stepped.load_schedule.push_back({60000.0, std::min(1.0, stepped.load_schedule[0].load * 2.0)});
    ServiceSpec late = lc_service("lc3", rng, 0.3, 1.0);
    late.arrival_ms = 120000.0;
    s.services.push_back(std::move(late));
    if (oaa_fits(s)) {
      s.validate();
      return s;
    }
  }
  throw Error(ErrorCode::kInfeasible, "no feasible churn scenario");
}

}  // namespace cosched

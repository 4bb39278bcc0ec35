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

#include "cosched/error.hpp"
#include "cosched/simenv.hpp"

namespace cosched {
namespace {

constexpr double kMinHeadroom = 1e-3;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double core_speedup(double cores, double scale) {
  return scale * (1.0 - std::exp(-cores / scale));
}

bool in_range(double v, double lo, double hi) { return v >= lo && v <= hi; }

}  // namespace

void SurfaceParams::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(base_latency_ms) || !(qos_target_ms > base_latency_ms)) {
    throw Error(ErrorCode::kConfig,
                "surface: need 0 < base_latency_ms < qos_target_ms");
  }
  if (!positive(peak_utilization) || peak_utilization >= 1.0) {
    throw Error(ErrorCode::kConfig, "surface: peak_utilization must be in (0,1)");
  }
  if (!positive(core_scale) || !positive(working_set_mb) ||
      !positive(cliff_sharpness) || !positive(bw_demand) ||
      !positive(bw_sensitivity) || !positive(ipc_peak) || !positive(miss_scale)) {
    throw Error(ErrorCode::kConfig, "surface: scale parameters must be positive");
  }
  if (!in_range(cache_floor, 0.0, 1.0) || cache_floor == 0.0 ||
      !in_range(miss_bw_penalty, 0.0, 10.0)) {
    throw Error(ErrorCode::kConfig, "surface: floor or penalty out of range");
  }
}

SurfaceParams SurfaceFamily::sample(std::mt19937_64& rng) {
  auto u = [&rng](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  SurfaceParams p;
  p.base_latency_ms = u(kBaseLatencyMin, kBaseLatencyMax);
  p.qos_target_ms = kQosFactor * p.base_latency_ms;
  p.peak_utilization = u(kPeakUtilMin, kPeakUtilMax);
  p.core_scale = u(kCoreScaleMin, kCoreScaleMax);
  p.working_set_mb = u(kWorkingSetMin, kWorkingSetMax);
  p.cliff_sharpness = u(kSharpnessMin, kSharpnessMax);
  p.cache_floor = u(kCacheFloorMin, kCacheFloorMax);
  p.bw_demand = u(kBwDemandMin, kBwDemandMax);
  p.miss_bw_penalty = u(kMissPenaltyMin, kMissPenaltyMax);
  p.bw_sensitivity = u(kBwSensMin, kBwSensMax);
  p.ipc_peak = u(kIpcPeakMin, kIpcPeakMax);
  p.miss_scale = u(kMissScaleMin, kMissScaleMax);
  p.noise_seed = rng();
  return p;
}

LatencySurface::LatencySurface(SurfaceParams params) : params_(params) {
  params_.validate();
}

double LatencySurface::cache_hit_fraction(double cache_mb) const {
  return sigmoid(params_.cliff_sharpness * (cache_mb - params_.working_set_mb));
}

double LatencySurface::bw_demand_units(double load, double cache_mb) const {
  const double miss = 1.0 - cache_hit_fraction(cache_mb);
  return load * params_.bw_demand * (1.0 + params_.miss_bw_penalty * miss);
}

double LatencySurface::relative_capacity(const ServerSpec& server,
                                         const EffectiveGrant& g,
                                         double load) const {
  if (g.cores <= 0.0) return 0.0;
  const auto& p = params_;
  const double f = core_speedup(g.cores, p.core_scale) /
                   core_speedup(server.n_cores, p.core_scale);
  const double mb = g.ways * server.way_mb;
  const double h_full =
      p.cache_floor + (1.0 - p.cache_floor) * cache_hit_fraction(server.llc_mb());
  const double h = (p.cache_floor + (1.0 - p.cache_floor) * cache_hit_fraction(mb)) /
                   h_full;
  const double demand = bw_demand_units(load, mb);
  double b = 1.0;
  if (demand > 0.0) {
    b = std::pow(std::min(1.0, std::max(0.0, g.bw_units) / demand),
                 p.bw_sensitivity);
  }
  return f * h * b;
}

double LatencySurface::service_capacity(const ServerSpec& server,
                                        const EffectiveGrant& g,
                                        double load) const {
  return relative_capacity(server, g, load) / params_.peak_utilization;
}

double LatencySurface::latency_ms(const ServerSpec& server,
                                  const EffectiveGrant& g, double load,
                                  double queue_len) const {
  const double capacity = service_capacity(server, g, load);
  if (g.cores <= 0.0 || capacity <= 0.0) return kUnservedLatencyMs;
  const double rho = load / capacity;
  const double queue_ms = 1000.0 * queue_len / capacity;
  return params_.base_latency_ms / std::max(kMinHeadroom, 1.0 - rho) + queue_ms;
}

LatencySurface LatencySurface::moses() {
  SurfaceParams p;
  p.base_latency_ms = 10.0;
  p.qos_target_ms = 40.0;
  p.peak_utilization = 0.75;
  p.core_scale = 5.883954814531463;
  p.working_set_mb = 19.936973015272542;
  p.cliff_sharpness = 2.0;
  p.cache_floor = 0.15;
  p.bw_demand = 3.0;
  p.miss_bw_penalty = 1.0;
  p.bw_sensitivity = 1.0;
  p.ipc_peak = 1.6;
  p.miss_scale = 35.0;
  p.noise_seed = 0x6d6f736573ULL;
  return LatencySurface(p);
}

void BeParams::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(core_scale) || !positive(cache_scale_mb) || !positive(bw_scale) ||
      !positive(ipc_peak) || !positive(miss_scale) || !positive(bw_gbps_at_full) ||
      !in_range(cache_floor, 0.0, 1.0) || !in_range(bw_floor, 0.0, 1.0)) {
    throw Error(ErrorCode::kConfig, "best-effort parameters out of range");
  }
}

double be_throughput(const BeParams& be, const ServerSpec& server,
                     const EffectiveGrant& g) {
  if (g.cores <= 0.0) return 0.0;
  auto sat = [](double x, double scale) { return 1.0 - std::exp(-x / scale); };
  const double c = sat(g.cores, be.core_scale) / sat(server.n_cores, be.core_scale);
  auto cache = [&](double mb) {
    return be.cache_floor + (1.0 - be.cache_floor) * sat(mb, be.cache_scale_mb);
  };
  auto bw = [&](double units) {
    return be.bw_floor + (1.0 - be.bw_floor) * sat(units, be.bw_scale);
  };
  const double w = cache(g.ways * server.way_mb) / cache(server.llc_mb());
  const double b = bw(g.bw_units) / bw(server.mem_bw_units);
  return c * w * b;
}

double ServiceSpec::load_at(double t_ms) const {
  double load = 0.0;
  for (const auto& s : load_schedule) {
    if (s.t_ms <= t_ms) load = s.load;
  }
  return load;
}

void ServiceSpec::validate() const {
  if (id.empty()) throw Error(ErrorCode::kConfig, "service id must not be empty");
  if (is_lc()) {
    surface.params().validate();
    if (load_schedule.empty()) {
      throw Error(ErrorCode::kConfig, "service " + id + ": empty load schedule");
    }
    for (std::size_t i = 0; i < load_schedule.size(); ++i) {
      const auto& s = load_schedule[i];
      if (!(s.load > 0.0 && s.load <= 1.0)) {
        throw Error(ErrorCode::kConfig,
                    "service " + id + ": load must be in (0,1]");
      }
      if (i > 0 && s.t_ms <= load_schedule[i - 1].t_ms) {
        throw Error(ErrorCode::kConfig,
                    "service " + id + ": load steps must be increasing in time");
      }
    }
  } else {
    be.validate();
  }
  if (!(arrival_ms >= 0.0)) {
    throw Error(ErrorCode::kConfig, "service " + id + ": negative arrival time");
  }
}

double simulate_latency(const ServiceSpec& service, const ServerSpec& server,
                        const EffectiveGrant& g, double load, double queue_len) {
  if (!service.is_lc()) {
    throw Error(ErrorCode::kInvalidArgument,
                "latency is only defined for latency-critical services");
  }
  return service.surface.latency_ms(server, g, load, queue_len);
}

}  // namespace cosched

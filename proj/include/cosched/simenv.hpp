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

// Deterministic discrete-time model of one co-location server. Latency-
// critical (LC) services see a parametric latency surface over cores, LLC
// ways and memory-bandwidth units; best-effort (BE) services see a concave
// throughput function. All time is simulated milliseconds.

#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace cosched {

inline constexpr int kBandwidthUnits = 10;
inline constexpr double kUnservedLatencyMs = std::numeric_limits<double>::max();

struct ServerSpec {
  std::string platform_id;
  int n_cores = 0;
  int n_llc_ways = 0;
  int mem_bw_units = kBandwidthUnits;
  double way_mb = 0.0;
  double freq_ghz = 0.0;
  double mem_bw_gbps = 0.0;

  double llc_mb() const { return way_mb * n_llc_ways; }
  void validate() const;

  // "server1", "server2" or "server3".
  static ServerSpec preset(std::string_view platform_id);
  static std::vector<std::string> preset_ids();
};

struct Grant {
  int cores = 0;
  int ways = 0;
  int bw_units = 0;

  Grant& operator+=(const Grant& o);
  Grant& operator-=(const Grant& o);
  friend Grant operator+(Grant a, const Grant& b) { return a += b; }
  friend Grant operator-(Grant a, const Grant& b) { return a -= b; }
  friend bool operator==(const Grant&, const Grant&) = default;
  bool is_zero() const { return cores == 0 && ways == 0 && bw_units == 0; }
  // True when every component is >= the other's.
  bool covers(const Grant& o) const {
    return cores >= o.cores && ways >= o.ways && bw_units >= o.bw_units;
  }
};

Grant full_grant(const ServerSpec& server);

// Grant after resource sharing has been applied; may be fractional.
struct EffectiveGrant {
  double cores = 0.0;
  double ways = 0.0;
  double bw_units = 0.0;

  static EffectiveGrant of(const Grant& g) {
    return {static_cast<double>(g.cores), static_cast<double>(g.ways),
            static_cast<double>(g.bw_units)};
  }
  friend bool operator==(const EffectiveGrant&, const EffectiveGrant&) = default;
};

struct SurfaceParams {
  double base_latency_ms = 10.0;
  double qos_target_ms = 40.0;
  // Utilization on the full server at max load (load fraction 1.0).
  double peak_utilization = 0.75;
  // Cores at which parallel speedup saturates.
  double core_scale = 6.0;
  double working_set_mb = 16.0;
  // Steepness of the cache cliff, per MB.
  double cliff_sharpness = 2.0;
  // Capacity fraction left when the working set misses the cache.
  double cache_floor = 0.15;
  // Bandwidth units consumed at max load with a warm cache.
  double bw_demand = 2.0;
  // Extra bandwidth demand fraction with a cold cache.
  double miss_bw_penalty = 1.0;
  double bw_sensitivity = 1.0;
  double ipc_peak = 2.0;
  // LLC misses per second (millions) at max load with a cold cache.
  double miss_scale = 30.0;
  std::uint64_t noise_seed = 0;

  void validate() const;
  friend bool operator==(const SurfaceParams&, const SurfaceParams&) = default;
};

// Parameter ranges for randomly drawn surfaces. Also the source of the
// attainable telemetry extremes used for feature normalization.
struct SurfaceFamily {
  static constexpr double kBaseLatencyMin = 2.0, kBaseLatencyMax = 20.0;
  static constexpr double kQosFactor = 4.0;
  static constexpr double kPeakUtilMin = 0.45, kPeakUtilMax = 0.65;
  static constexpr double kCoreScaleMin = 2.0, kCoreScaleMax = 10.0;
  static constexpr double kWorkingSetMin = 3.0, kWorkingSetMax = 24.0;
  static constexpr double kSharpnessMin = 1.5, kSharpnessMax = 3.0;
  static constexpr double kCacheFloorMin = 0.08, kCacheFloorMax = 0.3;
  static constexpr double kBwDemandMin = 0.5, kBwDemandMax = 3.5;
  static constexpr double kMissPenaltyMin = 0.2, kMissPenaltyMax = 1.5;
  static constexpr double kBwSensMin = 0.5, kBwSensMax = 1.2;
  static constexpr double kIpcPeakMin = 0.8, kIpcPeakMax = 3.0;
  static constexpr double kMissScaleMin = 10.0, kMissScaleMax = 60.0;

  static SurfaceParams sample(std::mt19937_64& rng);
};

class LatencySurface {
 public:
  LatencySurface() = default;
  explicit LatencySurface(SurfaceParams params);

  const SurfaceParams& params() const { return params_; }
  double qos_target_ms() const { return params_.qos_target_ms; }

  // Fraction of the working set resident in `cache_mb` of LLC.
  double cache_hit_fraction(double cache_mb) const;
  // Bandwidth units demanded at `load` with `cache_mb` of LLC.
  double bw_demand_units(double load, double cache_mb) const;
  // Capacity relative to the full server, in [0, 1].
  double relative_capacity(const ServerSpec& server, const EffectiveGrant& g,
                           double load) const;
  // Sustainable load (fraction of max load) for the grant.
  double service_capacity(const ServerSpec& server, const EffectiveGrant& g,
                          double load) const;
  // Tail latency in ms. Zero cores gives kUnservedLatencyMs.
  double latency_ms(const ServerSpec& server, const EffectiveGrant& g,
                    double load, double queue_len = 0.0) const;

  // Calibrated so that at kMosesReferenceLoad on server1, 6 cores and 10
  // ways give 34 ms and 6 cores and 9 ways give 4644 ms.
  static LatencySurface moses();
  static constexpr double kMosesReferenceLoad = 0.6;

 private:
  SurfaceParams params_;
};

struct BeParams {
  double core_scale = 12.0;
  double cache_scale_mb = 8.0;
  double cache_floor = 0.5;
  double bw_scale = 3.0;
  double bw_floor = 0.4;
  double ipc_peak = 1.5;
  double miss_scale = 40.0;
  double bw_gbps_at_full = 20.0;

  void validate() const;
  friend bool operator==(const BeParams&, const BeParams&) = default;
};

// Normalized BE throughput: concave and increasing in every resource, 1.0 on
// the full server, 0.0 with no cores.
double be_throughput(const BeParams& be, const ServerSpec& server,
                     const EffectiveGrant& g);

enum class ServiceKind { kLatencyCritical, kBestEffort };

struct LoadStep {
  double t_ms = 0.0;
  double load = 0.0;
  friend bool operator==(const LoadStep&, const LoadStep&) = default;
};

struct ServiceSpec {
  std::string id;
  ServiceKind kind = ServiceKind::kLatencyCritical;
  LatencySurface surface;  // LC only
  BeParams be;             // BE only
  double arrival_ms = 0.0;
  // Piecewise constant; the first step applies from arrival onward.
  std::vector<LoadStep> load_schedule;

  bool is_lc() const { return kind == ServiceKind::kLatencyCritical; }
  double load_at(double t_ms) const;
  double qos_target_ms() const { return surface.qos_target_ms(); }
  void validate() const;
};

// Latency of `service` for a grant; the stateless core of the simulator.
double simulate_latency(const ServiceSpec& service, const ServerSpec& server,
                        const EffectiveGrant& g, double load,
                        double queue_len = 0.0);

struct SharingPair {
  std::string borrower;
  std::string owner;
  int cores = 0;
  int ways = 0;
  friend bool operator==(const SharingPair&, const SharingPair&) = default;
};

// Global partition. LC services own exclusive grants, BE services share one
// pool, and sharing pairs lend part of an owner's cores/ways to a borrower.
struct Allocation {
  std::map<std::string, Grant> lc;
  Grant be_pool;
  std::vector<std::string> be_members;
  std::vector<SharingPair> sharing;

  Grant committed() const;
  Grant idle(const ServerSpec& server) const;
  Grant grant_of(const std::string& id) const;
  bool has_be(const std::string& id) const;
  EffectiveGrant effective(const std::string& lc_id) const;
  // Throws Error(kInvariant) describing the first violated rule.
  void validate(const ServerSpec& server) const;
  friend bool operator==(const Allocation&, const Allocation&) = default;
};

struct Counters {
  double ipc = 0.0;
  double cache_misses = 0.0;  // millions per second
  double mbl_gbps = 0.0;
  double cpu_usage = 0.0;     // sum of per-core utilization
  double virt_mem_gb = 0.0;
  double res_mem_gb = 0.0;
  double allocated_cores = 0.0;
  double allocated_cache_mb = 0.0;
  double core_freq_ghz = 0.0;
  double neighbor_cores = 0.0;
  double neighbor_cache_mb = 0.0;
  double neighbor_mbl_gbps = 0.0;
  friend bool operator==(const Counters&, const Counters&) = default;
};

struct ServiceTelemetry {
  std::string id;
  ServiceKind kind = ServiceKind::kLatencyCritical;
  Grant grant;
  EffectiveGrant effective;
  double load = 0.0;
  double queue_len = 0.0;
  double latency_ms = 0.0;
  double qos_target_ms = 0.0;
  bool qos_met = false;
  double be_throughput = 0.0;
  Counters counters;
  friend bool operator==(const ServiceTelemetry&, const ServiceTelemetry&) = default;
};

struct Snapshot {
  double t_ms = 0.0;
  std::vector<ServiceTelemetry> services;

  const ServiceTelemetry* find(const std::string& id) const;
  // Throws Error(kNotFound).
  const ServiceTelemetry& at(const std::string& id) const;
  bool all_lc_met() const;
};

class Simulator {
 public:
  Simulator(ServerSpec server, std::vector<ServiceSpec> services);

  const ServerSpec& server() const { return server_; }
  double now_ms() const { return now_ms_; }
  const Allocation& allocation() const { return allocation_; }
  const std::vector<ServiceSpec>& services() const { return services_; }
  const ServiceSpec& service(const std::string& id) const;
  bool is_present(const std::string& id) const;
  std::vector<std::string> present_ids() const;
  double queue_len(const std::string& id) const;

  // Atomic: validates every partition invariant and either commits the whole
  // allocation or throws Error(kInvariant) leaving the old one in place.
  void install(Allocation next);

  Snapshot observe() const;
  Snapshot step(double dt_ms);
  // Telemetry the service would produce with `grant` at its current load and
  // an empty queue, holding every other service where it is.
  ServiceTelemetry probe(const std::string& id, const Grant& grant) const;

 private:
  ServiceTelemetry measure(const ServiceSpec& spec, const Grant& grant,
                           const EffectiveGrant& eff, double queue) const;
  void fill_neighbors(std::vector<ServiceTelemetry>& tel) const;

  ServerSpec server_;
  std::vector<ServiceSpec> services_;
  std::map<std::string, std::size_t> index_;
  std::map<std::string, double> queue_;
  Allocation allocation_;
  double now_ms_ = 0.0;
};

struct OaaResult {
  bool feasible = false;
  int oaa_cores = 0;
  int oaa_ways = 0;
  int oaa_bw_units = 0;
  int rcliff_cores = 0;
  int rcliff_ways = 0;
  // Latency ratio across the cliff step (rcliff cell over OAA cell).
  double cliff_ratio = 1.0;
  friend bool operator==(const OaaResult&, const OaaResult&) = default;
};

// Brute-force scan of the cores x ways x bandwidth grid.
OaaResult oracle_oaa_rcliff(const LatencySurface& surface,
                            const ServerSpec& server, double load,
                            double qos_target_ms);

// Largest adjacent-cell latency ratio on the cores x ways grid at full
// bandwidth; a surface has a cliff when this is >= 10.
double max_adjacent_latency_ratio(const LatencySurface& surface,
                                  const ServerSpec& server, double load);

}  // namespace cosched

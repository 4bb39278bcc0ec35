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
#include <bit>
#include <cmath>
#include <set>

#include "cosched/error.hpp"
#include "cosched/simenv.hpp"

namespace cosched {
namespace {

constexpr double kNoiseAmplitude = 0.01;
constexpr double kTurboBoost = 0.2;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Deterministic multiplicative jitter in [1 - a, 1 + a].
class Jitter {
 public:
  Jitter(std::uint64_t seed, const std::string& id, double t_ms)
      : key_(splitmix64(seed ^ fnv1a(id) ^ std::bit_cast<std::uint64_t>(t_ms))) {}
  double operator()(int field) const {
    const std::uint64_t r = splitmix64(key_ + static_cast<std::uint64_t>(field));
    const double u = static_cast<double>(r >> 11) * 0x1.0p-53;
    return 1.0 + kNoiseAmplitude * (2.0 * u - 1.0);
  }

 private:
  std::uint64_t key_;
};

}  // namespace

Simulator::Simulator(ServerSpec server, std::vector<ServiceSpec> services)
    : server_(std::move(server)), services_(std::move(services)) {
  server_.validate();
  for (std::size_t i = 0; i < services_.size(); ++i) {
    services_[i].validate();
    if (!index_.emplace(services_[i].id, i).second) {
      throw Error(ErrorCode::kConfig, "duplicate service id '" + services_[i].id + "'");
    }
    queue_[services_[i].id] = 0.0;
  }
}

const ServiceSpec& Simulator::service(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) {
    throw Error(ErrorCode::kNotFound, "unknown service '" + id + "'");
  }
  return services_[it->second];
}

bool Simulator::is_present(const std::string& id) const {
  auto it = index_.find(id);
  return it != index_.end() && services_[it->second].arrival_ms <= now_ms_;
}

std::vector<std::string> Simulator::present_ids() const {
  std::vector<std::string> ids;
  for (const auto& s : services_) {
    if (s.arrival_ms <= now_ms_) ids.push_back(s.id);
  }
  return ids;
}

double Simulator::queue_len(const std::string& id) const {
  service(id);
  return queue_.at(id);
}

void Simulator::install(Allocation next) {
  next.validate(server_);
  for (const auto& [id, g] : next.lc) {
    if (!is_present(id) || !service(id).is_lc()) {
      throw Error(ErrorCode::kInvariant,
                  "allocation rejected: " + id + " is not a present latency-critical service");
    }
  }
  for (const auto& id : next.be_members) {
    if (!is_present(id) || service(id).is_lc()) {
      throw Error(ErrorCode::kInvariant,
                  "allocation rejected: " + id + " is not a present best-effort service");
    }
  }
  allocation_ = std::move(next);
}

ServiceTelemetry Simulator::measure(const ServiceSpec& spec, const Grant& grant,
                                    const EffectiveGrant& eff, double queue) const {
  ServiceTelemetry t;
  t.id = spec.id;
  t.kind = spec.kind;
  t.grant = grant;
  t.effective = eff;
  t.queue_len = queue;
  Counters& c = t.counters;
  c.allocated_cores = eff.cores;
  c.allocated_cache_mb = eff.ways * server_.way_mb;
  const double cache_mb = c.allocated_cache_mb;
  const double bw_cap_gbps = eff.bw_units / kBandwidthUnits * server_.mem_bw_gbps;

  if (spec.is_lc()) {
    const auto& surf = spec.surface;
    const auto& p = surf.params();
    const Jitter jitter(p.noise_seed, spec.id, now_ms_);
    const double load = spec.load_at(now_ms_);
    t.load = load;
    t.qos_target_ms = p.qos_target_ms;
    t.latency_ms = surf.latency_ms(server_, eff, load, queue);
    t.qos_met = t.latency_ms <= p.qos_target_ms;
    const double capacity = surf.service_capacity(server_, eff, load);
    const double served = std::min(load, capacity);
    const double util =
        (queue > 0.0 || load >= capacity) ? 1.0 : (capacity > 0.0 ? load / capacity : 0.0);
    const double hit = surf.cache_hit_fraction(cache_mb);
    const double demand = surf.bw_demand_units(load, cache_mb);
    const double bw_ratio = demand > 0.0 ? std::min(1.0, eff.bw_units / demand) : 1.0;
    const double used_units =
        std::min(eff.bw_units, surf.bw_demand_units(served, cache_mb));
    const bool running = eff.cores > 0.0;
    c.ipc = running ? p.ipc_peak * (0.35 + 0.65 * hit) * (0.5 + 0.5 * bw_ratio) * jitter(0)
                    : 0.0;
    c.cache_misses = p.miss_scale * served * (0.05 + 0.95 * (1.0 - hit)) * jitter(1);
    c.mbl_gbps = used_units / kBandwidthUnits * server_.mem_bw_gbps * jitter(2);
    c.cpu_usage = util * eff.cores * jitter(3);
    c.virt_mem_gb = (1.0 + 0.8 * p.core_scale) * jitter(4);
    c.res_mem_gb = (0.5 + 0.1 * p.working_set_mb) * jitter(5);
  } else {
    const auto& be = spec.be;
    const Jitter jitter(0x6265ULL, spec.id, now_ms_);
    std::size_t sharers = std::max<std::size_t>(1, allocation_.be_members.size());
    const double tp = be_throughput(be, server_, eff);
    t.be_throughput = tp / static_cast<double>(sharers);
    t.qos_met = true;
    const double warm = 1.0 - std::exp(-cache_mb / be.cache_scale_mb);
    c.ipc = eff.cores > 0.0 ? be.ipc_peak * (0.5 + 0.5 * warm) * jitter(0) : 0.0;
    c.cache_misses = be.miss_scale * tp * (1.0 - 0.8 * warm) * jitter(1);
    c.mbl_gbps = std::min(bw_cap_gbps, be.bw_gbps_at_full * tp) * jitter(2);
    c.cpu_usage = eff.cores * jitter(3);
    c.virt_mem_gb = 2.0 * jitter(4);
    c.res_mem_gb = 1.0 * jitter(5);
  }
  return t;
}

void Simulator::fill_neighbors(std::vector<ServiceTelemetry>& tel) const {
  double busy = 0.0, cores = 0.0, cache = 0.0, mbl = 0.0;
  for (const auto& t : tel) {
    busy += t.counters.cpu_usage;
    cores += t.counters.allocated_cores;
    cache += t.counters.allocated_cache_mb;
    mbl += t.counters.mbl_gbps;
  }
  const double idle_share = std::max(0.0, 1.0 - busy / server_.n_cores);
  const double freq = server_.freq_ghz * (1.0 + kTurboBoost * idle_share);
  for (auto& t : tel) {
    auto& c = t.counters;
    c.core_freq_ghz = freq;
    c.neighbor_cores = cores - c.allocated_cores;
    c.neighbor_cache_mb = cache - c.allocated_cache_mb;
    c.neighbor_mbl_gbps = mbl - c.mbl_gbps;
  }
}

Snapshot Simulator::observe() const {
  Snapshot snap;
  snap.t_ms = now_ms_;
  for (const auto& spec : services_) {
    if (spec.arrival_ms > now_ms_) continue;
    const Grant g = allocation_.grant_of(spec.id);
    const EffectiveGrant eff =
        spec.is_lc() ? allocation_.effective(spec.id) : EffectiveGrant::of(g);
    snap.services.push_back(measure(spec, g, eff, queue_.at(spec.id)));
  }
  fill_neighbors(snap.services);
  return snap;
}

Snapshot Simulator::step(double dt_ms) {
  if (!(dt_ms > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "step duration must be positive");
  }
  for (const auto& spec : services_) {
    if (!spec.is_lc() || spec.arrival_ms > now_ms_) continue;
    const double load = spec.load_at(now_ms_);
    const double capacity =
        spec.surface.service_capacity(server_, allocation_.effective(spec.id), load);
    double& q = queue_[spec.id];
    q = std::max(0.0, q + (load - capacity) * dt_ms / 1000.0);
  }
  now_ms_ += dt_ms;
  return observe();
}

ServiceTelemetry Simulator::probe(const std::string& id, const Grant& grant) const {
  const ServiceSpec& spec = service(id);
  if (!is_present(id)) {
    throw Error(ErrorCode::kInvalidArgument, "cannot probe absent service " + id);
  }
  std::vector<ServiceTelemetry> tel;
  for (const auto& s : observe().services) {
    if (s.id != id) tel.push_back(s);
  }
  tel.push_back(measure(spec, grant, EffectiveGrant::of(grant), 0.0));
  fill_neighbors(tel);
  return tel.back();
}

}  // namespace cosched

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
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "cosched/error.hpp"
#include "cosched/harness.hpp"
#include "json.hpp"

namespace cosched {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr std::string_view kFamilyPrefix = "family:";

ordered_json surface_to_json(const SurfaceParams& p) {
  ordered_json j;
  j["base_latency_ms"] = p.base_latency_ms;
  j["qos_target_ms"] = p.qos_target_ms;
  j["peak_utilization"] = p.peak_utilization;
  j["core_scale"] = p.core_scale;
  j["working_set_mb"] = p.working_set_mb;
  j["cliff_sharpness"] = p.cliff_sharpness;
  j["cache_floor"] = p.cache_floor;
  j["bw_demand"] = p.bw_demand;
  j["miss_bw_penalty"] = p.miss_bw_penalty;
  j["bw_sensitivity"] = p.bw_sensitivity;
  j["ipc_peak"] = p.ipc_peak;
  j["miss_scale"] = p.miss_scale;
  j["noise_seed"] = p.noise_seed;
  return j;
}

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

SurfaceParams surface_from_json(const json& j) {
  if (j.is_string()) return surface_preset(j.get<std::string>()).params();
  SurfaceParams p;
  if (j.contains("preset")) p = surface_preset(j.at("preset").get<std::string>()).params();
  read_opt(j, "base_latency_ms", p.base_latency_ms);
  read_opt(j, "qos_target_ms", p.qos_target_ms);
  read_opt(j, "peak_utilization", p.peak_utilization);
  read_opt(j, "core_scale", p.core_scale);
  read_opt(j, "working_set_mb", p.working_set_mb);
  read_opt(j, "cliff_sharpness", p.cliff_sharpness);
  read_opt(j, "cache_floor", p.cache_floor);
  read_opt(j, "bw_demand", p.bw_demand);
  read_opt(j, "miss_bw_penalty", p.miss_bw_penalty);
  read_opt(j, "bw_sensitivity", p.bw_sensitivity);
  read_opt(j, "ipc_peak", p.ipc_peak);
  read_opt(j, "miss_scale", p.miss_scale);
  read_opt(j, "noise_seed", p.noise_seed);
  return p;
}

ordered_json be_to_json(const BeParams& b) {
  ordered_json j;
  j["core_scale"] = b.core_scale;
  j["cache_scale_mb"] = b.cache_scale_mb;
  j["cache_floor"] = b.cache_floor;
  j["bw_scale"] = b.bw_scale;
  j["bw_floor"] = b.bw_floor;
  j["ipc_peak"] = b.ipc_peak;
  j["miss_scale"] = b.miss_scale;
  j["bw_gbps_at_full"] = b.bw_gbps_at_full;
  return j;
}

BeParams be_from_json(const json& j) {
  if (j.is_string()) return be_preset(j.get<std::string>());
  BeParams b;
  if (j.contains("preset")) b = be_preset(j.at("preset").get<std::string>());
  read_opt(j, "core_scale", b.core_scale);
  read_opt(j, "cache_scale_mb", b.cache_scale_mb);
  read_opt(j, "cache_floor", b.cache_floor);
  read_opt(j, "bw_scale", b.bw_scale);
  read_opt(j, "bw_floor", b.bw_floor);
  read_opt(j, "ipc_peak", b.ipc_peak);
  read_opt(j, "miss_scale", b.miss_scale);
  read_opt(j, "bw_gbps_at_full", b.bw_gbps_at_full);
  return b;
}

ordered_json server_to_json(const ServerSpec& s) {
  ordered_json j;
  j["platform_id"] = s.platform_id;
  j["n_cores"] = s.n_cores;
  j["n_llc_ways"] = s.n_llc_ways;
  j["mem_bw_units"] = s.mem_bw_units;
  j["way_mb"] = s.way_mb;
  j["freq_ghz"] = s.freq_ghz;
  j["mem_bw_gbps"] = s.mem_bw_gbps;
  return j;
}

ServerSpec server_from_json(const json& j) {
  if (j.is_string()) return ServerSpec::preset(j.get<std::string>());
  ServerSpec s;
  if (j.contains("preset")) s = ServerSpec::preset(j.at("preset").get<std::string>());
  read_opt(j, "platform_id", s.platform_id);
  read_opt(j, "n_cores", s.n_cores);
  read_opt(j, "n_llc_ways", s.n_llc_ways);
  read_opt(j, "mem_bw_units", s.mem_bw_units);
  read_opt(j, "way_mb", s.way_mb);
  read_opt(j, "freq_ghz", s.freq_ghz);
  read_opt(j, "mem_bw_gbps", s.mem_bw_gbps);
  return s;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

LatencySurface surface_preset(std::string_view name) {
  if (name == "moses") return LatencySurface::moses();
  if (name.substr(0, kFamilyPrefix.size()) == kFamilyPrefix) {
    const auto digits = name.substr(kFamilyPrefix.size());
    std::uint64_t seed = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), seed);
    if (ec == std::errc() && ptr == digits.data() + digits.size() && !digits.empty()) {
      std::mt19937_64 rng(seed);
      return LatencySurface(SurfaceFamily::sample(rng));
    }
  }
  throw Error(ErrorCode::kConfig, "unknown surface preset '" + std::string(name) + "'");
}

std::vector<std::string> surface_preset_names() { return {"moses", "family:<seed>"}; }

BeParams be_preset(std::string_view name) {
  BeParams b;
  if (name == "default") return b;
  if (name == "streaming") {
    b.cache_scale_mb = 4.0;
    b.bw_scale = 6.0;
    b.bw_floor = 0.2;
    b.bw_gbps_at_full = 35.0;
    return b;
  }
  if (name == "compute") {
    b.core_scale = 20.0;
    b.cache_floor = 0.8;
    b.bw_floor = 0.8;
    b.bw_gbps_at_full = 8.0;
    return b;
  }
  throw Error(ErrorCode::kConfig, "unknown best-effort preset '" + std::string(name) + "'");
}

Scenario Scenario::parse(const std::string& json_text) {
  Scenario s;
  try {
    const json j = json::parse(json_text);
    s.schema_version = j.at("schema_version").get<int>();
    if (s.schema_version != kSchemaVersion) {
      throw Error(ErrorCode::kConfig,
                  "unsupported scenario schema_version " + std::to_string(s.schema_version));
    }
    read_opt(j, "name", s.name);
    s.server = server_from_json(j.at("server"));
    read_opt(j, "seed", s.seed);
    read_opt(j, "tick_ms", s.tick_ms);
    read_opt(j, "duration_ms", s.duration_ms);
    read_opt(j, "cutoff_ms", s.cutoff_ms);
    read_opt(j, "sustain_ms", s.sustain_ms);
    for (const auto& js : j.at("services")) {
      ServiceSpec svc;
      svc.id = js.at("id").get<std::string>();
      const auto kind = js.at("kind").get<std::string>();
      if (kind == "lc") {
        svc.kind = ServiceKind::kLatencyCritical;
        svc.surface = LatencySurface(surface_from_json(js.at("surface")));
        for (const auto& step : js.at("load")) {
          svc.load_schedule.push_back({step.at("t_ms").get<double>(), step.at("load").get<double>()});
        }
      } else if (kind == "be") {
        svc.kind = ServiceKind::kBestEffort;
        svc.be = js.contains("be") ? be_from_json(js.at("be")) : BeParams{};
      } else {
        throw Error(ErrorCode::kConfig, "service " + svc.id + ": kind must be lc or be");
      }
      read_opt(js, "arrival_ms", svc.arrival_ms);
      s.services.push_back(std::move(svc));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("scenario: ") + e.what());
  }
  s.validate();
  return s;
}

Scenario Scenario::load(const std::string& path) { return parse(read_text(path)); }

std::string Scenario::to_json() const {
  ordered_json j;
  j["schema_version"] = schema_version;
  j["name"] = name;
  j["seed"] = seed;
  j["server"] = server_to_json(server);
  j["tick_ms"] = tick_ms;
  j["duration_ms"] = duration_ms;
  j["cutoff_ms"] = cutoff_ms;
  j["sustain_ms"] = sustain_ms;
  ordered_json services = ordered_json::array();
  for (const auto& svc : this->services) {
    ordered_json js;
    js["id"] = svc.id;
    js["kind"] = svc.is_lc() ? "lc" : "be";
    js["arrival_ms"] = svc.arrival_ms;
    if (svc.is_lc()) {
      js["surface"] = surface_to_json(svc.surface.params());
      ordered_json load = ordered_json::array();
      for (const auto& step : svc.load_schedule) {
        load.push_back({{"t_ms", step.t_ms}, {"load", step.load}});
      }
      js["load"] = load;
    } else {
      js["be"] = be_to_json(svc.be);
    }
    services.push_back(js);
  }
  j["services"] = services;
  return j.dump(2) + "\n";
}

void Scenario::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << to_json();
}

void Scenario::validate() const {
  if (schema_version != kSchemaVersion) {
    throw Error(ErrorCode::kConfig, "unsupported scenario schema_version");
  }
  server.validate();
  if (services.empty()) throw Error(ErrorCode::kConfig, "scenario has no services");
  std::set<std::string> ids;
  for (const auto& s : services) {
    s.validate();
    if (!ids.insert(s.id).second) {
      throw Error(ErrorCode::kConfig, "duplicate service id " + s.id);
    }
    if (s.id == "be_pool" || s.id == "*") {
      throw Error(ErrorCode::kConfig, "service id " + s.id + " is reserved");
    }
  }
  if (!(tick_ms > 0.0) || !(duration_ms > 0.0) || !(sustain_ms > 0.0) ||
      !(cutoff_ms > 0.0) || cutoff_ms > duration_ms) {
    throw Error(ErrorCode::kConfig,
                "scenario timing needs positive tick, sustain and cutoff <= duration");
  }
}

std::vector<double> Scenario::disturbances() const {
  std::set<double> times;
  for (const auto& s : services) {
    if (s.arrival_ms > 0.0) times.insert(s.arrival_ms);
    for (std::size_t i = 1; i < s.load_schedule.size(); ++i) {
      if (s.load_schedule[i].t_ms > 0.0) times.insert(s.load_schedule[i].t_ms);
    }
  }
  return {times.begin(), times.end()};
}

bool oaa_fits(const Scenario& s) {
  Grant need;
  bool be = false;
  for (const auto& svc : s.services) {
    if (!svc.is_lc()) {
      be = true;
      continue;
    }
    double peak = 0.0;
    for (const auto& step : svc.load_schedule) peak = std::max(peak, step.load);
    const OaaResult r =
        oracle_oaa_rcliff(svc.surface, s.server, peak, svc.surface.qos_target_ms());
    if (!r.feasible) return false;
    need += Grant{r.oaa_cores, r.oaa_ways, r.oaa_bw_units};
  }
  if (be) need += Grant{1, 1, 1};
  return full_grant(s.server).covers(need);
}

}  // namespace cosched

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
#include <fstream>
#include <sstream>

#include "cosched/error.hpp"
#include "cosched/features.hpp"
#include "json.hpp"

namespace cosched {
namespace {

constexpr std::array<std::string_view, kFeatureCount> kNames = {
    "ipc",           "cache_misses",   "mbl",           "cpu_usage",
    "virt_mem",      "res_mem",        "allocated_cores", "allocated_cache",
    "core_frequency", "expected_cores", "expected_cache", "neighbor_cores",
    "neighbor_cache", "neighbor_mbl"};

// Telemetry jitter is at most 1%; bounds leave room for it.
constexpr double kJitterRoom = 1.02;

}  // namespace

std::string_view feature_name(Feature f) { return kNames[static_cast<int>(f)]; }

std::string_view model_name(ModelKind m) {
  switch (m) {
    case ModelKind::kA: return "A";
    case ModelKind::kB: return "B";
    case ModelKind::kC: return "C";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "A" || name == "a") return ModelKind::kA;
  if (name == "B" || name == "b") return ModelKind::kB;
  if (name == "C" || name == "c") return ModelKind::kC;
  throw Error(ErrorCode::kConfig, "unknown model '" + std::string(name) + "'");
}

const std::vector<Feature>& projection(ModelKind m) {
  using F = Feature;
  static const std::vector<F> a = {
      F::kIpc,           F::kCacheMisses,    F::kMbl,           F::kCpuUsage,
      F::kVirtMem,       F::kResMem,         F::kAllocatedCores, F::kAllocatedCache,
      F::kCoreFrequency, F::kNeighborCores,  F::kNeighborCache,  F::kNeighborMbl};
  static const std::vector<F> b = {
      F::kIpc,           F::kCacheMisses,    F::kMbl,           F::kCpuUsage,
      F::kVirtMem,       F::kResMem,         F::kAllocatedCores, F::kAllocatedCache,
      F::kCoreFrequency, F::kExpectedCores,  F::kExpectedCache,  F::kNeighborCores,
      F::kNeighborCache, F::kNeighborMbl};
  static const std::vector<F> c = {F::kIpc,           F::kCacheMisses,
                                   F::kMbl,           F::kCpuUsage,
                                   F::kAllocatedCores, F::kAllocatedCache,
                                   F::kCoreFrequency};
  switch (m) {
    case ModelKind::kA: return a;
    case ModelKind::kB: return b;
    case ModelKind::kC: return c;
  }
  return a;
}

double normalize(double raw, const Bounds& b) {
  if (!(b.max > b.min)) {
    throw Error(ErrorCode::kConfig, "normalization bounds need max > min");
  }
  return std::clamp((raw - b.min) / (b.max - b.min), 0.0, 1.0);
}

double denormalize(double x, const Bounds& b) { return b.min + x * (b.max - b.min); }

NormalizationSpec NormalizationSpec::derive(const ServerSpec& server) {
  server.validate();
  using SF = SurfaceFamily;
  const double cores = server.n_cores;
  const double llc = server.llc_mb();
  const double bw = server.mem_bw_gbps * kJitterRoom;
  NormalizationSpec n;
  n.platform_id = server.platform_id;
  auto set = [&n](Feature f, double lo, double hi) {
    n.bounds[static_cast<int>(f)] = {lo, hi};
  };
  set(Feature::kIpc, 0.0, SF::kIpcPeakMax * kJitterRoom);
  set(Feature::kCacheMisses, 0.0, SF::kMissScaleMax * kJitterRoom);
  set(Feature::kMbl, 0.0, bw);
  set(Feature::kCpuUsage, 0.0, cores);
  set(Feature::kVirtMem, 0.0, (1.0 + 0.8 * SF::kCoreScaleMax) * kJitterRoom);
  set(Feature::kResMem, 0.0, (0.5 + 0.1 * SF::kWorkingSetMax) * kJitterRoom);
  set(Feature::kAllocatedCores, 0.0, cores);
  set(Feature::kAllocatedCache, 0.0, llc);
  set(Feature::kCoreFrequency, server.freq_ghz, server.freq_ghz * 1.2);
  set(Feature::kExpectedCores, 0.0, cores);
  set(Feature::kExpectedCache, 0.0, llc);
  set(Feature::kNeighborCores, 0.0, cores);
  set(Feature::kNeighborCache, 0.0, llc);
  set(Feature::kNeighborMbl, 0.0, bw);
  return n;
}

void NormalizationSpec::validate() const {
  if (platform_id.empty()) {
    throw Error(ErrorCode::kConfig, "normalization spec without platform_id");
  }
  if (version != kVersion) {
    throw Error(ErrorCode::kConfig,
                "unsupported normalization spec version " + std::to_string(version));
  }
  for (int i = 0; i < kFeatureCount; ++i) {
    if (!(bounds[i].max > bounds[i].min)) {
      throw Error(ErrorCode::kConfig, "normalization bounds for " +
                                          std::string(kNames[i]) + " need max > min");
    }
  }
}

std::string NormalizationSpec::id() const {
  return platform_id + "/v" + std::to_string(version);
}

std::string NormalizationSpec::to_json() const {
  nlohmann::ordered_json j;
  j["version"] = version;
  j["platform_id"] = platform_id;
  nlohmann::ordered_json features = nlohmann::ordered_json::object();
  for (int i = 0; i < kFeatureCount; ++i) {
    features[std::string(kNames[i])] = {{"min", bounds[i].min}, {"max", bounds[i].max}};
  }
  j["features"] = features;
  return j.dump(2) + "\n";
}

NormalizationSpec NormalizationSpec::parse(const std::string& json_text) {
  NormalizationSpec n;
  try {
    const auto j = nlohmann::json::parse(json_text);
    n.version = j.at("version").get<int>();
    n.platform_id = j.at("platform_id").get<std::string>();
    const auto& f = j.at("features");
    for (int i = 0; i < kFeatureCount; ++i) {
      const auto& e = f.at(std::string(kNames[i]));
      n.bounds[i] = {e.at("min").get<double>(), e.at("max").get<double>()};
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("normalization spec: ") + e.what());
  }
  n.validate();
  return n;
}

NormalizationSpec NormalizationSpec::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void NormalizationSpec::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << to_json();
}

RawFeatures raw_features(const ServiceTelemetry& t,
                         std::optional<ExpectedGrant> expected) {
  const Counters& c = t.counters;
  RawFeatures r{};
  r[int(Feature::kIpc)] = c.ipc;
  r[int(Feature::kCacheMisses)] = c.cache_misses;
  r[int(Feature::kMbl)] = c.mbl_gbps;
  r[int(Feature::kCpuUsage)] = c.cpu_usage;
  r[int(Feature::kVirtMem)] = c.virt_mem_gb;
  r[int(Feature::kResMem)] = c.res_mem_gb;
  r[int(Feature::kAllocatedCores)] = c.allocated_cores;
  r[int(Feature::kAllocatedCache)] = c.allocated_cache_mb;
  r[int(Feature::kCoreFrequency)] = c.core_freq_ghz;
  if (expected) {
    r[int(Feature::kExpectedCores)] = expected->cores;
    r[int(Feature::kExpectedCache)] = expected->cache_mb;
  }
  r[int(Feature::kNeighborCores)] = c.neighbor_cores;
  r[int(Feature::kNeighborCache)] = c.neighbor_cache_mb;
  r[int(Feature::kNeighborMbl)] = c.neighbor_mbl_gbps;
  return r;
}

std::vector<double> extract(const ServiceTelemetry& t, ModelKind model,
                            const NormalizationSpec& norm,
                            std::optional<ExpectedGrant> expected) {
  if ((model == ModelKind::kB) != expected.has_value()) {
    throw Error(ErrorCode::kInvalidArgument,
                "expected grant must be supplied exactly for the QoS model");
  }
  const RawFeatures raw = raw_features(t, expected);
  std::vector<double> out;
  const auto& fields = projection(model);
  out.reserve(fields.size());
  for (Feature f : fields) out.push_back(normalize(raw[int(f)], norm.of(f)));
  return out;
}

std::vector<double> extract(const Snapshot& snap, const std::string& service_id,
                            ModelKind model, const NormalizationSpec& norm,
                            std::optional<ExpectedGrant> expected) {
  return extract(snap.at(service_id), model, norm, expected);
}

std::vector<double> denormalize_projection(std::span<const double> x, ModelKind model,
                                           const NormalizationSpec& norm) {
  const auto& fields = projection(model);
  if (x.size() != fields.size()) {
    throw Error(ErrorCode::kStructural, "projection length mismatch");
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out.push_back(denormalize(x[i], norm.of(fields[i])));
  }
  return out;
}

}  // namespace cosched

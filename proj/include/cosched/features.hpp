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


// Telemetry feature vectors for the three models. Every field is min-max
// normalized into [0, 1] with per-platform bounds.

#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cosched/simenv.hpp"

namespace cosched {

enum class Feature : int {
  kIpc = 0,
  kCacheMisses,
  kMbl,
  kCpuUsage,
  kVirtMem,
  kResMem,
  kAllocatedCores,
  kAllocatedCache,
  kCoreFrequency,
  kExpectedCores,
  kExpectedCache,
  kNeighborCores,
  kNeighborCache,
  kNeighborMbl,
};
inline constexpr int kFeatureCount = 14;

enum class ModelKind { kA, kB, kC };

std::string_view feature_name(Feature f);
std::string_view model_name(ModelKind m);
ModelKind parse_model_kind(std::string_view name);
// Ordered field subset each model consumes.
const std::vector<Feature>& projection(ModelKind m);

struct Bounds {
  double min = 0.0;
  double max = 1.0;
  friend bool operator==(const Bounds&, const Bounds&) = default;
};

double normalize(double raw, const Bounds& b);
double denormalize(double x, const Bounds& b);

class NormalizationSpec {
 public:
  static constexpr int kVersion = 1;

  std::string platform_id;
  int version = kVersion;
  std::array<Bounds, kFeatureCount> bounds{};

  // Bounds from the simulator's attainable telemetry extremes on `server`.
  static NormalizationSpec derive(const ServerSpec& server);
  static NormalizationSpec parse(const std::string& json_text);
  static NormalizationSpec load(const std::string& path);
  std::string to_json() const;
  void save(const std::string& path) const;

  std::string id() const;
  const Bounds& of(Feature f) const { return bounds[static_cast<int>(f)]; }
  void validate() const;
  friend bool operator==(const NormalizationSpec&, const NormalizationSpec&) = default;
};

// Proposed grant for the QoS model's "expected" fields.
struct ExpectedGrant {
  double cores = 0.0;
  double cache_mb = 0.0;
};

using RawFeatures = std::array<double, kFeatureCount>;

RawFeatures raw_features(const ServiceTelemetry& t,
                         std::optional<ExpectedGrant> expected = std::nullopt);

std::vector<double> extract(const ServiceTelemetry& t, ModelKind model,
                            const NormalizationSpec& norm,
                            std::optional<ExpectedGrant> expected = std::nullopt);
// Throws Error(kNotFound) when the service is missing from the snapshot.
std::vector<double> extract(const Snapshot& snap, const std::string& service_id,
                            ModelKind model, const NormalizationSpec& norm,
                            std::optional<ExpectedGrant> expected = std::nullopt);

std::vector<double> denormalize_projection(std::span<const double> x, ModelKind model,
                                           const NormalizationSpec& norm);

}  // namespace cosched

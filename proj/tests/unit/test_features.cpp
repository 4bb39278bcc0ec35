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
#include "cosched/features.hpp"
#include "doctest.h"

using namespace cosched;

namespace {

Snapshot two_service_snapshot(const ServerSpec& server) {
  std::mt19937_64 rng(3);
  ServiceSpec x;
  x.id = "x";
  x.surface = LatencySurface(SurfaceFamily::sample(rng));
  x.load_schedule = {{0.0, 0.5}};
  ServiceSpec y = x;
  y.id = "y";
  y.surface = LatencySurface(SurfaceFamily::sample(rng));
  Simulator sim(server, {x, y});
  Allocation a;
  a.lc["x"] = {10, 5, 4};
  a.lc["y"] = {12, 4, 4};
  sim.install(a);
  return sim.step(100.0);
}

}  // namespace

TEST_CASE("projections") {
  CHECK(projection(ModelKind::kA).size() == 12);
  CHECK(projection(ModelKind::kB).size() == 14);
  CHECK(projection(ModelKind::kC).size() == 7);
  for (Feature f : projection(ModelKind::kA)) {
    CHECK(f != Feature::kExpectedCores);
    CHECK(f != Feature::kExpectedCache);
  }
  CHECK(parse_model_kind("B") == ModelKind::kB);
  CHECK_THROWS_AS(parse_model_kind("D"), Error);
}

TEST_CASE("normalize clamps and inverts") {
  const Bounds b{2.0, 6.0};
  CHECK(normalize(4.0, b) == 0.5);
  CHECK(normalize(-1.0, b) == 0.0);
  CHECK(normalize(9.0, b) == 1.0);
  CHECK(denormalize(0.25, b) == 3.0);
  CHECK_THROWS_AS(normalize(1.0, Bounds{1.0, 1.0}), Error);
}

TEST_CASE("normalization spec round-trips through JSON") {
  for (const auto& id : ServerSpec::preset_ids()) {
    const auto n = NormalizationSpec::derive(ServerSpec::preset(id));
    CHECK_NOTHROW(n.validate());
    CHECK(NormalizationSpec::parse(n.to_json()) == n);
    CHECK(n.id() == id + "/v1");
  }
  auto n = NormalizationSpec::derive(ServerSpec::preset("server1"));
  n.version = 2;
  CHECK_THROWS_AS(NormalizationSpec::parse(n.to_json()), Error);
  CHECK_THROWS_AS(NormalizationSpec::parse("{\"version\": 1}"), Error);
}

TEST_CASE("extracted features stay in the unit interval") {
  for (const auto& id : ServerSpec::preset_ids()) {
    const auto server = ServerSpec::preset(id);
    const auto norm = NormalizationSpec::derive(server);
    const Snapshot snap = two_service_snapshot(server);
    for (ModelKind m : {ModelKind::kA, ModelKind::kC}) {
      const auto v = extract(snap, "x", m, norm);
      CHECK(v.size() == projection(m).size());
      for (double f : v) {
        CHECK(f >= 0.0);
        CHECK(f <= 1.0);
      }
    }
    const auto vb = extract(snap, "x", ModelKind::kB, norm, ExpectedGrant{5.0, 9.0});
    CHECK(vb.size() == 14);
  }
}

TEST_CASE("extracted fields follow the projection order") {
  const auto server = ServerSpec::preset("server1");
  const auto norm = NormalizationSpec::derive(server);
  const Snapshot snap = two_service_snapshot(server);
  const auto& t = snap.at("x");
  const auto v = extract(t, ModelKind::kC, norm);
  CHECK(v[4] == doctest::Approx(10.0 / 36.0));         // allocated cores
  CHECK(v[5] == doctest::Approx(5.0 * 2.25 / 45.0));   // allocated cache
  const auto vb = extract(t, ModelKind::kB, norm, ExpectedGrant{18.0, 22.5});
  CHECK(vb[9] == doctest::Approx(0.5));
  CHECK(vb[10] == doctest::Approx(0.5));
  CHECK(vb[11] == doctest::Approx(12.0 / 36.0));  // neighbor cores
  const auto raw = denormalize_projection(v, ModelKind::kC, norm);
  CHECK(raw[4] == doctest::Approx(10.0));
}

TEST_CASE("expected grant is required exactly for the QoS model") {
  const auto server = ServerSpec::preset("server1");
  const auto norm = NormalizationSpec::derive(server);
  const Snapshot snap = two_service_snapshot(server);
  CHECK_THROWS_AS(extract(snap, "x", ModelKind::kB, norm), Error);
  CHECK_THROWS_AS(extract(snap, "x", ModelKind::kA, norm, ExpectedGrant{}), Error);
  CHECK_THROWS_AS(extract(snap, "nope", ModelKind::kA, norm), Error);
}

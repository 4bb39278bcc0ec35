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
#include <random>

#include "cosched/error.hpp"
#include "cosched/simenv.hpp"
#include "doctest.h"

using namespace cosched;

namespace {

ServiceSpec lc(std::string id, LatencySurface s, double load, double arrival = 0.0) {
  ServiceSpec spec;
  spec.id = std::move(id);
  spec.surface = std::move(s);
  spec.arrival_ms = arrival;
  spec.load_schedule = {{arrival, load}};
  return spec;
}

ServiceSpec be(std::string id) {
  ServiceSpec spec;
  spec.id = std::move(id);
  spec.kind = ServiceKind::kBestEffort;
  spec.load_schedule = {{0.0, 1.0}};
  return spec;
}

LatencySurface family(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return LatencySurface(SurfaceFamily::sample(rng));
}

}  // namespace

TEST_CASE("server presets") {
  const auto s1 = ServerSpec::preset("server1");
  CHECK(s1.n_cores == 36);
  CHECK(s1.n_llc_ways == 20);
  CHECK(s1.mem_bw_units == 10);
  CHECK(s1.way_mb == doctest::Approx(2.25));
  const auto s2 = ServerSpec::preset("server2");
  CHECK(s2.n_cores == 64);
  CHECK(s2.n_llc_ways == 12);
  CHECK(s2.way_mb == doctest::Approx(4.0));
  const auto s3 = ServerSpec::preset("server3");
  CHECK(s3.n_cores == 48);
  CHECK(s3.n_llc_ways == 11);
  CHECK(s3.way_mb == doctest::Approx(3.25));
  CHECK_THROWS_AS(ServerSpec::preset("server9"), Error);
}

TEST_CASE("moses surface hits its calibration points") {
  const auto server = ServerSpec::preset("server1");
  const auto moses = LatencySurface::moses();
  const double load = LatencySurface::kMosesReferenceLoad;
  const double fast = moses.latency_ms(server, {6, 10, 10}, load);
  const double slow = moses.latency_ms(server, {6, 9, 10}, load);
  CHECK(std::abs(fast - 34.0) <= 0.05 * 34.0);
  CHECK(std::abs(slow - 4644.0) <= 0.05 * 4644.0);
}

TEST_CASE("latency is non-increasing in every resource") {
  const auto server = ServerSpec::preset("server1");
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto s = family(seed);
    const double load = 0.2 + 0.03 * static_cast<double>(seed);
    for (int c = 1; c < server.n_cores; c += 3) {
      for (int w = 1; w < server.n_llc_ways; w += 2) {
        for (int b = 1; b < 10; b += 3) {
          const double here = s.latency_ms(server, {double(c), double(w), double(b)}, load);
          CHECK(s.latency_ms(server, {double(c + 1), double(w), double(b)}, load) <= here);
          CHECK(s.latency_ms(server, {double(c), double(w + 1), double(b)}, load) <= here);
          CHECK(s.latency_ms(server, {double(c), double(w), double(b + 1)}, load) <= here);
        }
      }
    }
  }
}

TEST_CASE("zero cores is unserved") {
  const auto server = ServerSpec::preset("server1");
  CHECK(family(3).latency_ms(server, {0, 5, 5}, 0.5) == kUnservedLatencyMs);
}

TEST_CASE("best-effort throughput shape") {
  const auto server = ServerSpec::preset("server2");
  const BeParams p;
  CHECK(be_throughput(p, server, {0, 12, 10}) == 0.0);
  CHECK(be_throughput(p, server, EffectiveGrant::of(full_grant(server))) ==
        doctest::Approx(1.0));
  double prev = 0.0;
  for (int c = 1; c <= server.n_cores; ++c) {
    const double tp = be_throughput(p, server, {double(c), 6, 5});
    CHECK(tp >= prev);
    prev = tp;
  }
}

TEST_CASE("load schedule is piecewise constant") {
  auto s = lc("a", family(1), 0.3, 100.0);
  s.load_schedule.push_back({500.0, 0.6});
  CHECK(s.load_at(100.0) == 0.3);
  CHECK(s.load_at(499.0) == 0.3);
  CHECK(s.load_at(500.0) == 0.6);
  CHECK(s.load_at(1e9) == 0.6);
}

TEST_CASE("allocation invariants") {
  const auto server = ServerSpec::preset("server1");
  Allocation a;
  a.lc["x"] = {10, 5, 3};
  a.lc["y"] = {10, 5, 3};
  a.be_members = {"b"};
  a.be_pool = {16, 10, 4};
  CHECK_NOTHROW(a.validate(server));
  CHECK(a.idle(server) == Grant{0, 0, 0});

  SUBCASE("oversubscribed cores") {
    a.be_pool.cores = 17;
    CHECK_THROWS_AS(a.validate(server), Error);
  }
  SUBCASE("pool without members") {
    a.be_members.clear();
    CHECK_THROWS_AS(a.validate(server), Error);
  }
  SUBCASE("negative grant") {
    a.lc["x"].ways = -1;
    CHECK_THROWS_AS(a.validate(server), Error);
  }
  SUBCASE("sharing limited to what the owner holds") {
    a.sharing.push_back({"x", "y", 10, 5});
    CHECK_NOTHROW(a.validate(server));
    a.sharing.push_back({"x", "y", 1, 0});
    CHECK_THROWS_AS(a.validate(server), Error);
  }
  SUBCASE("sharing needs two distinct services") {
    a.sharing.push_back({"x", "x", 1, 0});
    CHECK_THROWS_AS(a.validate(server), Error);
  }
  SUBCASE("shared units split evenly") {
    a.sharing.push_back({"x", "y", 2, 2});
    CHECK(a.effective("x") == EffectiveGrant{11, 6, 3});
    CHECK(a.effective("y") == EffectiveGrant{9, 4, 3});
  }
}

TEST_CASE("install is atomic") {
  const auto server = ServerSpec::preset("server1");
  Simulator sim(server, {lc("x", family(2), 0.4), be("b")});
  Allocation good;
  good.lc["x"] = {8, 8, 5};
  sim.install(good);
  Allocation bad = good;
  bad.lc["x"].cores = 99;
  CHECK_THROWS_AS(sim.install(bad), Error);
  CHECK(sim.allocation() == good);
  Allocation unknown = good;
  unknown.lc["ghost"] = {1, 1, 1};
  CHECK_THROWS_AS(sim.install(unknown), Error);
  CHECK(sim.allocation() == good);
}

TEST_CASE("simulator arrivals and queueing") {
  const auto server = ServerSpec::preset("server1");
  Simulator sim(server, {lc("x", family(4), 0.5), lc("late", family(5), 0.3, 1000.0)});
  CHECK(sim.present_ids() == std::vector<std::string>{"x"});
  // No grant at all: the queue grows at the offered load.
  sim.step(100.0);
  CHECK(sim.queue_len("x") == doctest::Approx(0.05));
  Allocation a;
  a.lc["x"] = full_grant(server);
  sim.install(a);
  for (int i = 0; i < 10; ++i) sim.step(100.0);
  CHECK(sim.queue_len("x") == 0.0);
  CHECK(sim.is_present("late"));
  const Snapshot snap = sim.observe();
  CHECK(snap.find("late") != nullptr);
  CHECK(snap.at("x").qos_met);
  CHECK_FALSE(snap.all_lc_met());  // "late" has nothing
}

TEST_CASE("neighbor counters sum the other services") {
  const auto server = ServerSpec::preset("server1");
  Simulator sim(server, {lc("x", family(6), 0.4), lc("y", family(7), 0.4), be("b")});
  Allocation a;
  a.lc["x"] = {10, 6, 3};
  a.lc["y"] = {12, 7, 3};
  a.be_members = {"b"};
  a.be_pool = {14, 7, 4};
  sim.install(a);
  const Snapshot snap = sim.step(100.0);
  double cores = 0.0, mbl = 0.0;
  for (const auto& s : snap.services) {
    cores += s.counters.allocated_cores;
    mbl += s.counters.mbl_gbps;
  }
  for (const auto& s : snap.services) {
    CHECK(s.counters.neighbor_cores == doctest::Approx(cores - s.counters.allocated_cores));
    CHECK(s.counters.neighbor_mbl_gbps == doctest::Approx(mbl - s.counters.mbl_gbps));
  }
}

TEST_CASE("simulation is deterministic") {
  const auto server = ServerSpec::preset("server3");
  auto run = [&] {
    Simulator sim(server, {lc("x", family(8), 0.5), be("b")});
    Allocation a;
    a.lc["x"] = {20, 5, 5};
    a.be_members = {"b"};
    a.be_pool = {28, 6, 5};
    sim.install(a);
    std::vector<Snapshot> out;
    for (int i = 0; i < 20; ++i) out.push_back(sim.step(100.0));
    return out;
  };
  const auto a = run();
  const auto b = run();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].services == b[i].services);
}

TEST_CASE("probe leaves the simulator untouched") {
  const auto server = ServerSpec::preset("server1");
  Simulator sim(server, {lc("x", family(9), 0.5)});
  Allocation a;
  a.lc["x"] = {4, 4, 4};
  sim.install(a);
  const Snapshot before = sim.observe();
  const auto t = sim.probe("x", {30, 18, 10});
  CHECK(t.grant == Grant{30, 18, 10});
  CHECK(t.latency_ms <= before.at("x").latency_ms);
  CHECK(sim.observe().services == before.services);
}

// Independent oracle: cheapest satisfying cell by normalized resource cost.
TEST_CASE("oracle OAA matches a brute-force scan") {
  const auto server = ServerSpec::preset("server1");
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto s = family(seed);
    const double load = 0.3 + 0.02 * static_cast<double>(seed % 20);
    const double target = s.qos_target_ms();
    const OaaResult r = oracle_oaa_rcliff(s, server, load, target);
    int bc = 0, bw = 0;
    double best = 1e300;
    for (int c = 1; c <= server.n_cores; ++c) {
      for (int w = 1; w <= server.n_llc_ways; ++w) {
        if (s.latency_ms(server, {double(c), double(w), 10.0}, load) > target) continue;
        const double cost = double(c) / server.n_cores + double(w) / server.n_llc_ways;
        if (cost < best) {
          best = cost;
          bc = c;
          bw = w;
        }
      }
    }
    REQUIRE(r.feasible == (bc > 0));
    if (!r.feasible) continue;
    CHECK(r.oaa_cores == bc);
    CHECK(r.oaa_ways == bw);
    CHECK(s.latency_ms(server, {double(bc), double(bw), double(r.oaa_bw_units)}, load) <=
          target);
    if (r.oaa_bw_units > 1) {
      CHECK(s.latency_ms(server, {double(bc), double(bw), double(r.oaa_bw_units - 1)}, load) >
            target);
    }
    if (r.rcliff_cores != r.oaa_cores || r.rcliff_ways != r.oaa_ways) {
      CHECK(s.latency_ms(server, {double(r.rcliff_cores), double(r.rcliff_ways), 10.0}, load) >
            target);
    }
  }
}

TEST_CASE("infeasible targets report no OAA") {
  const auto server = ServerSpec::preset("server1");
  const auto s = family(11);
  const OaaResult r = oracle_oaa_rcliff(s, server, 1.0, 1e-9);
  CHECK_FALSE(r.feasible);
  CHECK_THROWS_AS(oracle_oaa_rcliff(s, server, 0.0, 10.0), Error);
}

TEST_CASE("moses surface has a cliff") {
  const auto server = ServerSpec::preset("server1");
  CHECK(max_adjacent_latency_ratio(LatencySurface::moses(), server,
                                   LatencySurface::kMosesReferenceLoad) >= 10.0);
}

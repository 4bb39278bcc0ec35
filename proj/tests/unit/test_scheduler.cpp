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

#include "../support/deprivation_oracle.hpp"
#include "../support/safety_fuzz.hpp"
#include "cosched/error.hpp"
#include "cosched/scheduler.hpp"
#include "doctest.h"

using namespace cosched;
using namespace cosched::testing;

TEST_CASE("deprivation agrees with exhaustive search") {
  int victim_plans = 0;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const auto inst = random_deprivation_instance(seed);
    CHECK_MESSAGE(compare_with_brute_force(inst).empty(), "seed ", seed, ": ",
                  compare_with_brute_force(inst));
    const auto plan = plan_deprivation(inst.alloc, inst.snap, inst.request, inst.qos, inst.config);
    if (plan.kind == PlanKind::kVictims) ++victim_plans;
  }
  CHECK(victim_plans >= 10);
}

TEST_CASE("best-effort pool is drained before any victim") {
  auto inst = random_deprivation_instance(3);
  inst.alloc.be_members = {"be"};
  inst.alloc.be_pool = {10, 10, 1};
  inst.request = {"req", 2, 1};
  const auto plan = plan_deprivation(inst.alloc, inst.snap, inst.request, inst.qos, inst.config);
  CHECK(plan.kind == PlanKind::kBestEffort);
  CHECK(plan.be_cores == 2);
  CHECK(plan.be_ways == 1);
  Allocation a = inst.alloc;
  apply_plan(a, plan, "req");
  CHECK(a.lc["req"] == Grant{3, 2, 1});
  CHECK(a.be_pool == Grant{8, 9, 1});
  CHECK_THROWS_AS(plan_deprivation(inst.alloc, inst.snap, {"req", 0, 0}, inst.qos, inst.config),
                  Error);
  CHECK_THROWS_AS(apply_plan(a, DeprivationPlan{}, "req"), Error);
}

TEST_CASE("sharing is the fallback when no victim set fits") {
  DeprivationInstance inst;
  inst.alloc.lc["req"] = {1, 1, 1};
  inst.alloc.lc["big"] = {4, 4, 1};
  for (const char* id : {"req", "big"}) {
    inst.snap.services.push_back({});
    inst.snap.services.back().id = id;
  }
  // Any deprivation pushes "big" past its target; halving stays under the cap.
  inst.qos.params["big"] = {0.99, 1.0, 1.0, 4.0, 4.0};
  inst.request = {"req", 2, 0};
  const auto plan = plan_deprivation(inst.alloc, inst.snap, inst.request, inst.qos, inst.config);
  REQUIRE(plan.kind == PlanKind::kSharing);
  CHECK(plan.sharing->owner == "big");
  CHECK(plan.sharing->cores == 2);
  Allocation a = inst.alloc;
  apply_plan(a, plan, "req");
  CHECK(a.effective("req").cores == 2.0);
  CHECK(a.effective("big").cores == 3.0);
  inst.config.sharing.allow = false;
  CHECK(plan_deprivation(inst.alloc, inst.snap, inst.request, inst.qos, inst.config).kind ==
        PlanKind::kInfeasible);
}

TEST_CASE("random action sequences keep every partition rule") {
  const FuzzReport rep = fuzz_action_sequences(1, 300, 10);
  CHECK(rep.actions == 3000);
  CHECK(rep.applied > 500);
  CHECK(rep.victims_taken > 0);
  for (const auto& f : rep.failures) FAIL_CHECK(f);
}

TEST_CASE("scheduler rollbacks restore the prior grants") {
  const FuzzReport rep = fuzz_scheduler_rollbacks(1, 20, 60);
  CHECK(rep.rollbacks > 0);
  for (const auto& f : rep.failures) FAIL_CHECK(f);
}

TEST_CASE("rolled-back and infeasible actions are withheld from the same allocation") {
  int rollbacks = 0, infeasible = 0;
  const std::string rollback_prefix = "rollback ";
  const std::string infeasible_suffix = " (infeasible)";
  for (std::uint64_t r = 0; r < 20; ++r) {
    std::mt19937_64 rng(31 + r);
    const ServerSpec server = ServerSpec::preset("server1");
    Simulator sim(server, random_colocation(rng, 3, true));
    const ModelA model_a(server, 100 + r);
    const GroundTruthPredictor qos(sim);
    AgentConfig ac;
    ac.seed = 200 + r;
    ac.noise_sigma = 3.0;
    ac.batch_size = 8;
    Agent agent(ac);
    OsmlConfig oc;
    oc.explore = true;
    OsmlScheduler sched({&model_a, &qos, &agent, NormalizationSpec::derive(server)}, oc);
    DecisionLog log;
    Snapshot snap = sim.observe();
    for (int t = 0; t < 80; ++t) {
      sched.on_tick(sim, snap, log);
      const auto& recs = log.records();
      // Only a tick that ends on the record leaves that allocation installed.
      if (recs.empty() || recs.back().t_ms != snap.t_ms) {
        snap = sim.step(100.0);
        continue;
      }
      const std::string& act = recs.back().action;
      std::string name;
      if (recs.back().rollback) {
        name = act.substr(rollback_prefix.size());
        ++rollbacks;
      } else if (act.ends_with(infeasible_suffix) && act != "idle" + infeasible_suffix) {
        name = act.substr(0, act.size() - infeasible_suffix.size());
        ++infeasible;
      }
      if (!name.empty()) {
        for (int i = 0; i < kActionCount; ++i) {
          if (action_name(static_cast<SchedulingAction>(i)) != name) continue;
          for (EventKind why : {EventKind::kQosViolation, EventKind::kOverProvision}) {
            CHECK_FALSE(sched.allowed_actions(sim.allocation(), recs.back().service,
                                              why)[static_cast<std::size_t>(i)]);
          }
        }
      }
      snap = sim.step(100.0);
    }
  }
  CHECK(rollbacks > 0);
  CHECK(infeasible > 0);
}

TEST_CASE("idle sweep feeds only the best-effort pool") {
  const auto server = ServerSpec::preset("server1");
  Allocation a;
  a.lc["x"] = {4, 4, 4};
  sweep_idle_to_be(a, server);
  CHECK(a.be_pool.is_zero());
  a.be_members = {"b"};
  sweep_idle_to_be(a, server);
  CHECK(a.be_pool == Grant{32, 16, 6});
  CHECK(a.idle(server).is_zero());
}

TEST_CASE("decision log JSONL round-trip") {
  DecisionLog log;
  log.add({100.0, "osml+", "new_lc", "lc0", "alg1", "grant 3c/2w/1b",
           {{"be_pool", {30, 18, 9}}}, {{"be_pool", {27, 16, 8}}, {"lc0", {3, 2, 1}}},
           std::nullopt, false, ""});
  log.add({200.0, "osml+", "qos_violation", "lc0", "alg2", "rollback cores-1", {}, {}, 2.25, true,
           "note \"quoted\""});
  const DecisionLog back = DecisionLog::parse_jsonl(log.to_jsonl());
  CHECK(back.records() == log.records());
  CHECK(back.to_jsonl() == log.to_jsonl());
  CHECK_THROWS_AS(DecisionLog::parse_jsonl("{\"t_ms\": 1}\n"), Error);
}

namespace {

struct Fixture {
  ServerSpec server = ServerSpec::preset("server1");
  std::vector<ServiceSpec> services;
  Fixture() {
    std::mt19937_64 rng(5);
    services = random_colocation(rng, 2, true);
    services[1].arrival_ms = 300.0;
    services[1].load_schedule.front().t_ms = 300.0;
  }
};

}  // namespace

TEST_CASE("monitor reports arrivals and violations in order") {
  Fixture f;
  Simulator sim(f.server, f.services);
  const ModelA model_a(f.server, 1);
  const GroundTruthPredictor qos(sim);
  Agent agent;
  OsmlScheduler sched({&model_a, &qos, &agent, NormalizationSpec::derive(f.server)});
  auto events = sched.monitor(sim, sim.observe());
  REQUIRE(events.size() == 2);
  CHECK(events[0].kind == EventKind::kNewBe);
  CHECK(events[0].service_id == "be0");
  CHECK(events[1].kind == EventKind::kNewLc);
  CHECK(events[1].service_id == "lc0");

  DecisionLog log;
  Snapshot snap = sim.observe();
  sched.on_tick(sim, snap, log);
  CHECK(sim.allocation().lc.count("lc0") == 1);
  CHECK(sim.allocation().has_be("be0"));
  CHECK(sim.allocation().idle(f.server).is_zero());
  CHECK(sched.oaa_reference().count("lc0") == 1);
  REQUIRE(log.records().size() >= 2);
  CHECK(log.records()[0].event == "new_be");
  CHECK(log.records()[1].algorithm.rfind("alg1", 0) == 0);

  for (int i = 0; i < 4; ++i) {
    snap = sim.step(100.0);
    sched.on_tick(sim, snap, log);
  }
  CHECK(sim.allocation().lc.count("lc1") == 1);
}

TEST_CASE("scheduler needs all of its models") {
  const ModelA model_a(ServerSpec::preset("server1"), 1);
  CHECK_THROWS_AS(OsmlScheduler({&model_a, nullptr, nullptr,
                                 NormalizationSpec::derive(ServerSpec::preset("server1"))}),
                  Error);
}

TEST_CASE("ground truth predictor matches the surface") {
  Fixture f;
  Simulator sim(f.server, f.services);
  Allocation a;
  a.lc["lc0"] = {6, 6, 5};
  sim.install(a);
  const Snapshot snap = sim.step(100.0);
  const GroundTruthPredictor qos(sim);
  const auto& spec = sim.service("lc0");
  const double lat = spec.surface.latency_ms(f.server, {10, 8, 5}, snap.at("lc0").load);
  const auto p = qos.predict(snap, "lc0", {10, 8, 5});
  CHECK(p.predicted_qos == doctest::Approx(std::min(10.0, lat / spec.qos_target_ms())));
  CHECK(p.met == (lat <= spec.qos_target_ms()));
}

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
#include "cosched/scheduler.hpp"

namespace cosched {
namespace {

bool dominates(const Grant& g, const Grant& ref) {
  return g.covers(ref) && !(g == ref);
}

std::array<double, kResourceKinds> lc_usage(const Allocation& a) {
  Grant total;
  for (const auto& [id, g] : a.lc) total += g;
  return {double(total.cores), double(total.ways), double(total.bw_units)};
}

std::array<double, kResourceKinds> limits(const ServerSpec& s) {
  return {double(s.n_cores), double(s.n_llc_ways), double(s.mem_bw_units)};
}

}  // namespace

OsmlScheduler::OsmlScheduler(OsmlModels models, OsmlConfig config)
    : models_(std::move(models)), config_(config) {
  if (!models_.model_a || !models_.qos || !models_.agent) {
    throw Error(ErrorCode::kConfig, "scheduler needs all three models");
  }
  models_.norm.validate();
}

std::vector<SchedulerEvent> OsmlScheduler::monitor(const Simulator& sim,
                                                   const Snapshot& snap) const {
  const Allocation& alloc = sim.allocation();
  std::vector<SchedulerEvent> events;
  for (const auto& t : snap.services) {
    if (t.kind == ServiceKind::kBestEffort) {
      if (!alloc.has_be(t.id)) events.push_back({EventKind::kNewBe, t.id, snap.t_ms});
      continue;
    }
    auto it = alloc.lc.find(t.id);
    if (it == alloc.lc.end()) {
      events.push_back({EventKind::kNewLc, t.id, snap.t_ms});
    } else if (!t.qos_met) {
      events.push_back({EventKind::kQosViolation, t.id, snap.t_ms});
    } else if (auto ref = oaa_ref_.find(t.id);
               ref != oaa_ref_.end() && dominates(it->second, ref->second)) {
      events.push_back({EventKind::kOverProvision, t.id, snap.t_ms});
    }
  }
  std::sort(events.begin(), events.end(), [](const SchedulerEvent& a, const SchedulerEvent& b) {
    if (a.t_ms != b.t_ms) return a.t_ms < b.t_ms;
    if (a.service_id != b.service_id) return a.service_id < b.service_id;
    return a.kind < b.kind;
  });
  return events;
}

Grant OsmlScheduler::query_target(const ServiceTelemetry& tel) const {
  const auto x = extract(tel, ModelKind::kA, models_.norm);
  const OaaPrediction p = models_.model_a->predict(x);
  Grant g = p.oaa_grant();
  if (config_.allocate_at_rcliff) {
    g.cores = static_cast<int>(p.rcliff_cores);
    g.ways = static_cast<int>(p.rcliff_ways);
  }
  return g;
}

void OsmlScheduler::refresh_oaa(const Snapshot& snap) {
  for (auto& [id, load] : oaa_load_) {
    const ServiceTelemetry* t = snap.find(id);
    if (!t || t->load == load) continue;
    oaa_ref_[id] = query_target(*t);
    load = t->load;
  }
}

void OsmlScheduler::handle_new_lc(Simulator& sim, const Snapshot& snap, const std::string& id,
                                  DecisionLog& log) {
  const ServerSpec& server = sim.server();
  Allocation alloc = sim.allocation();
  const Grant probe_grant = alloc.idle(server) + alloc.be_pool;
  DecisionRecord rec{snap.t_ms, std::string(name()), "new_lc", id, "alg1", "allocate",
                     grants_of(alloc), {}, std::nullopt, false, ""};
  if (probe_grant.cores < 1 || probe_grant.ways < 1 || probe_grant.bw_units < 1) {
    if (queued_.insert(id).second) {
      rec.action = "queue";
      rec.note = "no idle or best-effort resources to probe on";
      rec.after = rec.before;
      log.add(std::move(rec));
    }
    return;
  }
  queued_.erase(id);

  const ServiceTelemetry tel = sim.probe(id, probe_grant);
  const Grant target = query_target(tel);
  oaa_ref_[id] = target;
  oaa_load_[id] = tel.load;

  const Grant idle = alloc.idle(server);
  Grant& g = alloc.lc[id];
  g.cores = std::min(target.cores, idle.cores);
  g.ways = std::min(target.ways, idle.ways);
  const int short_cores = target.cores - g.cores;
  const int short_ways = target.ways - g.ways;
  if (short_cores > 0 || short_ways > 0) {
    rec.algorithm = "alg1+alg3";
    const DeprivationPlan plan = plan_deprivation(
        alloc, snap, {id, short_cores, short_ways}, *models_.qos, config_.deprivation);
    if (plan.kind == PlanKind::kInfeasible) {
      rec.note = "shortfall <" + std::to_string(short_cores) + "," +
                 std::to_string(short_ways) + "> infeasible; granted idle only";
    } else {
      apply_plan(alloc, plan, id);
      rec.note = "shortfall <" + std::to_string(short_cores) + "," +
                 std::to_string(short_ways) + "> via " + std::string(plan_kind_name(plan.kind));
      if (plan.kind == PlanKind::kSharing) {
        rec.note += "; partner slowdown " + std::to_string(plan.sharing_slowdown) +
                    " reported upward";
      }
    }
  }
  Grant& granted = alloc.lc[id];
  if (granted.cores < 1 && !alloc.be_members.empty() && alloc.be_pool.cores >= 1) {
    alloc.be_pool.cores -= 1;
    granted.cores += 1;
  }
  const int bw_from_idle = std::min(target.bw_units, alloc.idle(server).bw_units);
  granted.bw_units += bw_from_idle;
  const int bw_from_be = std::min(target.bw_units - granted.bw_units, alloc.be_pool.bw_units);
  granted.bw_units += bw_from_be;
  alloc.be_pool.bw_units -= bw_from_be;
  if (granted.bw_units < 1) {
    std::string donor;
    int most = 1;
    for (const auto& [other, og] : alloc.lc) {
      if (other != id && og.bw_units > most) {
        most = og.bw_units;
        donor = other;
      }
    }
    if (!donor.empty()) {
      alloc.lc[donor].bw_units -= 1;
      granted.bw_units = 1;
    }
  }
  if (granted.cores < 1 || granted.ways < 1 || granted.bw_units < 1) {
    queued_.insert(id);
    rec.action = "queue";
    rec.note += rec.note.empty() ? "" : "; ";
    rec.note += "could not assemble a minimal grant";
    rec.after = rec.before;
    log.add(std::move(rec));
    return;
  }
  sim.install(alloc);
  rec.after = grants_of(alloc);
  rec.action = "grant " + std::to_string(granted.cores) + "c/" + std::to_string(granted.ways) +
               "w/" + std::to_string(granted.bw_units) + "b";
  log.add(std::move(rec));
}

void OsmlScheduler::handle_new_be(Simulator& sim, const Snapshot& snap, const std::string& id,
                                  DecisionLog& log) {
  Allocation alloc = sim.allocation();
  DecisionRecord rec{snap.t_ms, std::string(name()), "new_be", id, "alg1", "", grants_of(alloc),
                     {}, std::nullopt, false, ""};
  if (alloc.be_members.empty()) {
    alloc.be_pool = alloc.idle(sim.server());
    rec.action = "map to idle";
  } else {
    rec.action = "share best-effort pool";
  }
  alloc.be_members.push_back(id);
  sim.install(alloc);
  rec.after = grants_of(alloc);
  log.add(std::move(rec));
}

void OsmlScheduler::shepherd(Simulator& sim, const Snapshot& snap, const std::string& id,
                             EventKind why, DecisionLog& log) {
  Agent& agent = *models_.agent;
  const auto state = extract(snap, id, ModelKind::kC, models_.norm);
  const Allocation before = sim.allocation();
  const ActionMask mask = allowed_actions(before, id, why);
  const ActionChoice choice = agent.select_action(state, config_.explore, mask);
  const ActionOutcome outcome =
      resolve_action(sim, snap, id, choice.action, *models_.qos, config_.deprivation);

  Pending p;
  p.service = id;
  p.state = state;
  p.probabilities = choice.probabilities;
  p.mask = mask;
  p.action = choice.action;
  p.applied = outcome.applied && choice.action != SchedulingAction::kIdle;
  p.before = before;
  p.met_before[id] = snap.at(id).qos_met;
  for (const auto& v : outcome.victims) {
    if (const auto* t = snap.find(v)) p.met_before[v] = t->qos_met;
  }
  const EffectiveGrant expected = outcome.next.effective(id);
  p.indicator = models_.qos->predict(snap, id, expected).met;

  DecisionRecord rec{snap.t_ms, std::string(name()), std::string(event_name(why)), id, "alg2",
                     std::string(action_name(choice.action)), grants_of(before), {},
                     std::nullopt, false, outcome.note};
  if (outcome.applied) {
    sim.install(outcome.next);
  } else {
    rec.action += " (infeasible)";
    if (choice.action != SchedulingAction::kIdle) withdraw(id, choice.action, before);
  }
  rec.after = grants_of(sim.allocation());
  log.add(std::move(rec));
  pending_ = std::move(p);
}

ActionMask OsmlScheduler::allowed_actions(const Allocation& alloc, const std::string& id,
                                          EventKind why) const {
  ActionMask m = shepherd_actions(why == EventKind::kQosViolation);
  if (auto it = withdrawn_.find(id); it != withdrawn_.end()) {
    for (const auto& w : it->second) {
      if (w.from == alloc) m[static_cast<std::size_t>(w.action)] = false;
    }
  }
  return m;
}

void OsmlScheduler::withdraw(const std::string& id, SchedulingAction action,
                             const Allocation& from) {
  auto& withdrawn = withdrawn_[id];
  std::erase_if(withdrawn, [&](const Withdrawn& w) { return !(w.from == from); });
  withdrawn.push_back({action, from});
}

bool OsmlScheduler::settle_pending(Simulator& sim, const Snapshot& snap, DecisionLog& log) {
  if (!pending_) return false;
  Pending p = std::move(*pending_);
  pending_.reset();
  if (!snap.find(p.service)) return false;

  std::vector<double> lat, tgt;
  for (const auto& t : snap.services) {
    if (t.kind != ServiceKind::kLatencyCritical || !sim.allocation().lc.count(t.id)) continue;
    lat.push_back(t.latency_ms);
    tgt.push_back(t.qos_target_ms);
  }
  const double reward = lat.empty() ? 0.0
                                    : compute_reward(p.indicator, lat, tgt,
                                                     lc_usage(sim.allocation()),
                                                     limits(sim.server()));
  Agent& agent = *models_.agent;
  agent.remember({p.state, p.probabilities, reward,
                  extract(snap, p.service, ModelKind::kC, models_.norm), p.mask,
                  shepherd_actions(!snap.at(p.service).qos_met)});
  if (config_.online_learning) agent.update();

  bool broke = false;
  for (const auto& [id, was_met] : p.met_before) {
    const auto* t = snap.find(id);
    if (was_met && t && !t->qos_met) broke = true;
  }
  if (!broke || !p.applied) return false;

  DecisionRecord rec{snap.t_ms, std::string(name()), "qos_violation", p.service, "alg2",
                     "rollback " + std::string(action_name(p.action)),
                     grants_of(sim.allocation()), {}, reward, true, ""};
  sim.install(p.before);
  rec.after = grants_of(sim.allocation());
  withdraw(p.service, p.action, p.before);
  const Grant d = action_delta(p.action);
  if (d.cores + d.ways + d.bw_units < 0) {
    oaa_ref_[p.service] = p.before.lc.at(p.service);
    rec.note = "allocation reference reset to the restored grant";
  }
  log.add(std::move(rec));
  return true;
}

void OsmlScheduler::on_tick(Simulator& sim, const Snapshot& snap, DecisionLog& log) {
  const bool rolled_back = settle_pending(sim, snap, log);

  for (const auto& e : monitor(sim, snap)) {
    if (e.kind == EventKind::kNewLc) handle_new_lc(sim, snap, e.service_id, log);
    if (e.kind == EventKind::kNewBe) handle_new_be(sim, snap, e.service_id, log);
  }
  refresh_oaa(snap);

  if (!rolled_back) {
    // Worst violation first, then over-provisioned services; the first one
    // with an action left is shepherded.
    std::vector<std::pair<double, SchedulerEvent>> candidates;
    for (const auto& e : monitor(sim, snap)) {
      const ServiceTelemetry& t = snap.at(e.service_id);
      // Services granted this tick have no telemetry for their grant yet.
      auto current = sim.allocation().lc.find(t.id);
      if (current == sim.allocation().lc.end() || !(current->second == t.grant)) continue;
      if (e.kind == EventKind::kQosViolation) {
        candidates.push_back({t.latency_ms / t.qos_target_ms, e});
      } else if (e.kind == EventKind::kOverProvision) {
        candidates.push_back({0.0, e});
      }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (const auto& [ratio, e] : candidates) {
      const ActionMask m = allowed_actions(sim.allocation(), e.service_id, e.kind);
      if (std::none_of(m.begin(), m.end(), [](bool b) { return b; })) continue;
      shepherd(sim, snap, e.service_id, e.kind, log);
      break;
    }
  }

  Allocation alloc = sim.allocation();
  const Allocation swept = [&] {
    Allocation a = alloc;
    sweep_idle_to_be(a, sim.server());
    return a;
  }();
  if (!(swept == alloc)) sim.install(swept);
}

}  // namespace cosched

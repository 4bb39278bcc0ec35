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
#include <sstream>

#include "cosched/error.hpp"
#include "cosched/scheduler.hpp"
#include "json.hpp"

namespace cosched {
namespace {

using ojson = nlohmann::ordered_json;

ojson grants_json(const std::map<std::string, Grant>& m) {
  ojson j = ojson::object();
  for (const auto& [id, g] : m) j[id] = {g.cores, g.ways, g.bw_units};
  return j;
}

std::map<std::string, Grant> grants_from(const nlohmann::json& j) {
  std::map<std::string, Grant> m;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& a = it.value();
    m[it.key()] = {a.at(0).get<int>(), a.at(1).get<int>(), a.at(2).get<int>()};
  }
  return m;
}

int& component(Grant& g, int which) {
  return which == 0 ? g.cores : (which == 1 ? g.ways : g.bw_units);
}

}  // namespace

std::string_view event_name(EventKind k) {
  switch (k) {
    case EventKind::kNewLc: return "new_lc";
    case EventKind::kNewBe: return "new_be";
    case EventKind::kQosViolation: return "qos_violation";
    case EventKind::kOverProvision: return "over_provision";
  }
  return "?";
}

std::string DecisionLog::to_jsonl() const {
  std::string out;
  for (const auto& r : records_) {
    ojson j;
    j["t_ms"] = r.t_ms;
    j["scheduler"] = r.scheduler;
    j["event"] = r.event;
    j["service"] = r.service;
    j["algorithm"] = r.algorithm;
    j["action"] = r.action;
    j["before"] = grants_json(r.before);
    j["after"] = grants_json(r.after);
    j["reward"] = r.reward ? ojson(*r.reward) : ojson(nullptr);
    j["rollback"] = r.rollback;
    j["note"] = r.note;
    out += j.dump();
    out += '\n';
  }
  return out;
}

DecisionLog DecisionLog::parse_jsonl(const std::string& text) {
  DecisionLog log;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      DecisionRecord r;
      r.t_ms = j.at("t_ms").get<double>();
      r.scheduler = j.at("scheduler").get<std::string>();
      r.event = j.at("event").get<std::string>();
      r.service = j.at("service").get<std::string>();
      r.algorithm = j.at("algorithm").get<std::string>();
      r.action = j.at("action").get<std::string>();
      r.before = grants_from(j.at("before"));
      r.after = grants_from(j.at("after"));
      if (!j.at("reward").is_null()) r.reward = j.at("reward").get<double>();
      r.rollback = j.at("rollback").get<bool>();
      r.note = j.at("note").get<std::string>();
      log.add(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kIo, "decision log line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return log;
}

std::map<std::string, Grant> grants_of(const Allocation& a) {
  std::map<std::string, Grant> m = a.lc;
  if (!a.be_members.empty()) m["be_pool"] = a.be_pool;
  return m;
}

ModelBPredictor::ModelBPredictor(const ModelB& model, NormalizationSpec norm)
    : model_(model), norm_(std::move(norm)), way_mb_(model.server().way_mb) {}

QosPrediction ModelBPredictor::predict(const Snapshot& snap, const std::string& id,
                                       const EffectiveGrant& expected) const {
  const auto x = extract(snap, id, ModelKind::kB, norm_,
                         ExpectedGrant{expected.cores, expected.ways * way_mb_});
  return model_.predict(x);
}

QosPrediction GroundTruthPredictor::predict(const Snapshot& snap, const std::string& id,
                                            const EffectiveGrant& expected) const {
  const ServiceSpec& spec = sim_.service(id);
  const double load = snap.at(id).load;
  const double lat = spec.surface.latency_ms(sim_.server(), expected, load, 0.0);
  const double ratio = std::min(ModelB::kRatioCap, lat / spec.qos_target_ms());
  return {ratio, ratio <= 1.0};
}

void sweep_idle_to_be(Allocation& alloc, const ServerSpec& server) {
  if (alloc.be_members.empty()) return;
  alloc.be_pool += alloc.idle(server);
}

ActionOutcome resolve_action(const Simulator& sim, const Snapshot& snap, const std::string& id,
                             SchedulingAction action, const QosPredictor& qos,
                             const DeprivationConfig& config) {
  ActionOutcome out;
  out.next = sim.allocation();
  Allocation& next = out.next;
  if (!next.lc.count(id)) {
    out.note = "service holds no grant";
    return out;
  }
  if (action == SchedulingAction::kIdle) {
    out.applied = true;
    return out;
  }
  const Grant delta = action_delta(action);
  const int which = delta.cores != 0 ? 0 : (delta.ways != 0 ? 1 : 2);
  const bool up = delta.cores + delta.ways + delta.bw_units > 0;
  const ServerSpec& server = sim.server();

  if (!up) {
    Grant lent;
    for (const auto& p : next.sharing) {
      if (p.owner == id) lent += Grant{p.cores, p.ways, 0};
    }
    Grant& g = next.lc[id];
    if (component(g, which) <= 1 || component(g, which) - 1 < component(lent, which)) {
      out.note = "already at the minimum";
      return out;
    }
    component(g, which) -= 1;
    out.applied = true;
    return out;
  }

  Grant idle = next.idle(server);
  if (component(idle, which) >= 1) {
    component(next.lc[id], which) += 1;
    out.applied = true;
  } else if (which == 2) {
    if (next.be_pool.bw_units >= 1) {
      next.be_pool.bw_units -= 1;
      next.lc[id].bw_units += 1;
      out.applied = true;
    } else {
      std::string donor;
      int most = 1;
      for (const auto& [other, g] : next.lc) {
        if (other != id && g.bw_units > most) {
          most = g.bw_units;
          donor = other;
        }
      }
      if (donor.empty()) {
        out.note = "no bandwidth to take";
        return out;
      }
      next.lc[donor].bw_units -= 1;
      next.lc[id].bw_units += 1;
      out.victims.push_back(donor);
      out.applied = true;
    }
  } else {
    const DeprivationRequest req{id, which == 0 ? 1 : 0, which == 1 ? 1 : 0};
    const DeprivationPlan plan = plan_deprivation(next, snap, req, qos, config);
    if (plan.kind == PlanKind::kInfeasible) {
      out.note = "deprivation infeasible";
      return out;
    }
    apply_plan(next, plan, id);
    for (const auto& v : plan.victims) out.victims.push_back(v.id);
    if (plan.sharing) out.victims.push_back(plan.sharing->owner);
    out.note = std::string("deprivation: ") + std::string(plan_kind_name(plan.kind));
    out.applied = true;
  }
  try {
    next.validate(server);
  } catch (const Error& e) {
    out.applied = false;
    out.note = e.what();
    out.next = sim.allocation();
  }
  return out;
}

}  // namespace cosched

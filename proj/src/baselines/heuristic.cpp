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
#include <limits>

#include "cosched/baselines.hpp"

namespace cosched {
namespace {

int& component(Grant& g, int which) {
  return which == 0 ? g.cores : (which == 1 ? g.ways : g.bw_units);
}

int total_of(const ServerSpec& s, int which) {
  return which == 0 ? s.n_cores : (which == 1 ? s.n_llc_ways : s.mem_bw_units);
}

const char* resource_name(int which) {
  return which == 0 ? "cores" : (which == 1 ? "ways" : "bw");
}

double ratio(const ServiceTelemetry& t) { return t.latency_ms / t.qos_target_ms; }

// Moves one unit of `which` to `to`: idle first, then the BE pool, then the
// QoS-met LC with the most slack. Returns the source, or "" if none.
std::string take_unit(Allocation& a, const Snapshot& snap, const ServerSpec& server,
                      const std::string& to, int which) {
  Grant idle = a.idle(server);
  if (component(idle, which) >= 1) {
    component(a.lc[to], which) += 1;
    return "idle";
  }
  if (!a.be_members.empty() && component(a.be_pool, which) >= 1) {
    component(a.be_pool, which) -= 1;
    component(a.lc[to], which) += 1;
    return "be_pool";
  }
  std::string donor;
  double slack = std::numeric_limits<double>::infinity();
  for (auto& [id, g] : a.lc) {
    if (id == to || component(g, which) < 2) continue;
    const ServiceTelemetry* t = snap.find(id);
    if (!t || !t->qos_met) continue;
    if (ratio(*t) < slack) {
      slack = ratio(*t);
      donor = id;
    }
  }
  if (donor.empty()) return "";
  component(a.lc[donor], which) -= 1;
  component(a.lc[to], which) += 1;
  return donor;
}

}  // namespace

HeuristicScheduler::HeuristicScheduler(HeuristicConfig config) : config_(config) {}

void HeuristicScheduler::on_tick(Simulator& sim, const Snapshot& snap, DecisionLog& log) {
  if (snap.t_ms + 1e-9 < next_ms_) return;
  next_ms_ = snap.t_ms + config_.interval_ms;
  step(sim, snap, log);
}

void HeuristicScheduler::equal_partition(Simulator& sim, const Snapshot& snap,
                                         DecisionLog& log) {
  const ServerSpec& server = sim.server();
  Allocation a;
  std::vector<std::string> lc;
  for (const auto& t : snap.services) {
    if (t.kind == ServiceKind::kLatencyCritical) {
      lc.push_back(t.id);
    } else {
      a.be_members.push_back(t.id);
    }
  }
  const bool be = !a.be_members.empty();
  const int shares = static_cast<int>(lc.size()) + (be ? 1 : 0);
  if (shares == 0) return;
  for (int which = 0; which < 3; ++which) {
    const int total = total_of(server, which);
    const int each = total / shares;
    int rest = total - each * shares;
    for (const auto& id : lc) {
      component(a.lc[id], which) = each + (!be && rest > 0 ? 1 : 0);
      if (!be && rest > 0) --rest;
    }
    if (be) component(a.be_pool, which) = each + rest;
  }
  const Allocation before = sim.allocation();
  sim.install(a);
  log.add({snap.t_ms, std::string(name()), "start", "*", "heuristic", "equal partition",
           grants_of(before), grants_of(a), std::nullopt, false, ""});
}

void HeuristicScheduler::admit(Simulator& sim, const Snapshot& snap, DecisionLog& log) {
  const ServerSpec& server = sim.server();
  for (const auto& t : snap.services) {
    Allocation a = sim.allocation();
    if (t.kind == ServiceKind::kBestEffort) {
      if (a.has_be(t.id)) continue;
      if (a.be_members.empty()) a.be_pool = a.idle(server);
      a.be_members.push_back(t.id);
    } else {
      if (a.lc.count(t.id)) continue;
      const int shares = static_cast<int>(a.lc.size()) + 1 + (a.be_members.empty() ? 0 : 1);
      a.lc[t.id] = {};
      for (int which = 0; which < 3; ++which) {
        const int want = std::max(1, total_of(server, which) / shares);
        for (int k = 0; k < want; ++k) {
          if (take_unit(a, snap, server, t.id, which).empty()) break;
        }
      }
    }
    const Allocation before = sim.allocation();
    sim.install(a);
    log.add({snap.t_ms, std::string(name()), t.kind == ServiceKind::kBestEffort ? "new_be" : "new_lc",
             t.id, "heuristic", "admit with equal share", grants_of(before), grants_of(a),
             std::nullopt, false, ""});
  }
}

bool HeuristicScheduler::step(Simulator& sim, const Snapshot& snap, DecisionLog& log) {
  if (!partitioned_) {
    equal_partition(sim, snap, log);
    partitioned_ = true;
    return true;
  }
  const std::size_t logged = log.records().size();
  admit(sim, snap, log);
  if (log.records().size() != logged) return true;

  const Allocation& current = sim.allocation();
  const ServiceTelemetry* worst = nullptr;
  for (const auto& t : snap.services) {
    if (t.kind != ServiceKind::kLatencyCritical || t.qos_met || !current.lc.count(t.id)) continue;
    if (!worst || ratio(t) > ratio(*worst)) worst = &t;
  }
  if (!worst) {
    last_service_.clear();
    return false;
  }
  const double r = ratio(*worst);
  if (worst->id != last_service_) {
    dim_ = 0;
  } else if (!(r <= last_ratio_ * (1.0 - config_.improvement_threshold))) {
    dim_ = (dim_ + 1) % 3;
  }

  Allocation a = current;
  for (int k = 0; k < 3; ++k) {
    const int slot = (dim_ + k) % 3;
    const int which = config_.priority[static_cast<std::size_t>(slot)];
    const std::string source = take_unit(a, snap, sim.server(), worst->id, which);
    if (source.empty()) continue;
    const Allocation before = sim.allocation();
    sim.install(a);
    dim_ = slot;
    last_service_ = worst->id;
    last_ratio_ = r;
    log.add({snap.t_ms, std::string(name()), "qos_violation", worst->id, "heuristic",
             std::string(resource_name(which)) + "+1", grants_of(before), grants_of(a),
             std::nullopt, false, "from " + source});
    return true;
  }
  return false;
}

}  // namespace cosched

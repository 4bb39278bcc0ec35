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
#include <tuple>

#include "cosched/error.hpp"
#include "cosched/scheduler.hpp"

namespace cosched {
namespace {

Grant lent_by(const Allocation& alloc, const std::string& id) {
  Grant lent;
  for (const auto& p : alloc.sharing) {
    if (p.owner == id) lent += Grant{p.cores, p.ways, 0};
  }
  return lent;
}

EffectiveGrant minus(EffectiveGrant e, double cores, double ways) {
  e.cores -= cores;
  e.ways -= ways;
  return e;
}

struct Candidate {
  double total = 0.0;
  std::vector<Victim> victims;
};

// Ordering on (total slowdown, victim count, ids, per-victim (m, n)).
bool better(const Candidate& a, const Candidate& b) {
  if (a.total != b.total) return a.total < b.total;
  if (a.victims.size() != b.victims.size()) return a.victims.size() < b.victims.size();
  for (std::size_t i = 0; i < a.victims.size(); ++i) {
    if (a.victims[i].id != b.victims[i].id) return a.victims[i].id < b.victims[i].id;
  }
  for (std::size_t i = 0; i < a.victims.size(); ++i) {
    const auto ka = std::tie(a.victims[i].cores, a.victims[i].ways);
    const auto kb = std::tie(b.victims[i].cores, b.victims[i].ways);
    if (ka != kb) return ka < kb;
  }
  return false;
}

const Victim* lookup(const NeighborOptions& o, int m, int n) {
  if (m < 0 || n < 0 || m > o.max_cores || n > o.max_ways) return nullptr;
  const auto& v = o.at(m, n);
  return v ? &*v : nullptr;
}

}  // namespace

std::string_view plan_kind_name(PlanKind k) {
  switch (k) {
    case PlanKind::kBestEffort: return "best_effort";
    case PlanKind::kVictims: return "victims";
    case PlanKind::kSharing: return "sharing";
    case PlanKind::kInfeasible: return "infeasible";
  }
  return "?";
}

std::vector<NeighborOptions> score_neighbors(const Allocation& alloc, const Snapshot& snap,
                                             const std::string& requester, int cores,
                                             int ways, const QosPredictor& qos,
                                             const DeprivationConfig& config) {
  std::vector<NeighborOptions> out;
  for (const auto& [id, g] : alloc.lc) {
    if (id == requester || snap.find(id) == nullptr) continue;
    const Grant lent = lent_by(alloc, id);
    NeighborOptions o;
    o.id = id;
    o.max_cores = std::max(0, std::min(cores, g.cores - 1 - lent.cores));
    o.max_ways = std::max(0, std::min(ways, g.ways - 1 - lent.ways));
    o.table.resize(static_cast<std::size_t>((o.max_cores + 1) * (o.max_ways + 1)));
    const EffectiveGrant eff = alloc.effective(id);
    const double before = qos.predict(snap, id, eff).predicted_qos;
    for (int m = 0; m <= o.max_cores; ++m) {
      for (int n = 0; n <= o.max_ways; ++n) {
        if (m == 0 && n == 0) continue;
        const double after = qos.predict(snap, id, minus(eff, m, n)).predicted_qos;
        if (after > config.allowable_qos) continue;
        o.table[static_cast<std::size_t>(m * (o.max_ways + 1) + n)] =
            Victim{id, m, n, after, std::max(0.0, after - before)};
      }
    }
    out.push_back(std::move(o));
  }
  return out;
}

std::optional<std::vector<Victim>> best_fit_victims(const std::vector<NeighborOptions>& options,
                                                    int cores, int ways) {
  std::optional<Candidate> best;
  auto offer = [&best](Candidate c) {
    if (!best || better(c, *best)) best = std::move(c);
  };
  const std::size_t k = options.size();
  for (std::size_t i = 0; i < k; ++i) {
    if (const Victim* v = lookup(options[i], cores, ways)) offer({v->slowdown, {*v}});
  }
  for (std::size_t i = 0; i < k; ++i) {
    const auto& a = options[i];
    for (int m1 = 0; m1 <= a.max_cores; ++m1) {
      for (int n1 = 0; n1 <= a.max_ways; ++n1) {
        const Victim* v1 = lookup(a, m1, n1);
        if (!v1) continue;
        for (std::size_t j = i + 1; j < k; ++j) {
          const auto& b = options[j];
          if (const Victim* v2 = lookup(b, cores - m1, ways - n1)) {
            offer({v1->slowdown + v2->slowdown, {*v1, *v2}});
          }
          for (int m2 = 0; m2 <= b.max_cores; ++m2) {
            for (int n2 = 0; n2 <= b.max_ways; ++n2) {
              const Victim* v2 = lookup(b, m2, n2);
              if (!v2) continue;
              const int m3 = cores - m1 - m2, n3 = ways - n1 - n2;
              if (m3 < 0 || n3 < 0) continue;
              for (std::size_t l = j + 1; l < k; ++l) {
                if (const Victim* v3 = lookup(options[l], m3, n3)) {
                  offer({v1->slowdown + v2->slowdown + v3->slowdown, {*v1, *v2, *v3}});
                }
              }
            }
          }
        }
      }
    }
  }
  if (!best) return std::nullopt;
  return best->victims;
}

DeprivationPlan plan_deprivation(const Allocation& alloc, const Snapshot& snap,
                                 const DeprivationRequest& request, const QosPredictor& qos,
                                 const DeprivationConfig& config) {
  if (request.cores < 0 || request.ways < 0 || (request.cores == 0 && request.ways == 0)) {
    throw Error(ErrorCode::kInvalidArgument, "deprivation request must ask for something");
  }
  DeprivationPlan plan;
  if (!alloc.be_members.empty()) {
    plan.be_cores = std::min(request.cores, alloc.be_pool.cores);
    plan.be_ways = std::min(request.ways, alloc.be_pool.ways);
  }
  const int m = request.cores - plan.be_cores;
  const int n = request.ways - plan.be_ways;
  if (m == 0 && n == 0) {
    plan.kind = PlanKind::kBestEffort;
    return plan;
  }

  const auto options = score_neighbors(alloc, snap, request.requester, m, n, qos, config);
  if (auto victims = best_fit_victims(options, m, n)) {
    plan.kind = PlanKind::kVictims;
    plan.victims = std::move(*victims);
    for (const auto& v : plan.victims) plan.total_slowdown += v.slowdown;
    return plan;
  }

  std::optional<std::pair<std::string, double>> partner;
  double partner_after = 0.0;
  for (const auto& [id, g] : alloc.lc) {
    if (id == request.requester || snap.find(id) == nullptr) continue;
    const Grant lent = lent_by(alloc, id);
    if (g.cores - lent.cores < m || g.ways - lent.ways < n || g.cores < 1) continue;
    const EffectiveGrant eff = alloc.effective(id);
    const double before = qos.predict(snap, id, eff).predicted_qos;
    const double after = qos.predict(snap, id, minus(eff, 0.5 * m, 0.5 * n)).predicted_qos;
    const double slowdown = std::max(0.0, after - before);
    if (!partner || slowdown < partner->second) {
      partner = {id, slowdown};
      partner_after = after;
    }
  }
  if (partner && config.sharing.allow && partner_after <= config.sharing.max_partner_qos) {
    plan.kind = PlanKind::kSharing;
    plan.sharing = SharingPair{request.requester, partner->first, m, n};
    plan.sharing_slowdown = partner->second;
    plan.total_slowdown = partner->second;
    return plan;
  }
  plan = DeprivationPlan{};
  return plan;
}

void apply_plan(Allocation& alloc, const DeprivationPlan& plan, const std::string& requester) {
  if (plan.kind == PlanKind::kInfeasible) {
    throw Error(ErrorCode::kInfeasible, "cannot apply an infeasible deprivation plan");
  }
  Grant& g = alloc.lc[requester];
  alloc.be_pool.cores -= plan.be_cores;
  alloc.be_pool.ways -= plan.be_ways;
  g.cores += plan.be_cores;
  g.ways += plan.be_ways;
  for (const auto& v : plan.victims) {
    alloc.lc[v.id].cores -= v.cores;
    alloc.lc[v.id].ways -= v.ways;
    alloc.lc[requester].cores += v.cores;
    alloc.lc[requester].ways += v.ways;
  }
  if (plan.sharing) {
    auto it = std::find_if(alloc.sharing.begin(), alloc.sharing.end(), [&](const SharingPair& p) {
      return p.borrower == plan.sharing->borrower && p.owner == plan.sharing->owner;
    });
    if (it != alloc.sharing.end()) {
      it->cores += plan.sharing->cores;
      it->ways += plan.sharing->ways;
    } else {
      alloc.sharing.push_back(*plan.sharing);
    }
  }
}

}  // namespace cosched

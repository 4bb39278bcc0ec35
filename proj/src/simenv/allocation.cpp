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
#include <set>

#include "cosched/error.hpp"
#include "cosched/simenv.hpp"

namespace cosched {
namespace {

[[noreturn]] void violated(const std::string& what) {
  throw Error(ErrorCode::kInvariant, "allocation rejected: " + what);
}

bool negative(const Grant& g) {
  return g.cores < 0 || g.ways < 0 || g.bw_units < 0;
}

}  // namespace

Grant Allocation::committed() const {
  Grant total = be_pool;
  for (const auto& [id, g] : lc) total += g;
  return total;
}

Grant Allocation::idle(const ServerSpec& server) const {
  return full_grant(server) - committed();
}

Grant Allocation::grant_of(const std::string& id) const {
  if (auto it = lc.find(id); it != lc.end()) return it->second;
  if (has_be(id)) return be_pool;
  return {};
}

bool Allocation::has_be(const std::string& id) const {
  return std::find(be_members.begin(), be_members.end(), id) != be_members.end();
}

EffectiveGrant Allocation::effective(const std::string& lc_id) const {
  EffectiveGrant e;
  if (auto it = lc.find(lc_id); it != lc.end()) e = EffectiveGrant::of(it->second);
  for (const auto& p : sharing) {
    if (p.borrower == lc_id) {
      e.cores += 0.5 * p.cores;
      e.ways += 0.5 * p.ways;
    } else if (p.owner == lc_id) {
      e.cores -= 0.5 * p.cores;
      e.ways -= 0.5 * p.ways;
    }
  }
  return e;
}

void Allocation::validate(const ServerSpec& server) const {
  for (const auto& [id, g] : lc) {
    if (negative(g)) violated("negative grant for " + id);
    if (has_be(id)) violated(id + " is both latency-critical and best-effort");
  }
  if (negative(be_pool)) violated("negative best-effort pool");
  if (be_members.empty() && !be_pool.is_zero()) {
    violated("best-effort pool without members");
  }
  std::set<std::string> members(be_members.begin(), be_members.end());
  if (members.size() != be_members.size()) violated("duplicate best-effort member");
  const Grant total = committed();
  if (total.cores > server.n_cores) violated("cores oversubscribed");
  if (total.ways > server.n_llc_ways) violated("ways oversubscribed");
  if (total.bw_units > server.mem_bw_units) violated("bandwidth oversubscribed");

  std::map<std::string, Grant> lent;
  for (const auto& p : sharing) {
    if (p.borrower == p.owner) violated("sharing pair with a single service");
    if (!lc.count(p.borrower) || !lc.count(p.owner)) {
      violated("sharing pair references a service without a grant");
    }
    if (p.cores < 0 || p.ways < 0 || (p.cores == 0 && p.ways == 0)) {
      violated("empty or negative sharing pair");
    }
    lent[p.owner] += Grant{p.cores, p.ways, 0};
  }
  for (const auto& [owner, g] : lent) {
    const Grant& own = lc.at(owner);
    if (g.cores > own.cores || g.ways > own.ways) {
      violated(owner + " shares more than it owns");
    }
  }
}

const ServiceTelemetry* Snapshot::find(const std::string& id) const {
  for (const auto& s : services) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

const ServiceTelemetry& Snapshot::at(const std::string& id) const {
  if (const auto* s = find(id)) return *s;
  throw Error(ErrorCode::kNotFound, "service '" + id + "' not in snapshot");
}

bool Snapshot::all_lc_met() const {
  bool any = false;
  for (const auto& s : services) {
    if (s.kind != ServiceKind::kLatencyCritical) continue;
    any = true;
    if (!s.qos_met) return false;
  }
  return any;
}

}  // namespace cosched

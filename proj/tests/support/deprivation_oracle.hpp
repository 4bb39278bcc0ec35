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


// Randomized four-neighbor deprivation instances and an exhaustive search
// over every combination of at most three victims.

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "cosched/scheduler.hpp"

namespace cosched::testing {

// Predicted latency / target = scale * (c0 / cores)^pc * (w0 / ways)^pw.
class PowerLawQos : public QosPredictor {
 public:
  struct Params {
    double scale, pc, pw, c0, w0;
  };
  std::map<std::string, Params> params;

  QosPrediction predict(const Snapshot&, const std::string& id,
                        const EffectiveGrant& e) const override {
    const Params& p = params.at(id);
    if (e.cores <= 0.0 || e.ways <= 0.0) return {ModelB::kRatioCap, false};
    const double r = std::min(ModelB::kRatioCap, p.scale * std::pow(p.c0 / e.cores, p.pc) *
                                                     std::pow(p.w0 / e.ways, p.pw));
    return {r, r <= 1.0};
  }
};

struct DeprivationInstance {
  Allocation alloc;
  Snapshot snap;
  DeprivationRequest request;
  PowerLawQos qos;
  DeprivationConfig config;
};

inline DeprivationInstance random_deprivation_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uni = [&rng](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  std::uniform_real_distribution<double> u(0.0, 1.0);
  DeprivationInstance inst;
  inst.alloc.lc["req"] = {1, 1, 1};
  inst.snap.services.push_back({});
  inst.snap.services.back().id = "req";
  for (int i = 0; i < 4; ++i) {
    const std::string id = "n" + std::to_string(i);
    const Grant g{uni(2, 8), uni(1, 4), 1};
    inst.alloc.lc[id] = g;
    inst.snap.services.push_back({});
    inst.snap.services.back().id = id;
    inst.qos.params[id] = {0.3 + 0.6 * u(rng), 0.2 + 1.5 * u(rng), 0.2 + 1.5 * u(rng),
                           double(g.cores), double(g.ways)};
  }
  if (u(rng) < 0.3) {
    const Grant& owner = inst.alloc.lc["n1"];
    inst.alloc.sharing.push_back({"n2", "n1", std::min(1, owner.cores - 1), 0});
    if (inst.alloc.sharing.back().cores == 0) inst.alloc.sharing.clear();
  }
  if (u(rng) < 0.5) {
    inst.alloc.be_members = {"be"};
    inst.alloc.be_pool = {uni(0, 1), uni(0, 1), 1};
  }
  do {
    inst.request = {"req", uni(0, 4), uni(0, 3)};
  } while (inst.request.cores == 0 && inst.request.ways == 0);
  inst.config.allowable_qos = 1.0;
  return inst;
}

struct BruteForceResult {
  std::vector<Victim> victims;
  double total = 0.0;
};

inline std::optional<BruteForceResult> brute_force_victims(const DeprivationInstance& inst) {
  const auto& a = inst.alloc;
  int be_c = 0, be_w = 0;
  if (!a.be_members.empty()) {
    be_c = std::min(inst.request.cores, a.be_pool.cores);
    be_w = std::min(inst.request.ways, a.be_pool.ways);
  }
  const int M = inst.request.cores - be_c, N = inst.request.ways - be_w;
  if (M == 0 && N == 0) return BruteForceResult{};

  // Every admissible single-victim move per neighbor.
  std::vector<std::string> ids;
  std::map<std::string, std::vector<Victim>> moves;
  for (const auto& [id, g] : a.lc) {
    if (id == inst.request.requester) continue;
    ids.push_back(id);
    int lent_c = 0, lent_w = 0;
    for (const auto& p : a.sharing) {
      if (p.owner == id) {
        lent_c += p.cores;
        lent_w += p.ways;
      }
    }
    const EffectiveGrant eff = a.effective(id);
    const double before = inst.qos.predict(inst.snap, id, eff).predicted_qos;
    for (int m = 0; m <= std::min(M, g.cores - 1 - lent_c); ++m) {
      for (int n = 0; n <= std::min(N, g.ways - 1 - lent_w); ++n) {
        if (m == 0 && n == 0) continue;
        const double after =
            inst.qos.predict(inst.snap, id, {eff.cores - m, eff.ways - n, eff.bw_units})
                .predicted_qos;
        if (after > inst.config.allowable_qos) continue;
        moves[id].push_back({id, m, n, after, std::max(0.0, after - before)});
      }
    }
  }

  std::optional<BruteForceResult> best;
  auto key = [](const BruteForceResult& r) {
    std::vector<std::tuple<std::string, int, int>> k;
    for (const auto& v : r.victims) k.emplace_back(v.id, v.cores, v.ways);
    return k;
  };
  auto consider = [&](std::vector<Victim> vs) {
    int c = 0, w = 0;
    double total = 0.0;
    for (const auto& v : vs) {
      c += v.cores;
      w += v.ways;
      total += v.slowdown;
    }
    if (c != M || w != N) return;
    BruteForceResult r{std::move(vs), total};
    bool take = !best;
    if (best) {
      if (r.total != best->total) {
        take = r.total < best->total;
      } else if (r.victims.size() != best->victims.size()) {
        take = r.victims.size() < best->victims.size();
      } else {
        // Ids first, then per-victim (m, n).
        std::vector<std::string> ia, ib;
        for (const auto& v : r.victims) ia.push_back(v.id);
        for (const auto& v : best->victims) ib.push_back(v.id);
        take = ia != ib ? ia < ib : key(r) < key(*best);
      }
    }
    if (take) best = std::move(r);
  };

  const std::size_t k = ids.size();
  for (std::size_t i = 0; i < k; ++i) {
    for (const auto& v1 : moves[ids[i]]) {
      consider({v1});
      for (std::size_t j = i + 1; j < k; ++j) {
        for (const auto& v2 : moves[ids[j]]) {
          consider({v1, v2});
          for (std::size_t l = j + 1; l < k; ++l) {
            for (const auto& v3 : moves[ids[l]]) consider({v1, v2, v3});
          }
        }
      }
    }
  }
  return best;
}

// Empty string when the plan agrees with brute force.
inline std::string compare_with_brute_force(const DeprivationInstance& inst) {
  const DeprivationPlan plan =
      plan_deprivation(inst.alloc, inst.snap, inst.request, inst.qos, inst.config);
  const auto truth = brute_force_victims(inst);
  if (!truth) {
    if (plan.kind == PlanKind::kVictims || plan.kind == PlanKind::kBestEffort) {
      return "plan found victims where exhaustive search found none";
    }
    return "";
  }
  if (truth->victims.empty()) {
    return plan.kind == PlanKind::kBestEffort ? "" : "expected a best-effort-only plan";
  }
  if (plan.kind != PlanKind::kVictims) return "plan missed a victim combination";
  if (plan.victims.size() != truth->victims.size()) return "victim count differs";
  for (std::size_t i = 0; i < plan.victims.size(); ++i) {
    const auto& a = plan.victims[i];
    const auto& b = truth->victims[i];
    if (a.id != b.id || a.cores != b.cores || a.ways != b.ways) return "victim choice differs";
  }
  if (plan.total_slowdown != truth->total) return "total slowdown differs";
  return "";
}

}  // namespace cosched::testing

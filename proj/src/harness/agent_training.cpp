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
#include <numeric>
#include <random>

#include "cosched/error.hpp"
#include "cosched/harness.hpp"

namespace cosched {
namespace {

constexpr int kTrainingLcs = 3;

std::array<double, kResourceKinds> lc_usage(const Allocation& a) {
  Grant total;
  for (const auto& [id, g] : a.lc) total += g;
  return {double(total.cores), double(total.ways), double(total.bw_units)};
}

std::array<double, kResourceKinds> limits(const ServerSpec& s) {
  return {double(s.n_cores), double(s.n_llc_ways), double(s.mem_bw_units)};
}

// Each LC gets a random grant of up to a third of every resource; the rest
// goes to the BE pool.
Allocation random_start(const ServerSpec& server, const std::vector<ServiceSpec>& services,
                        std::mt19937_64& rng) {
  Allocation a;
  auto draw = [&rng](int total) {
    return std::uniform_int_distribution<int>(1, std::max(1, total / kTrainingLcs))(rng);
  };
  for (const auto& s : services) {
    if (s.is_lc()) {
      a.lc[s.id] = {draw(server.n_cores), draw(server.n_llc_ways), draw(server.mem_bw_units)};
    } else {
      a.be_members.push_back(s.id);
    }
  }
  sweep_idle_to_be(a, server);
  return a;
}

}  // namespace

std::vector<ServiceSpec> agent_training_workload(const ServerSpec& server, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> load(0.3, 0.5);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Scenario s;
    s.server = server;
    for (int i = 0; i < kTrainingLcs; ++i) {
      ServiceSpec lc;
      lc.id = "lc" + std::to_string(i);
      SurfaceParams p = SurfaceFamily::sample(rng);
      p.noise_seed = rng();
      lc.surface = LatencySurface(p);
      lc.load_schedule = {{0.0, load(rng)}};
      s.services.push_back(std::move(lc));
    }
    ServiceSpec be;
    be.id = "be0";
    be.kind = ServiceKind::kBestEffort;
    be.load_schedule = {{0.0, 1.0}};
    s.services.push_back(be);
    if (oaa_fits(s)) return s.services;
  }
  throw Error(ErrorCode::kInfeasible, "no feasible agent training workload for this seed");
}

EpisodeHistory train_agent(Agent& agent, const EpisodeOptions& options) {
  if (options.episodes < 1 || options.steps < 1 || !(options.tick_ms > 0.0)) {
    throw Error(ErrorCode::kConfig, "episode counts and tick must be positive");
  }
  const ServerSpec& server = options.server;
  const NormalizationSpec norm = NormalizationSpec::derive(server);
  const std::vector<ServiceSpec> workload =
      agent_training_workload(server, options.workload_seed);
  std::vector<std::string> lcs;
  for (const auto& s : workload) {
    if (s.is_lc()) lcs.push_back(s.id);
  }
  const DeprivationConfig deprivation;
  std::mt19937_64 rng(options.seed);
  EpisodeHistory history;
  for (int episode = 0; episode < options.episodes; ++episode) {
    Simulator sim(server, workload);
    const GroundTruthPredictor truth(sim);
    sim.install(random_start(server, workload, rng));
    Snapshot snap = sim.step(options.tick_ms);
    double total = 0.0;
    for (int step = 0; step < options.steps; ++step) {
      const std::string& id = lcs[static_cast<std::size_t>(step) % lcs.size()];
      const auto state = extract(snap, id, ModelKind::kC, norm);
      const ActionMask mask = shepherd_actions(!snap.at(id).qos_met);
      const ActionChoice choice = agent.select_action(state, true, mask);
      ActionOutcome outcome = resolve_action(sim, snap, id, choice.action, truth, deprivation);
      const bool indicator = truth.predict(snap, id, outcome.next.effective(id)).met;
      if (outcome.applied) {
        sweep_idle_to_be(outcome.next, server);
        sim.install(outcome.next);
      }
      snap = sim.step(options.tick_ms);
      std::vector<double> lat, tgt;
      for (const auto& t : snap.services) {
        if (t.kind != ServiceKind::kLatencyCritical) continue;
        lat.push_back(t.latency_ms);
        tgt.push_back(t.qos_target_ms);
      }
      const double reward = compute_reward(indicator, lat, tgt, lc_usage(sim.allocation()),
                                           limits(server));
      agent.remember({state, choice.probabilities, reward,
                      extract(snap, id, ModelKind::kC, norm), mask,
                      shepherd_actions(!snap.at(id).qos_met)});
      agent.update();
      total += reward;
    }
    agent.end_episode();
    history.episode_reward.push_back(total / options.steps);
  }
  return history;
}

std::vector<double> moving_average(const std::vector<double>& v, int window) {
  if (window < 1) throw Error(ErrorCode::kInvalidArgument, "window must be positive");
  std::vector<double> out;
  out.reserve(v.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    sum += v[i];
    if (i >= static_cast<std::size_t>(window)) sum -= v[i - window];
    out.push_back(sum / static_cast<double>(std::min<std::size_t>(i + 1, window)));
  }
  return out;
}

std::optional<int> episodes_to_band(const std::vector<double>& rewards, double floor,
                                    int window) {
  const std::vector<double> ma = moving_average(rewards, window);
  std::optional<int> first;
  for (std::size_t i = 0; i < ma.size(); ++i) {
    if (ma[i] < floor) {
      first.reset();
    } else if (!first) {
      first = static_cast<int>(i) + 1;
    }
  }
  return first;
}

}  // namespace cosched

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
#include <limits>

#include "cosched/baselines.hpp"
#include "cosched/error.hpp"

namespace cosched {
namespace {

constexpr double kPerturbSd = 0.1;

int total_of(const ServerSpec& s, int which) {
  return which == 0 ? s.n_cores : (which == 1 ? s.n_llc_ways : s.mem_bw_units);
}

int& component(Grant& g, int which) {
  return which == 0 ? g.cores : (which == 1 ? g.ways : g.bw_units);
}

}  // namespace

BoScheduler::BoScheduler(BoConfig config) : config_(config), rng_(config.seed) {
  if (config_.initial_samples < 1 || config_.max_samples < config_.initial_samples ||
      config_.candidates < 1 || !(config_.interval_ms > 0.0)) {
    throw Error(ErrorCode::kConfig, "bo: invalid configuration");
  }
}

double BoScheduler::objective(const Snapshot& snap) {
  double be = 0.0;
  double score = 0.0;
  int n_lc = 0;
  for (const auto& t : snap.services) {
    if (t.kind == ServiceKind::kBestEffort) {
      be += t.be_throughput;
      continue;
    }
    ++n_lc;
    score += t.latency_ms > 0.0 ? std::min(1.0, t.qos_target_ms / t.latency_ms) : 1.0;
  }
  if (snap.all_lc_met()) return 1.0 + be;
  return score / std::max(1, n_lc) - 1.0;
}

Allocation BoScheduler::decode(const Eigen::VectorXd& x, const std::vector<std::string>& lc_ids,
                               const std::vector<std::string>& be_ids,
                               const ServerSpec& server) {
  const auto n = static_cast<int>(lc_ids.size());
  if (x.size() != 3 * n) throw Error(ErrorCode::kInvalidArgument, "bo: share vector size");
  Allocation a;
  a.be_members = be_ids;
  const bool be = !be_ids.empty();
  for (const auto& id : lc_ids) a.lc[id] = {};
  for (int which = 0; which < 3; ++which) {
    const int total = total_of(server, which);
    const int cap = total - (be ? 1 : 0);
    std::vector<double> raw(static_cast<std::size_t>(n));
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      raw[static_cast<std::size_t>(i)] = std::clamp(x(3 * i + which), 0.0, 1.0) * total;
      sum += raw[static_cast<std::size_t>(i)];
    }
    if (sum > cap && sum > 0.0) {
      for (double& r : raw) r *= cap / sum;
    }
    std::vector<int> units(static_cast<std::size_t>(n));
    int used = 0;
    for (int i = 0; i < n; ++i) {
      units[static_cast<std::size_t>(i)] =
          std::max(1, static_cast<int>(std::floor(raw[static_cast<std::size_t>(i)])));
      used += units[static_cast<std::size_t>(i)];
    }
    while (used > cap) {
      auto it = std::max_element(units.begin(), units.end());
      if (*it <= 1) break;
      --*it;
      --used;
    }
    while (used > total) {
      auto it = std::max_element(units.begin(), units.end());
      if (*it <= 0) break;
      --*it;
      --used;
    }
    for (int i = 0; i < n; ++i) {
      component(a.lc[lc_ids[static_cast<std::size_t>(i)]], which) =
          units[static_cast<std::size_t>(i)];
    }
    if (be) component(a.be_pool, which) = total - used;
  }
  return a;
}

void BoScheduler::restart(const std::vector<std::string>& lc_ids,
                          const std::vector<std::string>& be_ids) {
  lc_ids_ = lc_ids;
  be_ids_ = be_ids;
  samples_.clear();
  in_flight_.reset();
  terminated_ = false;
}

Eigen::VectorXd BoScheduler::propose(double* acquisition) {
  const auto dim = static_cast<Eigen::Index>(3 * lc_ids_.size());
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, kPerturbSd);
  const bool first = samples_.empty();
  const std::size_t index = samples_.size();
  if (index < static_cast<std::size_t>(config_.initial_samples)) {
    Eigen::VectorXd x(dim);
    if (first) {
      const double share =
          1.0 / static_cast<double>(lc_ids_.size() + (be_ids_.empty() ? 0 : 1));
      x.setConstant(share);
    } else {
      for (Eigen::Index i = 0; i < dim; ++i) x(i) = uni(rng_);
    }
    *acquisition = std::numeric_limits<double>::quiet_NaN();
    return x;
  }

  std::vector<Eigen::VectorXd> xs;
  std::vector<double> ys;
  const BoSample* best = &samples_.front();
  for (const auto& s : samples_) {
    xs.push_back(s.point);
    ys.push_back(s.objective);
    if (s.objective > best->objective) best = &s;
  }
  GaussianProcess gp;
  gp.fit(xs, ys);

  Eigen::VectorXd chosen = best->point;
  double chosen_ei = -1.0;
  for (int c = 0; c < config_.candidates; ++c) {
    Eigen::VectorXd x(dim);
    if (c % 2 == 0) {
      for (Eigen::Index i = 0; i < dim; ++i) x(i) = uni(rng_);
    } else {
      for (Eigen::Index i = 0; i < dim; ++i) {
        x(i) = std::clamp(best->point(i) + gauss(rng_), 0.0, 1.0);
      }
    }
    const auto post = gp.predict(x);
    const double ei = expected_improvement(post.mean, std::sqrt(post.variance), best->objective);
    if (ei > chosen_ei) {
      chosen_ei = ei;
      chosen = x;
    }
  }
  *acquisition = chosen_ei;
  return chosen;
}

void BoScheduler::on_tick(Simulator& sim, const Snapshot& snap, DecisionLog& log) {
  if (snap.t_ms + 1e-9 < next_ms_) return;
  next_ms_ = snap.t_ms + config_.interval_ms;

  std::vector<std::string> lc_ids, be_ids;
  for (const auto& t : snap.services) {
    (t.kind == ServiceKind::kLatencyCritical ? lc_ids : be_ids).push_back(t.id);
  }
  if (lc_ids.empty()) return;
  const Allocation before = sim.allocation();

  if (lc_ids != lc_ids_ || be_ids != be_ids_) {
    restart(lc_ids, be_ids);
  } else if (in_flight_) {
    in_flight_->objective = objective(snap);
    samples_.push_back(std::move(*in_flight_));
    in_flight_.reset();
  }

  if (terminated_) {
    if (snap.all_lc_met()) return;
    restart(lc_ids, be_ids);
    log.add({snap.t_ms, std::string(name()), "qos_violation", "*", "bo", "restart",
             grants_of(before), grants_of(before), std::nullopt, false, ""});
  }

  const BoSample* best = nullptr;
  for (const auto& s : samples_) {
    if (!best || s.objective > best->objective) best = &s;
  }

  double acq = 0.0;
  Eigen::VectorXd x;
  bool stop = static_cast<int>(samples_.size()) >= config_.max_samples;
  if (!stop) {
    x = propose(&acq);
    stop = best && !std::isnan(acq) &&
           acq < config_.ei_threshold * std::max(std::abs(best->objective), 1e-9);
  }
  if (stop && best) {
    terminated_ = true;
    sim.install(best->allocation);
    log.add({snap.t_ms, std::string(name()), "search_end", "*", "bo", "install best",
             grants_of(before), grants_of(best->allocation), std::nullopt, false,
             "samples " + std::to_string(samples_.size())});
    return;
  }

  BoSample s;
  s.point = x;
  s.allocation = decode(x, lc_ids_, be_ids_, sim.server());
  s.acquisition = acq;
  sim.install(s.allocation);
  log.add({snap.t_ms, std::string(name()), "sample", "*", "bo",
           "sample " + std::to_string(samples_.size() + 1), grants_of(before),
           grants_of(s.allocation), std::nullopt, false, ""});
  in_flight_ = std::move(s);
}

}  // namespace cosched

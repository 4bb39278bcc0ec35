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
#include "cosched/harness.hpp"
#include "json.hpp"

namespace cosched {
namespace {

using ojson = nlohmann::ordered_json;

// At least one listed LC service is present and every present one meets QoS.
bool all_met(const TickRecord& tick, const std::set<std::string>& lc_ids) {
  bool any = false;
  for (const auto& s : tick.services) {
    if (s.kind != ServiceKind::kLatencyCritical || !lc_ids.count(s.id)) continue;
    any = true;
    if (!s.qos_met) return false;
  }
  return any;
}

std::string action_key(const std::string& action) {
  const auto space = action.find(' ');
  return space == std::string::npos ? action : action.substr(0, space);
}

ojson optional_number(const std::optional<double>& v) {
  return v ? ojson(*v) : ojson(nullptr);
}

}  // namespace

std::optional<double> sustained_all_met(const std::vector<TickRecord>& telemetry,
                                        const std::vector<std::string>& lc_ids,
                                        double from_ms, double sustain_ms) {
  const std::set<std::string> ids(lc_ids.begin(), lc_ids.end());
  std::optional<double> start;
  for (const auto& tick : telemetry) {
    if (tick.t_ms < from_ms) continue;
    if (!all_met(tick, ids)) {
      start.reset();
      continue;
    }
    if (!start) start = tick.t_ms;
    if (tick.t_ms - *start >= sustain_ms) return start;
  }
  return std::nullopt;
}

RunReport compute_metrics(const Scenario& scenario, std::string_view scheduler,
                          const std::vector<TickRecord>& telemetry, const DecisionLog& log) {
  RunReport r;
  r.scheduler = std::string(scheduler);
  r.scenario = scenario.name;
  r.seed = scenario.seed;

  std::vector<std::string> lc_ids;
  bool has_be = false;
  for (const auto& s : scenario.services) {
    if (s.is_lc()) {
      lc_ids.push_back(s.id);
    } else {
      has_be = true;
    }
  }
  const std::set<std::string> ids(lc_ids.begin(), lc_ids.end());

  const auto start = sustained_all_met(telemetry, lc_ids, 0.0, scenario.sustain_ms);
  if (start && *start <= scenario.cutoff_ms) {
    r.converged = true;
    r.convergence_time_ms = start;
  }

  for (const auto& tick : telemetry) {
    const bool met = all_met(tick, ids);
    if (met) {
      double load = 0.0;
      for (const auto& s : tick.services) {
        if (s.kind == ServiceKind::kLatencyCritical) load += s.load;
      }
      r.emu = std::max(r.emu, load);
    }
    if (!has_be) continue;
    double sum = 0.0;
    int members = 0;
    for (const auto& s : tick.services) {
      if (s.kind != ServiceKind::kBestEffort) continue;
      sum += s.be_throughput;
      ++members;
    }
    const bool lc_present = std::any_of(tick.services.begin(), tick.services.end(),
                                        [](const TickRecord::Service& s) {
                                          return s.kind == ServiceKind::kLatencyCritical;
                                        });
    const bool violated = lc_present && !met;
    r.be_throughput_series.push_back(members == 0 || violated ? 0.0 : sum / members);
  }
  if (!r.be_throughput_series.empty()) {
    const double last = telemetry.back().t_ms;
    double sum = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < telemetry.size(); ++i) {
      if (telemetry[i].t_ms > last - kBeTailWindowMs) {
        sum += r.be_throughput_series[i];
        ++n;
      }
    }
    r.be_throughput_tail_mean = sum / n;
  }

  for (double d : scenario.disturbances()) {
    Recovery rec{d, std::nullopt};
    if (auto t = sustained_all_met(telemetry, lc_ids, d, scenario.sustain_ms)) {
      rec.recovery_ms = *t - d;
    }
    r.recoveries.push_back(rec);
  }

  for (const auto& rec : log.records()) {
    ++r.action_counts[action_key(rec.action)];
    if (rec.rollback) ++r.rollbacks;
  }
  r.truncated = telemetry.empty() ||
                telemetry.back().t_ms + 0.5 * scenario.tick_ms < scenario.duration_ms;
  return r;
}

std::string RunReport::to_json() const {
  ojson j;
  j["scheduler"] = scheduler;
  j["scenario"] = scenario;
  j["seed"] = seed;
  j["converged"] = converged;
  j["convergence_time_ms"] =
      convergence_time_ms ? ojson(*convergence_time_ms) : ojson("FAILED");
  j["emu"] = emu;
  j["be_throughput_series"] = be_throughput_series;
  j["be_throughput_tail_mean"] = be_throughput_tail_mean;
  ojson rec = ojson::array();
  for (const auto& r : recoveries) {
    rec.push_back({{"disturbance_ms", r.disturbance_ms},
                   {"recovery_ms", optional_number(r.recovery_ms)}});
  }
  j["recoveries"] = rec;
  j["action_counts"] = ojson(action_counts);
  j["rollbacks"] = rollbacks;
  j["truncated"] = truncated;
  j["decision_log_path"] = decision_log_path;
  j["telemetry_path"] = telemetry_path;
  return j.dump(2) + "\n";
}

RunReport RunReport::parse(const std::string& json_text) {
  RunReport r;
  try {
    const auto j = nlohmann::json::parse(json_text);
    r.scheduler = j.at("scheduler").get<std::string>();
    r.scenario = j.at("scenario").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.converged = j.at("converged").get<bool>();
    const auto& c = j.at("convergence_time_ms");
    if (c.is_number()) {
      r.convergence_time_ms = c.get<double>();
    } else if (!(c.is_string() && c.get<std::string>() == "FAILED")) {
      throw Error(ErrorCode::kConfig, "convergence_time_ms must be a number or \"FAILED\"");
    }
    if (r.converged != r.convergence_time_ms.has_value()) {
      throw Error(ErrorCode::kConfig, "converged flag disagrees with convergence_time_ms");
    }
    r.emu = j.at("emu").get<double>();
    r.be_throughput_series = j.at("be_throughput_series").get<std::vector<double>>();
    r.be_throughput_tail_mean = j.at("be_throughput_tail_mean").get<double>();
    for (const auto& e : j.at("recoveries")) {
      Recovery rec;
      rec.disturbance_ms = e.at("disturbance_ms").get<double>();
      if (!e.at("recovery_ms").is_null()) rec.recovery_ms = e.at("recovery_ms").get<double>();
      r.recoveries.push_back(rec);
    }
    r.action_counts = j.at("action_counts").get<std::map<std::string, int>>();
    r.rollbacks = j.at("rollbacks").get<int>();
    r.truncated = j.at("truncated").get<bool>();
    r.decision_log_path = j.at("decision_log_path").get<std::string>();
    r.telemetry_path = j.at("telemetry_path").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("run report: ") + e.what());
  }
  return r;
}

}  // namespace cosched

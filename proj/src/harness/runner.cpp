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

#include <sstream>

#include "cosched/error.hpp"
#include "cosched/harness.hpp"
#include "json.hpp"

namespace cosched {
namespace {

using ojson = nlohmann::ordered_json;

TickRecord record_of(const Snapshot& snap) {
  TickRecord r;
  r.t_ms = snap.t_ms;
  for (const auto& t : snap.services) {
    r.services.push_back({t.id, t.kind, t.load, t.latency_ms, t.qos_target_ms, t.qos_met,
                          t.be_throughput, t.grant});
  }
  return r;
}

TickRecord parse_tick(const std::string& line) {
  const auto j = nlohmann::json::parse(line);
  TickRecord r;
  r.t_ms = j.at("t_ms").get<double>();
  for (const auto& s : j.at("services")) {
    TickRecord::Service out;
    out.id = s.at("id").get<std::string>();
    const auto kind = s.at("kind").get<std::string>();
    if (kind != "lc" && kind != "be") {
      throw Error(ErrorCode::kIo, "telemetry service kind must be lc or be");
    }
    out.kind = kind == "lc" ? ServiceKind::kLatencyCritical : ServiceKind::kBestEffort;
    out.load = s.at("load").get<double>();
    out.latency_ms = s.at("latency_ms").get<double>();
    out.qos_target_ms = s.at("qos_target_ms").get<double>();
    out.qos_met = s.at("qos_met").get<bool>();
    out.be_throughput = s.at("be_throughput").get<double>();
    const auto& g = s.at("grant");
    out.grant = {g.at(0).get<int>(), g.at(1).get<int>(), g.at(2).get<int>()};
    r.services.push_back(std::move(out));
  }
  return r;
}

// Owns copies of the trained models so that online learning in one run
// never leaks into another.
class OsmlBundle : public Scheduler {
 public:
  OsmlBundle(const TrainedModels& m, std::uint64_t seed)
      : model_a_(m.model_a),
        model_b_(m.model_b),
        qos_(model_b_, m.norm),
        agent_(m.agent),
        inner_(OsmlModels{&model_a_, &qos_, &agent_, m.norm}) {
    agent_.reseed(seed);
  }
  std::string_view name() const override { return inner_.name(); }
  void on_tick(Simulator& sim, const Snapshot& snap, DecisionLog& log) override {
    inner_.on_tick(sim, snap, log);
  }

 private:
  ModelA model_a_;
  ModelB model_b_;
  ModelBPredictor qos_;
  Agent agent_;
  OsmlScheduler inner_;
};

}  // namespace

std::string telemetry_to_jsonl(const std::vector<TickRecord>& ticks) {
  std::string out;
  for (const auto& r : ticks) {
    ojson j;
    j["t_ms"] = r.t_ms;
    ojson services = ojson::array();
    for (const auto& s : r.services) {
      ojson e;
      e["id"] = s.id;
      e["kind"] = s.kind == ServiceKind::kLatencyCritical ? "lc" : "be";
      e["load"] = s.load;
      e["latency_ms"] = s.latency_ms;
      e["qos_target_ms"] = s.qos_target_ms;
      e["qos_met"] = s.qos_met;
      e["be_throughput"] = s.be_throughput;
      e["grant"] = {s.grant.cores, s.grant.ways, s.grant.bw_units};
      services.push_back(std::move(e));
    }
    j["services"] = std::move(services);
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<TickRecord> parse_telemetry_jsonl(const std::string& text, bool* truncated) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) lines.push_back(line);
  }
  if (truncated) *truncated = false;
  std::vector<TickRecord> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      out.push_back(parse_tick(lines[i]));
    } catch (const nlohmann::json::exception& e) {
      if (truncated && i + 1 == lines.size()) {
        *truncated = true;
        break;
      }
      throw Error(ErrorCode::kIo, "telemetry line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return out;
}

RunOutput run_scenario(const Scenario& scenario, Scheduler& scheduler,
                       const RunOptions& options) {
  scenario.validate();
  Simulator sim(scenario.server, scenario.services);
  RunOutput out;
  Snapshot snap = sim.observe();
  double streak_start = -1.0;  // < 0 while some LC violates
  // Stop strictly before duration so the tick count is duration / tick.
  while (sim.now_ms() + 0.5 * scenario.tick_ms < scenario.duration_ms) {
    scheduler.on_tick(sim, snap, out.log);
    snap = sim.step(scenario.tick_ms);
    out.telemetry.push_back(record_of(snap));
    if (!options.stop_on_convergence) continue;
    if (!snap.all_lc_met()) {
      streak_start = -1.0;
    } else if (streak_start < 0.0) {
      streak_start = snap.t_ms;
    }
    if (streak_start >= 0.0 && snap.t_ms - streak_start >= scenario.sustain_ms) break;
  }
  return out;
}

std::unique_ptr<Scheduler> make_scheduler(std::string_view name, const TrainedModels* models,
                                          std::uint64_t seed) {
  if (name == "osml+") {
    if (!models) {
      throw Error(ErrorCode::kConfig,
                  "osml+ needs trained models; run `cosched train A`, `train B` and `train C` "
                  "first");
    }
    return std::make_unique<OsmlBundle>(*models, seed);
  }
  if (name == "heuristic") return std::make_unique<HeuristicScheduler>();
  if (name == "bo") {
    BoConfig config;
    config.seed = seed;
    return std::make_unique<BoScheduler>(config);
  }
  throw Error(ErrorCode::kConfig,
              "unknown scheduler '" + std::string(name) + "' (osml+, heuristic, bo)");
}

}  // namespace cosched

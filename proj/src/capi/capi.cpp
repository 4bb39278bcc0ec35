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

#include <cstring>
#include <fstream>
#include <sstream>

#include "cosched/cosched.h"
#include "cosched/error.hpp"
#include "cosched/harness.hpp"
#include "cosched/param_io.hpp"
#include "json.hpp"

struct cosched_sim {
  cosched::Simulator sim;
};

struct cosched_models {
  cosched::TrainedModels models;
};

namespace {

using namespace cosched;
using ojson = nlohmann::ordered_json;

thread_local std::string g_last_error;

template <typename F>
cosched_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return COSCHED_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return static_cast<cosched_status>(e.code());
  } catch (const nlohmann::json::exception& e) {
    g_last_error = std::string("json: ") + e.what();
    return COSCHED_E_CONFIG;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return COSCHED_E_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (!p) throw Error(ErrorCode::kInvalidArgument, std::string(what) + " must not be null");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw Error(ErrorCode::kInternal, "out of memory");
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

Grant grant_from(const nlohmann::json& j) {
  return {j.at(0).get<int>(), j.at(1).get<int>(), j.at(2).get<int>()};
}

Allocation allocation_from(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  Allocation a;
  if (j.contains("lc")) {
    for (auto it = j["lc"].begin(); it != j["lc"].end(); ++it) a.lc[it.key()] = grant_from(*it);
  }
  if (j.contains("be_pool")) a.be_pool = grant_from(j["be_pool"]);
  if (j.contains("be_members")) a.be_members = j["be_members"].get<std::vector<std::string>>();
  if (j.contains("sharing")) {
    for (const auto& p : j["sharing"]) {
      a.sharing.push_back({p.at("borrower").get<std::string>(), p.at("owner").get<std::string>(),
                           p.at("cores").get<int>(), p.at("ways").get<int>()});
    }
  }
  return a;
}

ModelKind model_arg(const char* model) {
  require(model, "model");
  const ModelKind kind = parse_model_kind(model);
  if (kind == ModelKind::kC) {
    throw Error(ErrorCode::kConfig, "Model-C is trained with cosched_train_agent");
  }
  return kind;
}

}  // namespace

extern "C" {

const char* cosched_version(void) { return "1.0.0"; }

const char* cosched_last_error(void) { return g_last_error.c_str(); }

const char* cosched_status_name(cosched_status status) {
  if (status == COSCHED_OK) return "ok";
  if (status < COSCHED_E_INVALID_ARGUMENT || status > COSCHED_E_INTERNAL) return "unknown";
  return error_code_name(static_cast<ErrorCode>(status));
}

void cosched_string_free(char* s) { std::free(s); }

cosched_status cosched_sim_create(const char* scenario_json, cosched_sim** out) {
  return guarded([&] {
    require(scenario_json, "scenario_json");
    require(out, "out");
    *out = nullptr;
    const Scenario s = Scenario::parse(scenario_json);
    *out = new cosched_sim{Simulator(s.server, s.services)};
  });
}

void cosched_sim_free(cosched_sim* sim) { delete sim; }

cosched_status cosched_sim_install(cosched_sim* sim, const char* allocation_json) {
  return guarded([&] {
    require(sim, "sim");
    require(allocation_json, "allocation_json");
    sim->sim.install(allocation_from(allocation_json));
  });
}

cosched_status cosched_sim_step(cosched_sim* sim, double dt_ms, char** tick_json) {
  return guarded([&] {
    require(sim, "sim");
    require(tick_json, "tick_json");
    *tick_json = nullptr;
    const Snapshot snap = sim->sim.step(dt_ms);
    TickRecord r;
    r.t_ms = snap.t_ms;
    for (const auto& t : snap.services) {
      r.services.push_back({t.id, t.kind, t.load, t.latency_ms, t.qos_target_ms, t.qos_met,
                            t.be_throughput, t.grant});
    }
    *tick_json = dup_string(telemetry_to_jsonl({r}));
  });
}

cosched_status cosched_sim_now(const cosched_sim* sim, double* t_ms) {
  return guarded([&] {
    require(sim, "sim");
    require(t_ms, "t_ms");
    *t_ms = sim->sim.now_ms();
  });
}

cosched_status cosched_normalization_derive(const char* platform, char** json) {
  return guarded([&] {
    require(platform, "platform");
    require(json, "json");
    *json = dup_string(NormalizationSpec::derive(ServerSpec::preset(platform)).to_json());
  });
}

cosched_status cosched_generate_corpus(const char* platform, const char* model, int surfaces,
                                       uint64_t seed, const char* out_path, int64_t* rows) {
  return guarded([&] {
    require(platform, "platform");
    require(out_path, "out_path");
    const ServerSpec server = ServerSpec::preset(platform);
    CorpusOptions o;
    o.model = model_arg(model);
    if (surfaces > 0) o.surfaces = surfaces;
    o.seed = seed;
    const Corpus c = generate_corpus(server, NormalizationSpec::derive(server), o);
    c.save(out_path);
    if (rows) *rows = c.data.size();
  });
}

cosched_status cosched_train_model(const char* model, const char* platform,
                                   const char* corpus_path, const char* transfer_from,
                                   int epochs, uint64_t seed, const char* out_path,
                                   char** summary_json) {
  return guarded([&] {
    require(platform, "platform");
    require(corpus_path, "corpus_path");
    require(out_path, "out_path");
    const ModelKind kind = model_arg(model);
    const ServerSpec server = ServerSpec::preset(platform);
    const Corpus corpus = Corpus::load(corpus_path);
    TrainOptions o = default_train_options(kind);
    if (epochs > 0) o.epochs = epochs;
    o.seed = seed;
    ojson j;
    j["model"] = std::string(model_name(kind));
    j["platform"] = server.platform_id;
    j["rows"] = corpus.data.size();
    j["transfer_from"] = transfer_from ? ojson(transfer_from) : ojson(nullptr);
    if (kind == ModelKind::kA) {
      std::optional<ModelA> warm;
      if (transfer_from) warm = load_model_a(transfer_from);
      const ModelATraining t = train_model_a(server, corpus, o, warm ? &warm->net() : nullptr);
      save_model_a(out_path, t.model);
      j["mae_cores"] = t.mae_cores;
      j["mae_ways"] = t.mae_ways;
      j["final_loss"] = t.report.epoch_loss.empty() ? 0.0 : t.report.epoch_loss.back();
    } else {
      std::optional<ModelB> warm;
      if (transfer_from) warm = load_model_b(transfer_from);
      const ModelBTraining t = train_model_b(server, corpus, o, warm ? &warm->net() : nullptr);
      save_model_b(out_path, t.model);
      j["mae_ratio"] = t.mae_ratio;
      j["indicator_accuracy"] = t.indicator_accuracy;
      j["final_loss"] = t.report.epoch_loss.empty() ? 0.0 : t.report.epoch_loss.back();
    }
    if (summary_json) *summary_json = dup_string(j.dump(2) + "\n");
  });
}

cosched_status cosched_train_agent(const char* platform, int episodes, uint64_t seed,
                                   const char* transfer_from, const char* out_path,
                                   char** history_json) {
  return guarded([&] {
    require(platform, "platform");
    require(out_path, "out_path");
    EpisodeOptions o;
    o.server = ServerSpec::preset(platform);
    if (episodes > 0) o.episodes = episodes;
    o.seed = seed;
    AgentConfig config;
    config.seed = seed;
    Agent agent(config);
    if (transfer_from) {
      Agent pretrained = load_agent(transfer_from);
      agent.load_networks(pretrained.actor(), pretrained.critic(), pretrained.actor_target(),
                          pretrained.critic_target());
    }
    const EpisodeHistory h = train_agent(agent, o);
    save_agent(out_path, agent);
    if (history_json) {
      *history_json = dup_string(
          plots_to_jsonl({episode_reward_series(transfer_from ? "warm" : "cold", h)}));
    }
  });
}

cosched_status cosched_models_load(const char* platform, const char* model_a_path,
                                   const char* model_b_path, const char* model_c_path,
                                   cosched_models** out) {
  return guarded([&] {
    require(platform, "platform");
    require(out, "out");
    *out = nullptr;
    if (!model_a_path || !model_b_path || !model_c_path) {
      throw Error(ErrorCode::kConfig,
                  "osml+ needs Model-A, Model-B and Model-C files; create them with "
                  "`cosched train A`, `cosched train B` and `cosched train C`");
    }
    const ServerSpec server = ServerSpec::preset(platform);
    TrainedModels m{load_model_a(model_a_path), load_model_b(model_b_path),
                    load_agent(model_c_path), NormalizationSpec::derive(server)};
    if (m.model_a.server().platform_id != server.platform_id ||
        m.model_b.server().platform_id != server.platform_id) {
      throw Error(ErrorCode::kConfig, "model files were trained for another platform");
    }
    *out = new cosched_models{std::move(m)};
  });
}

void cosched_models_free(cosched_models* models) { delete models; }

cosched_status cosched_run(const char* scenario_path, const char* scheduler,
                           const cosched_models* models, uint64_t seed, double tick_ms,
                           double cutoff_ms, const char* out_prefix, char** report_json) {
  return guarded([&] {
    require(scenario_path, "scenario_path");
    require(scheduler, "scheduler");
    require(out_prefix, "out_prefix");
    Scenario s = Scenario::load(scenario_path);
    if (seed != 0) s.seed = seed;
    if (tick_ms > 0.0) s.tick_ms = tick_ms;
    if (cutoff_ms > 0.0) s.cutoff_ms = cutoff_ms;
    s.validate();
    if (models && models->models.norm.platform_id != s.server.platform_id) {
      throw Error(ErrorCode::kConfig, "models were trained for " +
                                          models->models.norm.platform_id + ", scenario runs on " +
                                          s.server.platform_id);
    }
    auto sched = make_scheduler(scheduler, models ? &models->models : nullptr, s.seed);
    const RunOutput run = run_scenario(s, *sched);
    RunReport report = compute_metrics(s, sched->name(), run.telemetry, run.log);
    const std::string prefix(out_prefix);
    report.decision_log_path = prefix + ".decisions.jsonl";
    report.telemetry_path = prefix + ".telemetry.jsonl";
    write_text(report.decision_log_path, run.log.to_jsonl());
    write_text(report.telemetry_path, telemetry_to_jsonl(run.telemetry));
    write_text(prefix + ".report.json", report.to_json());
    if (report_json) *report_json = dup_string(report.to_json());
  });
}

cosched_status cosched_report(const char* scenario_path, const char* scheduler,
                              const char* telemetry_path, const char* log_path,
                              char** report_json) {
  return guarded([&] {
    require(scenario_path, "scenario_path");
    require(scheduler, "scheduler");
    require(telemetry_path, "telemetry_path");
    require(log_path, "log_path");
    require(report_json, "report_json");
    const Scenario s = Scenario::load(scenario_path);
    bool cut = false;
    const auto telemetry = parse_telemetry_jsonl(read_text(telemetry_path), &cut);
    const DecisionLog log = DecisionLog::parse_jsonl(read_text(log_path));
    RunReport report = compute_metrics(s, scheduler, telemetry, log);
    report.truncated = report.truncated || cut;
    report.decision_log_path = log_path;
    report.telemetry_path = telemetry_path;
    *report_json = dup_string(report.to_json());
  });
}

cosched_status cosched_emit_plots(const char* const* report_paths, size_t count,
                                  const char* out_path) {
  return guarded([&] {
    require(out_path, "out_path");
    if (count > 0) require(report_paths, "report_paths");
    std::vector<RunReport> reports;
    for (size_t i = 0; i < count; ++i) {
      require(report_paths[i], "report path");
      reports.push_back(RunReport::parse(read_text(report_paths[i])));
    }
    write_text(out_path, plots_to_jsonl(plot_series(reports)));
  });
}

}  // extern "C"

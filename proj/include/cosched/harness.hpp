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


// Scenario files, corpus generation, training orchestration, the control
// loop driver, run metrics and plot series.

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cosched/baselines.hpp"
#include "cosched/ddpg.hpp"
#include "cosched/features.hpp"
#include "cosched/models.hpp"
#include "cosched/scheduler.hpp"
#include "cosched/simenv.hpp"

namespace cosched {

// ---------------------------------------------------------------- scenarios

// Named surfaces: "moses" plus the family draws "family:<seed>".
LatencySurface surface_preset(std::string_view name);
std::vector<std::string> surface_preset_names();
// "default", "streaming" (bandwidth hungry) or "compute" (core hungry).
BeParams be_preset(std::string_view name);

struct Scenario {
  static constexpr int kSchemaVersion = 1;

  int schema_version = kSchemaVersion;
  std::string name;
  ServerSpec server;
  std::vector<ServiceSpec> services;
  std::uint64_t seed = 1;
  double tick_ms = 100.0;
  double duration_ms = 181000.0;
  // A workload not converged by this time is reported as FAILED.
  double cutoff_ms = 180000.0;
  // All-met must hold this long to count as converged.
  double sustain_ms = 1000.0;

  // Throws Error(kConfig) on schema or value errors.
  static Scenario parse(const std::string& json_text);
  static Scenario load(const std::string& path);
  std::string to_json() const;
  void save(const std::string& path) const;
  void validate() const;
  // Times after t = 0 when a load level changes or a service arrives.
  std::vector<double> disturbances() const;
};

// Every service's oracle OAA at its highest load fits the server together,
// leaving one unit of each resource for a best-effort pool when present.
bool oaa_fits(const Scenario& s);

// ------------------------------------------------------------------- corpus

struct CorpusOptions {
  ModelKind model = ModelKind::kA;
  int surfaces = 400;
  int loads_per_surface = 5;
  int grants_per_load = 50;
  double min_load = 0.2;
  double max_load = 0.9;
  std::uint64_t seed = 1;
};

// Where a row came from, for spot re-derivation of its label.
struct CorpusSource {
  int surface = 0;
  double load = 0.0;
  Grant grant;
  Grant expected;  // QoS corpus only
};

struct Corpus {
  ModelKind model = ModelKind::kA;
  std::string platform_id;
  std::string normalization_id;
  // Labels in model encoding: Model-A fractions of the platform totals,
  // Model-B the log-link ratio.
  Dataset data;
  std::vector<SurfaceParams> surfaces;
  std::vector<CorpusSource> sources;
  std::vector<std::string> warnings;

  static std::vector<std::string> label_names(ModelKind model);
  // Header comment lines then one CSV row per sample with raw labels.
  std::string to_csv() const;
  static Corpus parse_csv(const std::string& text);
  void save(const std::string& path) const;
  static Corpus load(const std::string& path);
};

// Rows are taken at grants where the service keeps up with its load and
// next to a best-effort neighbor holding part of the remainder. Surfaces
// with no QoS-satisfying cell are skipped with a warning.
Corpus generate_corpus(const ServerSpec& server, const NormalizationSpec& norm,
                       const CorpusOptions& options);

// ------------------------------------------------------------------ training

struct ModelATraining {
  ModelA model;
  TrainReport report;
  double mae_cores = 0.0;
  double mae_ways = 0.0;
};

// Settings used by the CLI and the acceptance run: z-scored labels and an
// output-layer refit for both models, 60 epochs at 0.96 decay for Model-A.
TrainOptions default_train_options(ModelKind model);

// `warm_start` copies a pretrained network before fine-tuning.
ModelATraining train_model_a(const ServerSpec& server, const Corpus& corpus,
                             const TrainOptions& options, const Mlp* warm_start = nullptr);

struct ModelBTraining {
  ModelB model;
  TrainReport report;
  double mae_ratio = 0.0;
  // Held-out agreement of predicted_qos <= 1 with the true label.
  double indicator_accuracy = 0.0;
};

ModelBTraining train_model_b(const ServerSpec& server, const Corpus& corpus,
                             const TrainOptions& options, const Mlp* warm_start = nullptr);

// ------------------------------------------------------------ agent episodes

struct EpisodeOptions {
  ServerSpec server;
  int episodes = 300;
  int steps = 200;
  double tick_ms = 100.0;
  // Seeds the fixed training workload (surfaces and loads).
  std::uint64_t workload_seed = 7;
  // Seeds the per-episode random initial grants.
  std::uint64_t seed = 1;
};

struct EpisodeHistory {
  std::vector<double> episode_reward;  // mean step reward
};

// Round-robin shepherding of a fixed 3-LC + 1-BE workload from random
// initial grants, with online updates after every step. Actions are
// restricted as the scheduler restricts them: scale up while violating,
// scale down or idle otherwise.
EpisodeHistory train_agent(Agent& agent, const EpisodeOptions& options);
// Workload used by train_agent.
std::vector<ServiceSpec> agent_training_workload(const ServerSpec& server, std::uint64_t seed);

// Trailing mean over min(i + 1, window) values.
std::vector<double> moving_average(const std::vector<double>& v, int window);
// First episode (1-based) from which the moving average never drops below
// `floor` again.
std::optional<int> episodes_to_band(const std::vector<double>& rewards, double floor, int window);

// ---------------------------------------------------------------- execution

struct TickRecord {
  struct Service {
    std::string id;
    ServiceKind kind = ServiceKind::kLatencyCritical;
    double load = 0.0;
    double latency_ms = 0.0;
    double qos_target_ms = 0.0;
    bool qos_met = false;
    double be_throughput = 0.0;
    Grant grant;
    friend bool operator==(const Service&, const Service&) = default;
  };
  double t_ms = 0.0;
  std::vector<Service> services;
  friend bool operator==(const TickRecord&, const TickRecord&) = default;
};

std::string telemetry_to_jsonl(const std::vector<TickRecord>& ticks);
// With `truncated` set, an unparsable final line is dropped and reported
// there instead of raising Error(kIo).
std::vector<TickRecord> parse_telemetry_jsonl(const std::string& text,
                                              bool* truncated = nullptr);

struct RunOptions {
  // Stop once convergence is established; suites that only need the
  // convergence time use this.
  bool stop_on_convergence = false;
};

struct RunOutput {
  std::vector<TickRecord> telemetry;
  DecisionLog log;
};

RunOutput run_scenario(const Scenario& scenario, Scheduler& scheduler,
                       const RunOptions& options = {});

// Trained models for the full scheduler. Each scheduler built from a bundle
// gets its own agent copy, so runs never influence each other.
struct TrainedModels {
  ModelA model_a;
  ModelB model_b;
  Agent agent;
  NormalizationSpec norm;
};

// "osml+", "heuristic" or "bo". `models` is required for osml+ only.
std::unique_ptr<Scheduler> make_scheduler(std::string_view name, const TrainedModels* models,
                                          std::uint64_t seed);

// ------------------------------------------------------------------ metrics

struct Recovery {
  double disturbance_ms = 0.0;
  std::optional<double> recovery_ms;
  friend bool operator==(const Recovery&, const Recovery&) = default;
};

struct RunReport {
  std::string scheduler;
  std::string scenario;
  std::uint64_t seed = 0;
  bool converged = false;
  std::optional<double> convergence_time_ms;  // absent means FAILED
  // Highest sum of LC load fractions over ticks where every LC met QoS.
  double emu = 0.0;
  // Mean BE throughput per tick, normalized to a solo run on the full
  // server; ticks with any LC violation count as zero.
  std::vector<double> be_throughput_series;
  double be_throughput_tail_mean = 0.0;  // last 30 s
  std::vector<Recovery> recoveries;
  std::map<std::string, int> action_counts;
  int rollbacks = 0;
  bool truncated = false;
  std::string decision_log_path;
  std::string telemetry_path;

  std::string to_json() const;
  static RunReport parse(const std::string& json_text);
  friend bool operator==(const RunReport&, const RunReport&) = default;
};

inline constexpr double kBeTailWindowMs = 30000.0;

// Pure function of the scenario, the telemetry and the decision log.
RunReport compute_metrics(const Scenario& scenario, std::string_view scheduler,
                          const std::vector<TickRecord>& telemetry, const DecisionLog& log);
// First tick time from which all present LC services meet QoS for at least
// `sustain_ms`, starting no earlier than `from_ms`.
std::optional<double> sustained_all_met(const std::vector<TickRecord>& telemetry,
                                        const std::vector<std::string>& lc_ids,
                                        double from_ms, double sustain_ms);

// -------------------------------------------------------------------- plots

// One line per series: {"series", "scheduler", "x", "y"}.
struct PlotSeries {
  std::string series;
  std::string scheduler;
  std::vector<double> x;
  std::vector<double> y;
  friend bool operator==(const PlotSeries&, const PlotSeries&) = default;
};

// Per scheduler, in order of first appearance: "convergence_time_ms" over
// the 1-based index among that scheduler's reports (FAILED runs leave a
// gap) and, when any of those reports has a BE series,
// "be_throughput_tail_mean" over the same index.
std::vector<PlotSeries> plot_series(const std::vector<RunReport>& reports);
// "episode_reward" over 1-based episode number.
PlotSeries episode_reward_series(std::string label, const EpisodeHistory& history);
std::string plots_to_jsonl(const std::vector<PlotSeries>& series);
std::vector<PlotSeries> parse_plots_jsonl(const std::string& text);

// ------------------------------------------------------------------- suites

// `count` feasible workloads of three LC services from the surface family,
// each one where an even three-way split violates some service's target.
std::vector<Scenario> three_lc_suite(const ServerSpec& server, int count, std::uint64_t seed);
// `per_level` feasible workloads for each LC count in [min_lc, max_lc], each
// with one BE service.
std::vector<Scenario> be_suite(const ServerSpec& server, int min_lc, int max_lc, int per_level,
                               std::uint64_t seed);
// Three LC services at t = 0, a load step on one of them mid-run and a
// fourth LC arrival later.
Scenario churn_scenario(const ServerSpec& server, std::uint64_t seed);

}  // namespace cosched

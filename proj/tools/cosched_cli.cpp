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

// Command-line front end over the C interface.
//
// Exit codes: 0 success, 1 I/O or internal error, 2 configuration error,
// 3 training divergence, 4 scenario failure (invalid or infeasible
// scenario, or a run that did not converge before the cutoff).

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cosched/cosched.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitScenario = 4;

int exit_code(cosched_status s) {
  switch (s) {
    case COSCHED_OK: return kExitOk;
    case COSCHED_E_INVALID_ARGUMENT:
    case COSCHED_E_CONFIG:
    case COSCHED_E_STRUCTURAL:
    case COSCHED_E_NOT_FOUND: return kExitConfig;
    case COSCHED_E_TRAINING_DIVERGED: return kExitDiverged;
    case COSCHED_E_SCENARIO:
    case COSCHED_E_INFEASIBLE: return kExitScenario;
    default: return kExitIo;
  }
}

int fail(cosched_status s) {
  std::fprintf(stderr, "cosched: %s: %s\n", cosched_status_name(s), cosched_last_error());
  return exit_code(s);
}

// Prints and frees a library string.
void emit(char* s, const std::string& path = "") {
  if (!s) return;
  if (path.empty()) {
    std::fputs(s, stdout);
  } else {
    std::ofstream(path) << s;
  }
  cosched_string_free(s);
}

const char* opt(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Co-location scheduling simulator, model training and scenario runs"};
  app.require_subcommand(1);
  std::string platform = "server1";
  std::uint64_t seed = 1;

  auto* norm = app.add_subcommand("normalization", "Print a platform's feature bounds");
  norm->add_option("--platform", platform, "server1, server2 or server3");
  std::string norm_out;
  norm->add_option("--out", norm_out, "Write to this file instead of stdout");

  auto* gen = app.add_subcommand("generate-corpus", "Sweep simulated surfaces into a corpus");
  std::string gen_model = "A", gen_out;
  int surfaces = 0;
  gen->add_option("--platform", platform, "server1, server2 or server3");
  gen->add_option("--model", gen_model, "A or B")->check(CLI::IsMember({"A", "B", "a", "b"}));
  gen->add_option("--surfaces", surfaces, "Surface count (default 400)");
  gen->add_option("--seed", seed, "Corpus seed");
  gen->add_option("--out", gen_out, "Corpus CSV path")->required();

  auto* train = app.add_subcommand("train", "Train Model-A, Model-B or Model-C");
  std::string train_model, corpus, transfer, train_out, plots_out;
  int epochs = 0, episodes = 0;
  train->add_option("model", train_model, "A, B or C")
      ->required()
      ->check(CLI::IsMember({"A", "B", "C", "a", "b", "c"}));
  train->add_option("--platform", platform, "server1, server2 or server3");
  train->add_option("--corpus", corpus, "Corpus CSV (A and B)");
  train->add_option("--transfer-from", transfer, "Parameter file to warm start from");
  train->add_option("--epochs", epochs, "Training epochs (A and B)");
  train->add_option("--episodes", episodes, "Training episodes (C, default 300)");
  train->add_option("--seed", seed, "Training seed");
  train->add_option("--out", train_out, "Parameter file to write")->required();
  train->add_option("--plots", plots_out, "Episode-reward series file (C)");

  auto* run = app.add_subcommand("run", "Run a scenario with one scheduler");
  std::string scenario, scheduler = "osml+", model_a, model_b, model_c, out_prefix;
  double tick_ms = 0.0, cutoff_ms = 0.0;
  std::uint64_t run_seed = 0;
  run->add_option("--scenario", scenario, "Scenario JSON")->required();
  run->add_option("--scheduler", scheduler, "osml+, heuristic or bo")
      ->check(CLI::IsMember({"osml+", "heuristic", "bo"}));
  run->add_option("--platform", platform, "Platform the models were trained for (osml+)");
  run->add_option("--model-a", model_a, "Model-A parameter file (osml+)");
  run->add_option("--model-b", model_b, "Model-B parameter file (osml+)");
  run->add_option("--model-c", model_c, "Model-C parameter file (osml+)");
  run->add_option("--seed", run_seed, "Override the scenario seed");
  run->add_option("--tick-ms", tick_ms, "Override the monitor interval");
  run->add_option("--cutoff-ms", cutoff_ms, "Override the convergence cutoff");
  run->add_option("--out-prefix", out_prefix, "Prefix for the log, telemetry and report")
      ->required();

  auto* report = app.add_subcommand("report", "Recompute a report from run logs");
  std::string telemetry, log, report_out;
  report->add_option("--scenario", scenario, "Scenario JSON")->required();
  report->add_option("--scheduler", scheduler, "Scheduler name recorded in the report");
  report->add_option("--telemetry", telemetry, "Telemetry JSONL")->required();
  report->add_option("--log", log, "Decision log JSONL")->required();
  report->add_option("--out", report_out, "Write to this file instead of stdout");

  auto* plots = app.add_subcommand("emit-plots", "Collect reports into plot series");
  std::vector<std::string> reports;
  std::string plot_path;
  plots->add_option("reports", reports, "Report JSON files");
  plots->add_option("--out", plot_path, "Series JSONL path")->required();

  CLI11_PARSE(app, argc, argv);

  if (norm->parsed()) {
    char* json = nullptr;
    const cosched_status s = cosched_normalization_derive(platform.c_str(), &json);
    if (s != COSCHED_OK) return fail(s);
    emit(json, norm_out);
    return kExitOk;
  }
  if (gen->parsed()) {
    std::int64_t rows = 0;
    const cosched_status s = cosched_generate_corpus(platform.c_str(), gen_model.c_str(),
                                                     surfaces, seed, gen_out.c_str(), &rows);
    if (s != COSCHED_OK) return fail(s);
    std::printf("wrote %lld rows to %s\n", static_cast<long long>(rows), gen_out.c_str());
    return kExitOk;
  }
  if (train->parsed()) {
    char* summary = nullptr;
    cosched_status s;
    if (train_model == "C" || train_model == "c") {
      s = cosched_train_agent(platform.c_str(), episodes, seed, opt(transfer),
                              train_out.c_str(), &summary);
      if (s == COSCHED_OK && !plots_out.empty()) {
        emit(summary, plots_out);
        return kExitOk;
      }
    } else {
      if (corpus.empty()) {
        std::fprintf(stderr, "cosched: train %s needs --corpus\n", train_model.c_str());
        return kExitConfig;
      }
      s = cosched_train_model(train_model.c_str(), platform.c_str(), corpus.c_str(),
                              opt(transfer), epochs, seed, train_out.c_str(), &summary);
    }
    if (s != COSCHED_OK) return fail(s);
    emit(summary);
    return kExitOk;
  }
  if (run->parsed()) {
    cosched_models* models = nullptr;
    if (scheduler == "osml+") {
      const cosched_status s = cosched_models_load(platform.c_str(), opt(model_a),
                                                   opt(model_b), opt(model_c), &models);
      if (s != COSCHED_OK) return fail(s);
    }
    char* json = nullptr;
    const cosched_status s = cosched_run(scenario.c_str(), scheduler.c_str(), models, run_seed,
                                         tick_ms, cutoff_ms, out_prefix.c_str(), &json);
    cosched_models_free(models);
    if (s != COSCHED_OK) return fail(s);
    const bool converged = std::string(json).find("\"converged\": true") != std::string::npos;
    emit(json);
    return converged ? kExitOk : kExitScenario;
  }
  if (report->parsed()) {
    char* json = nullptr;
    const cosched_status s = cosched_report(scenario.c_str(), scheduler.c_str(),
                                            telemetry.c_str(), log.c_str(), &json);
    if (s != COSCHED_OK) return fail(s);
    emit(json, report_out);
    return kExitOk;
  }
  if (plots->parsed()) {
    std::vector<const char*> paths;
    for (const auto& r : reports) paths.push_back(r.c_str());
    const cosched_status s =
        cosched_emit_plots(paths.data(), paths.size(), plot_path.c_str());
    if (s != COSCHED_OK) return fail(s);
    return kExitOk;
  }
  return kExitConfig;
}

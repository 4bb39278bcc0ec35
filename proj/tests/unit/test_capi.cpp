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

// Exercises the shared library through its C header only.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "cosched/cosched.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* kScenario = R"({"schema_version": 1, "name": "capi", "server": "server1",
  "duration_ms": 4000, "cutoff_ms": 3500, "sustain_ms": 500,
  "services": [
    {"id": "m", "kind": "lc", "surface": "moses", "load": [{"t_ms": 0, "load": 0.3}]},
    {"id": "f", "kind": "lc", "surface": "family:3", "load": [{"t_ms": 0, "load": 0.3}]},
    {"id": "b", "kind": "be", "be": "default"}]})";

// Owns a char* returned by the library.
struct Owned {
  char* p = nullptr;
  ~Owned() { cosched_string_free(p); }
  std::string str() const { return p ? std::string(p) : std::string(); }
};

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "cosched_capi_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_scenario() {
  const fs::path p = scratch() / "capi.scenario.json";
  std::ofstream(p) << kScenario;
  return p;
}

}  // namespace

TEST_CASE("version and status names") {
  CHECK(std::string(cosched_version()) == "1.0.0");
  CHECK(std::string(cosched_status_name(COSCHED_OK)) == "ok");
  CHECK(std::string(cosched_status_name(COSCHED_E_INVARIANT)).size() > 0);
  CHECK(std::string(cosched_status_name(static_cast<cosched_status>(99))) == "unknown");
  cosched_string_free(nullptr);
}

TEST_CASE("null arguments are rejected with a message") {
  cosched_sim* sim = nullptr;
  CHECK(cosched_sim_create(nullptr, &sim) == COSCHED_E_INVALID_ARGUMENT);
  CHECK(std::string(cosched_last_error()).find("scenario_json") != std::string::npos);
  CHECK(cosched_sim_create("{not json", &sim) == COSCHED_E_CONFIG);
  CHECK(sim == nullptr);
  double t = 0.0;
  CHECK(cosched_sim_now(nullptr, &t) == COSCHED_E_INVALID_ARGUMENT);
}

TEST_CASE("simulator install and step") {
  cosched_sim* sim = nullptr;
  REQUIRE(cosched_sim_create(kScenario, &sim) == COSCHED_OK);
  CHECK(std::string(cosched_last_error()).empty());

  const char* good = R"({"lc": {"m": [6, 10, 4], "f": [10, 6, 4]},
    "be_pool": [4, 2, 2], "be_members": ["b"]})";
  REQUIRE(cosched_sim_install(sim, good) == COSCHED_OK);
  // Oversubscribed cores: rejected, previous allocation stays.
  const char* bad = R"({"lc": {"m": [30, 10, 4], "f": [10, 6, 4]}})";
  CHECK(cosched_sim_install(sim, bad) == COSCHED_E_INVARIANT);
  CHECK(std::string(cosched_last_error()).size() > 0);
  CHECK(cosched_sim_install(sim, R"({"lc": {"ghost": [1, 1, 1]}})") == COSCHED_E_INVARIANT);

  Owned tick;
  REQUIRE(cosched_sim_step(sim, 100.0, &tick.p) == COSCHED_OK);
  const json j = json::parse(tick.str());
  CHECK(j.at("t_ms").get<double>() == 100.0);
  bool saw_m = false;
  for (const auto& s : j.at("services")) {
    if (s.at("id") == "m") {
      saw_m = true;
      CHECK(s.at("grant") == json::array({6, 10, 4}));
    }
  }
  CHECK(saw_m);

  double t = 0.0;
  REQUIRE(cosched_sim_now(sim, &t) == COSCHED_OK);
  CHECK(t == 100.0);
  Owned none;
  CHECK(cosched_sim_step(sim, 0.0, &none.p) == COSCHED_E_INVALID_ARGUMENT);
  cosched_sim_free(sim);
}

TEST_CASE("normalization bounds") {
  Owned j;
  REQUIRE(cosched_normalization_derive("server2", &j.p) == COSCHED_OK);
  const json n = json::parse(j.str());
  CHECK(n.at("platform_id") == "server2");
  CHECK(n.at("version") == 1);
  // The checked-in bounds are this output.
  CHECK(n == json::parse(slurp(fs::path(COSCHED_DATA_DIR) / "normalization" / "server2.json")));
  Owned none;
  CHECK(cosched_normalization_derive("server9", &none.p) != COSCHED_OK);
}

TEST_CASE("corpus, training, models and runs") {
  const fs::path dir = scratch();
  const std::string corpus_a = (dir / "a.csv").string();
  const std::string corpus_b = (dir / "b.csv").string();
  int64_t rows = 0;
  REQUIRE(cosched_generate_corpus("server1", "A", 3, 5, corpus_a.c_str(), &rows) == COSCHED_OK);
  CHECK(rows > 0);
  REQUIRE(cosched_generate_corpus("server1", "B", 3, 5, corpus_b.c_str(), &rows) == COSCHED_OK);
  CHECK(rows > 0);
  CHECK(cosched_generate_corpus("server1", "Z", 3, 5, corpus_a.c_str(), &rows) != COSCHED_OK);

  const std::string ma = (dir / "a.bin").string();
  const std::string mb = (dir / "b.bin").string();
  const std::string mc = (dir / "c.bin").string();
  Owned sa, sb;
  REQUIRE(cosched_train_model("A", "server1", corpus_a.c_str(), nullptr, 2, 1, ma.c_str(),
                              &sa.p) == COSCHED_OK);
  const json ja = json::parse(sa.str());
  CHECK(ja.at("model") == "A");
  CHECK(ja.at("mae_cores").get<double>() >= 0.0);
  REQUIRE(cosched_train_model("B", "server1", corpus_b.c_str(), nullptr, 2, 1, mb.c_str(),
                              &sb.p) == COSCHED_OK);
  CHECK(json::parse(sb.str()).contains("indicator_accuracy"));

  Owned warm;
  const std::string ma2 = (dir / "a2.bin").string();
  CHECK(cosched_train_model("A", "server1", corpus_a.c_str(), ma.c_str(), 1, 1, ma2.c_str(),
                            &warm.p) == COSCHED_OK);
  Owned cross;
  CHECK(cosched_train_model("A", "server1", corpus_a.c_str(), mb.c_str(), 1, 1, ma2.c_str(),
                            &cross.p) != COSCHED_OK);
  Owned missing;
  CHECK(cosched_train_model("A", "server1", (dir / "none.csv").string().c_str(), nullptr, 1, 1,
                            ma2.c_str(), &missing.p) == COSCHED_E_IO);

  Owned hist;
  REQUIRE(cosched_train_agent("server1", 2, 1, nullptr, mc.c_str(), &hist.p) == COSCHED_OK);
  const json jh = json::parse(hist.str());
  CHECK(jh.at("series") == "episode_reward");
  CHECK(jh.at("scheduler") == "cold");
  CHECK(jh.at("y").size() == 2);

  cosched_models* models = nullptr;
  CHECK(cosched_models_load("server1", ma.c_str(), nullptr, mc.c_str(), &models) ==
        COSCHED_E_CONFIG);
  CHECK(models == nullptr);
  CHECK(cosched_models_load("server2", ma.c_str(), mb.c_str(), mc.c_str(), &models) ==
        COSCHED_E_CONFIG);
  REQUIRE(cosched_models_load("server1", ma.c_str(), mb.c_str(), mc.c_str(), &models) ==
          COSCHED_OK);

  const std::string scenario = write_scenario().string();
  Owned no_models;
  CHECK(cosched_run(scenario.c_str(), "osml+", nullptr, 0, 0, 0, (dir / "x").string().c_str(),
                    &no_models.p) == COSCHED_E_CONFIG);

  std::vector<std::string> report_paths;
  for (const char* name : {"heuristic", "osml+"}) {
    const std::string prefix = (dir / name).string();
    Owned report;
    REQUIRE(cosched_run(scenario.c_str(), name, models, 0, 0, 0, prefix.c_str(), &report.p) ==
            COSCHED_OK);
    for (const char* suffix : {".decisions.jsonl", ".telemetry.jsonl", ".report.json"}) {
      CHECK(fs::exists(prefix + suffix));
    }
    CHECK(slurp(prefix + ".report.json") == report.str());
    report_paths.push_back(prefix + ".report.json");

    // The report is a pure function of the two logs.
    Owned again;
    REQUIRE(cosched_report(scenario.c_str(), json::parse(report.str()).at("scheduler")
                                                 .get<std::string>().c_str(),
                           (prefix + ".telemetry.jsonl").c_str(),
                           (prefix + ".decisions.jsonl").c_str(), &again.p) == COSCHED_OK);
    CHECK(again.str() == report.str());
  }
  cosched_models_free(models);

  // Same seed, same bytes.
  const std::string rerun = (dir / "heuristic_again").string();
  Owned r2;
  REQUIRE(cosched_run(scenario.c_str(), "heuristic", nullptr, 0, 0, 0, rerun.c_str(), &r2.p) ==
          COSCHED_OK);
  CHECK(slurp(rerun + ".telemetry.jsonl") == slurp(dir / "heuristic.telemetry.jsonl"));
  CHECK(slurp(rerun + ".decisions.jsonl") == slurp(dir / "heuristic.decisions.jsonl"));

  SUBCASE("truncated telemetry") {
    std::string tel = slurp(dir / "heuristic.telemetry.jsonl");
    tel.resize(tel.size() - 20);
    const fs::path cut = dir / "cut.telemetry.jsonl";
    std::ofstream(cut) << tel;
    Owned report;
    REQUIRE(cosched_report(scenario.c_str(), "heuristic", cut.string().c_str(),
                           (dir / "heuristic.decisions.jsonl").string().c_str(),
                           &report.p) == COSCHED_OK);
    CHECK(json::parse(report.str()).at("truncated") == true);
  }

  SUBCASE("plots") {
    std::vector<const char*> paths;
    for (const auto& p : report_paths) paths.push_back(p.c_str());
    const fs::path out = dir / "plots.jsonl";
    REQUIRE(cosched_emit_plots(paths.data(), paths.size(), out.string().c_str()) == COSCHED_OK);
    std::istringstream lines(slurp(out));
    std::string line;
    int n = 0;
    while (std::getline(lines, line)) {
      if (line.empty()) continue;
      const std::string series = json::parse(line).at("series");
      CHECK((series == "convergence_time_ms" || series == "be_throughput_tail_mean"));
      ++n;
    }
    CHECK(n == 4);
    CHECK(cosched_emit_plots(nullptr, 1, out.string().c_str()) == COSCHED_E_INVALID_ARGUMENT);
  }
}

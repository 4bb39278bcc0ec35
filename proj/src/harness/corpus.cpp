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


#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cosched/error.hpp"
#include "cosched/harness.hpp"

namespace cosched {
namespace {

constexpr std::string_view kMagic = "# cosched corpus v1";
constexpr int kGrantTries = 200;
constexpr int kLoadTries = 20;
constexpr double kRowSpacingMs = 100.0;

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(line);
  while (std::getline(in, item, sep)) out.push_back(item);
  return out;
}

std::string header_value(const std::string& line, std::string_view key) {
  const std::string prefix = "# " + std::string(key) + ": ";
  if (line.rfind(prefix, 0) != 0) {
    throw Error(ErrorCode::kConfig, "corpus header: expected '" + prefix + "'");
  }
  return line.substr(prefix.size());
}

// A grant the service keeps up with at `load`, or nullopt.
std::optional<Grant> keep_up_grant(const LatencySurface& surface, const ServerSpec& server,
                                   double load, std::mt19937_64& rng) {
  for (int t = 0; t < kGrantTries; ++t) {
    const Grant g{uniform_int(rng, 1, server.n_cores), uniform_int(rng, 1, server.n_llc_ways),
                  uniform_int(rng, 1, server.mem_bw_units)};
    if (surface.service_capacity(server, EffectiveGrant::of(g), load) > load) return g;
  }
  return std::nullopt;
}

Grant expected_grant(const Grant& g, const ServerSpec& server, std::mt19937_64& rng) {
  Grant e = g;
  if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) < 0.8) {
    e.cores -= uniform_int(rng, 0, g.cores - 1);
    e.ways -= uniform_int(rng, 0, g.ways - 1);
  } else {
    e.cores += uniform_int(rng, 0, server.n_cores - g.cores);
    e.ways += uniform_int(rng, 0, server.n_llc_ways - g.ways);
  }
  return e;
}

}  // namespace

std::vector<std::string> Corpus::label_names(ModelKind model) {
  if (model == ModelKind::kA) {
    return {"oaa_cores", "oaa_ways", "oaa_bw_units", "rcliff_cores", "rcliff_ways"};
  }
  if (model == ModelKind::kB) return {"qos_ratio"};
  throw Error(ErrorCode::kConfig, "the shepherd model has no supervised corpus");
}

Corpus generate_corpus(const ServerSpec& server, const NormalizationSpec& norm,
                       const CorpusOptions& options) {
  server.validate();
  norm.validate();
  if (options.model == ModelKind::kC) {
    throw Error(ErrorCode::kConfig, "the shepherd model trains on episodes, not a corpus");
  }
  if (options.surfaces < 1 || options.loads_per_surface < 1 || options.grants_per_load < 1 ||
      !(options.min_load > 0.0) || options.max_load > 1.0 ||
      !(options.min_load <= options.max_load)) {
    throw Error(ErrorCode::kConfig, "corpus options out of range");
  }
  const bool qos_corpus = options.model == ModelKind::kB;
  const int n_inputs = qos_corpus ? ModelB::kInputs : ModelA::kInputs;
  const int n_labels = qos_corpus ? 1 : ModelA::kOutputs;
  const Eigen::Index capacity = static_cast<Eigen::Index>(options.surfaces) *
                                options.loads_per_surface * options.grants_per_load;

  Corpus corpus;
  corpus.model = options.model;
  corpus.platform_id = server.platform_id;
  corpus.normalization_id = norm.id();
  corpus.data.x.resize(n_inputs, capacity);
  corpus.data.y.resize(n_labels, capacity);
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> load_dist(options.min_load, options.max_load);
  Eigen::Index row = 0;

  for (int si = 0; si < options.surfaces; ++si) {
    const SurfaceParams params = SurfaceFamily::sample(rng);
    corpus.surfaces.push_back(params);
    const LatencySurface surface(params);
    if (!oracle_oaa_rcliff(surface, server, options.min_load, params.qos_target_ms).feasible) {
      corpus.warnings.push_back("surface " + std::to_string(si) +
                                " has no QoS-satisfying cell at any load; excluded");
      continue;
    }
    for (int li = 0; li < options.loads_per_surface; ++li) {
      double load = 0.0;
      OaaResult oaa;
      for (int t = 0; t < kLoadTries && !oaa.feasible; ++t) {
        load = load_dist(rng);
        oaa = oracle_oaa_rcliff(surface, server, load, params.qos_target_ms);
      }
      if (!oaa.feasible) {
        corpus.warnings.push_back("surface " + std::to_string(si) +
                                  ": no feasible load drawn; level skipped");
        continue;
      }
      ServiceSpec svc;
      svc.id = "svc";
      svc.surface = surface;
      svc.load_schedule = {{0.0, load}};
      ServiceSpec nbr;
      nbr.id = "nbr";
      nbr.kind = ServiceKind::kBestEffort;
      Simulator sim(server, {svc, nbr});
      for (int gi = 0; gi < options.grants_per_load; ++gi) {
        const auto g = keep_up_grant(surface, server, load, rng);
        if (!g) continue;
        Allocation alloc;
        alloc.lc["svc"] = *g;
        const Grant rest = full_grant(server) - *g;
        alloc.be_members = {"nbr"};
        alloc.be_pool = {uniform_int(rng, 0, rest.cores), uniform_int(rng, 0, rest.ways),
                         uniform_int(rng, 0, rest.bw_units)};
        sim.install(alloc);
        sim.step(kRowSpacingMs);
        const ServiceTelemetry tel = sim.observe().at("svc");

        CorpusSource src{si, load, *g, {}};
        std::vector<double> x;
        if (qos_corpus) {
          src.expected = expected_grant(*g, server, rng);
          x = extract(tel, ModelKind::kB, norm,
                      ExpectedGrant{double(src.expected.cores),
                                    src.expected.ways * server.way_mb});
          const Grant e{src.expected.cores, src.expected.ways, g->bw_units};
          corpus.data.y(0, row) = ModelB::encode(
              surface.latency_ms(server, EffectiveGrant::of(e), load), params.qos_target_ms);
        } else {
          x = extract(tel, ModelKind::kA, norm);
          corpus.data.y.col(row) = ModelA::encode(server, oaa);
        }
        corpus.data.x.col(row) = Eigen::Map<const Eigen::VectorXd>(x.data(), n_inputs);
        corpus.sources.push_back(src);
        ++row;
      }
    }
  }
  corpus.data.x.conservativeResize(Eigen::NoChange, row);
  corpus.data.y.conservativeResize(Eigen::NoChange, row);
  return corpus;
}

std::string Corpus::to_csv() const {
  std::string out;
  out += std::string(kMagic) + "\n";
  out += "# model: " + std::string(model_name(model)) + "\n";
  out += "# platform: " + platform_id + "\n";
  out += "# normalization: " + normalization_id + "\n";
  out += "# label_encoding: ";
  out += model == ModelKind::kA ? "fraction_of_platform_total\n"
                                : "log1p_ratio_over_log1p_cap\n";
  out += "# rows: " + std::to_string(data.size()) + "\n";
  bool first = true;
  for (Feature f : projection(model)) {
    out += (first ? "" : ",") + std::string(feature_name(f));
    first = false;
  }
  for (const auto& l : label_names(model)) out += "," + l;
  out += "\n";
  for (Eigen::Index c = 0; c < data.size(); ++c) {
    for (Eigen::Index r = 0; r < data.x.rows(); ++r) {
      if (r) out += ',';
      out += format_number(data.x(r, c));
    }
    for (Eigen::Index r = 0; r < data.y.rows(); ++r) {
      out += ',';
      out += format_number(data.y(r, c));
    }
    out += '\n';
  }
  return out;
}

Corpus Corpus::parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kMagic) {
    throw Error(ErrorCode::kConfig, "not a cosched corpus file");
  }
  Corpus c;
  std::getline(in, line);
  c.model = parse_model_kind(header_value(line, "model"));
  std::getline(in, line);
  c.platform_id = header_value(line, "platform");
  std::getline(in, line);
  c.normalization_id = header_value(line, "normalization");
  std::getline(in, line);
  header_value(line, "label_encoding");
  std::getline(in, line);
  const long rows = std::strtol(header_value(line, "rows").c_str(), nullptr, 10);
  if (rows < 0) throw Error(ErrorCode::kConfig, "corpus header: negative row count");
  std::getline(in, line);
  const auto& fields = projection(c.model);
  const auto labels = label_names(c.model);
  const auto columns = split(line, ',');
  if (columns.size() != fields.size() + labels.size()) {
    throw Error(ErrorCode::kConfig, "corpus column header does not match the model");
  }
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (columns[i] != feature_name(fields[i])) {
      throw Error(ErrorCode::kConfig, "corpus feature order differs at column " + columns[i]);
    }
  }
  const auto nx = static_cast<Eigen::Index>(fields.size());
  const auto ny = static_cast<Eigen::Index>(labels.size());
  c.data.x.resize(nx, rows);
  c.data.y.resize(ny, rows);
  for (long r = 0; r < rows; ++r) {
    if (!std::getline(in, line)) throw Error(ErrorCode::kConfig, "corpus truncated");
    const char* p = line.c_str();
    for (Eigen::Index k = 0; k < nx + ny; ++k) {
      char* end = nullptr;
      const double v = std::strtod(p, &end);
      if (end == p || (k + 1 < nx + ny && *end != ',')) {
        throw Error(ErrorCode::kConfig, "corpus row " + std::to_string(r + 1) + " malformed");
      }
      if (k < nx) {
        c.data.x(k, r) = v;
      } else {
        c.data.y(k - nx, r) = v;
      }
      p = end + (*end == ',' ? 1 : 0);
    }
  }
  return c;
}

void Corpus::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << to_csv();
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

Corpus Corpus::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

}  // namespace cosched

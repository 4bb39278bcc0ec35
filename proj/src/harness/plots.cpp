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
#include <sstream>

#include "cosched/error.hpp"
#include "cosched/harness.hpp"
#include "json.hpp"

namespace cosched {

std::vector<PlotSeries> plot_series(const std::vector<RunReport>& reports) {
  std::vector<std::string> order;
  for (const auto& r : reports) {
    if (std::find(order.begin(), order.end(), r.scheduler) == order.end()) {
      order.push_back(r.scheduler);
    }
  }
  std::vector<PlotSeries> out;
  for (const auto& name : order) {
    PlotSeries conv{"convergence_time_ms", name, {}, {}};
    PlotSeries be{"be_throughput_tail_mean", name, {}, {}};
    bool any_be = false;
    int index = 0;
    for (const auto& r : reports) {
      if (r.scheduler != name) continue;
      ++index;
      if (r.convergence_time_ms) {
        conv.x.push_back(index);
        conv.y.push_back(*r.convergence_time_ms);
      }
      if (!r.be_throughput_series.empty()) {
        any_be = true;
        be.x.push_back(index);
        be.y.push_back(r.be_throughput_tail_mean);
      }
    }
    out.push_back(std::move(conv));
    if (any_be) out.push_back(std::move(be));
  }
  return out;
}

PlotSeries episode_reward_series(std::string label, const EpisodeHistory& history) {
  PlotSeries s{"episode_reward", std::move(label), {}, history.episode_reward};
  for (std::size_t i = 0; i < history.episode_reward.size(); ++i) {
    s.x.push_back(static_cast<double>(i + 1));
  }
  return s;
}

std::string plots_to_jsonl(const std::vector<PlotSeries>& series) {
  std::string out;
  for (const auto& s : series) {
    nlohmann::ordered_json j;
    j["series"] = s.series;
    j["scheduler"] = s.scheduler;
    j["x"] = s.x;
    j["y"] = s.y;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<PlotSeries> parse_plots_jsonl(const std::string& text) {
  std::vector<PlotSeries> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      PlotSeries s;
      s.series = j.at("series").get<std::string>();
      s.scheduler = j.at("scheduler").get<std::string>();
      s.x = j.at("x").get<std::vector<double>>();
      s.y = j.at("y").get<std::vector<double>>();
      if (s.x.size() != s.y.size()) {
        throw Error(ErrorCode::kIo, "plot line " + std::to_string(line_no) +
                                        ": x and y lengths differ");
      }
      out.push_back(std::move(s));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kIo, "plot line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace cosched

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

#include "cosched/error.hpp"
#include "cosched/models.hpp"

namespace cosched {
namespace {

void check_input(std::span<const double> features, int expected) {
  if (static_cast<int>(features.size()) != expected) {
    throw Error(ErrorCode::kStructural, "expected " + std::to_string(expected) +
                                            " features, got " +
                                            std::to_string(features.size()));
  }
}

double round_up(double v, int total) {
  return std::clamp(std::ceil(v), 1.0, static_cast<double>(total));
}

}  // namespace

Grant OaaPrediction::oaa_grant() const {
  return {static_cast<int>(oaa_cores), static_cast<int>(oaa_ways),
          static_cast<int>(oaa_bw_units)};
}

ModelA::ModelA(ServerSpec server, std::uint64_t seed)
    : server_(std::move(server)),
      net_(Mlp::standard(kInputs, kOutputs, Activation::kIdentity, kDropout, seed)) {}

ModelA::ModelA(ServerSpec server, Mlp net) : server_(std::move(server)), net_(std::move(net)) {
  if (net_.input_dim() != kInputs || net_.output_dim() != kOutputs) {
    throw Error(ErrorCode::kStructural, "network shape does not fit the allocation model");
  }
}

Eigen::VectorXd ModelA::label_scale(const ServerSpec& server) {
  Eigen::VectorXd s(kOutputs);
  s << server.n_cores, server.n_llc_ways, server.mem_bw_units, server.n_cores,
      server.n_llc_ways;
  return s;
}

Eigen::VectorXd ModelA::encode(const ServerSpec& server, const OaaResult& oaa) {
  Eigen::VectorXd y(kOutputs);
  y << oaa.oaa_cores, oaa.oaa_ways, oaa.oaa_bw_units, oaa.rcliff_cores, oaa.rcliff_ways;
  return y.cwiseQuotient(label_scale(server));
}

OaaPrediction ModelA::predict_raw(std::span<const double> features) const {
  check_input(features, kInputs);
  const Eigen::VectorXd y = net_.forward(features).cwiseProduct(label_scale(server_));
  return {y(0), y(1), y(2), y(3), y(4)};
}

OaaPrediction ModelA::predict(std::span<const double> features) const {
  const OaaPrediction r = predict_raw(features);
  const int c = server_.n_cores, w = server_.n_llc_ways, b = server_.mem_bw_units;
  OaaPrediction p{round_up(r.oaa_cores, c), round_up(r.oaa_ways, w),
                  round_up(r.oaa_bw_units, b), round_up(r.rcliff_cores, c),
                  round_up(r.rcliff_ways, w)};
  p.rcliff_cores = std::min(p.rcliff_cores, p.oaa_cores);
  p.rcliff_ways = std::min(p.rcliff_ways, p.oaa_ways);
  return p;
}

ModelB::ModelB(ServerSpec server, std::uint64_t seed)
    : server_(std::move(server)),
      net_(Mlp::standard(kInputs, 1, Activation::kIdentity, kDropout, seed)) {}

ModelB::ModelB(ServerSpec server, Mlp net) : server_(std::move(server)), net_(std::move(net)) {
  if (net_.input_dim() != kInputs || net_.output_dim() != 1) {
    throw Error(ErrorCode::kStructural, "network shape does not fit the QoS model");
  }
}

double ModelB::encode(double latency_ms, double target_ms) {
  const double ratio = std::clamp(latency_ms / target_ms, 0.0, kRatioCap);
  return std::log1p(ratio) / std::log1p(kRatioCap);
}

double ModelB::decode(double y) {
  return std::clamp(std::expm1(y * std::log1p(kRatioCap)), 0.0, kRatioCap);
}

QosPrediction ModelB::predict(std::span<const double> features) const {
  check_input(features, kInputs);
  const double ratio = decode(net_.forward(features)(0));
  return {ratio, ratio <= 1.0};
}

}  // namespace cosched

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


// Supervised models: the allocation-area regressor (Model-A), the QoS
// regressor (Model-B), their shared training loop, and the shepherd reward.

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cosched/mlp.hpp"
#include "cosched/simenv.hpp"

namespace cosched {

// One sample per column in both matrices.
struct Dataset {
  Eigen::MatrixXd x;
  Eigen::MatrixXd y;

  Eigen::Index size() const { return x.cols(); }
  void validate(int input_dim, int output_dim) const;
};

struct HoldoutSplit {
  std::vector<Eigen::Index> train;
  std::vector<Eigen::Index> test;
};

// Seeded shuffle; the first `train_fraction` of it trains, the rest tests.
HoldoutSplit holdout_split(Eigen::Index n, double train_fraction, std::uint64_t seed);

struct TrainOptions {
  int epochs = 30;
  double learning_rate = 1e-3;
  double lr_decay = 1.0;  // multiplied into the rate after each epoch
  int batch_size = 64;
  double train_fraction = 0.7;
  std::uint64_t seed = 1;
  // Train the identity output layer against per-output z-scored labels and
  // fold the scaling back into it afterwards.
  bool standardize_labels = false;
  // After the epochs, refit the output layer by least squares on the
  // dropout-free hidden activations of the training split.
  bool refit_output_layer = false;
};

struct TrainReport {
  std::vector<double> epoch_loss;
  Eigen::VectorXd test_mae;  // per output, in dataset label units
  Eigen::Index n_train = 0;
  Eigen::Index n_test = 0;
};

struct LossAndGrad {
  double loss = 0.0;
  Mlp::Gradients grads;
};

// Mean over samples and outputs of the squared error.
LossAndGrad mse_loss_and_grad(const Mlp& net, const Eigen::MatrixXd& x,
                              const Eigen::MatrixXd& y, std::mt19937_64* dropout_rng);

Eigen::VectorXd mean_absolute_error(const Mlp& net, const Dataset& data,
                                    std::span<const Eigen::Index> columns);

// Ridge least-squares refit of the last layer (identity activation only).
void refit_output_layer(Mlp& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                        double ridge = 1e-6);

// Throws Error(kTrainingDiverged) on a non-finite loss.
TrainReport train_mlp(Mlp& net, const Dataset& data, const TrainOptions& options);

struct OaaPrediction {
  double oaa_cores = 0.0;
  double oaa_ways = 0.0;
  double oaa_bw_units = 0.0;
  double rcliff_cores = 0.0;
  double rcliff_ways = 0.0;

  Grant oaa_grant() const;
};

class ModelA {
 public:
  static constexpr int kInputs = 12;
  static constexpr int kOutputs = 5;
  static constexpr double kDropout = 0.3;

  ModelA() = default;
  ModelA(ServerSpec server, std::uint64_t seed);
  ModelA(ServerSpec server, Mlp net);

  const ServerSpec& server() const { return server_; }
  Mlp& net() { return net_; }
  const Mlp& net() const { return net_; }

  // Network outputs are labels divided by these platform totals.
  static Eigen::VectorXd label_scale(const ServerSpec& server);
  static Eigen::VectorXd encode(const ServerSpec& server, const OaaResult& oaa);

  OaaPrediction predict_raw(std::span<const double> features) const;
  // Rounded up and clamped to [1, platform total].
  OaaPrediction predict(std::span<const double> features) const;

 private:
  ServerSpec server_;
  Mlp net_;
};

struct QosPrediction {
  double predicted_qos = 0.0;  // latency / target
  bool met = false;
};

class ModelB {
 public:
  static constexpr int kInputs = 14;
  static constexpr double kDropout = 0.3;
  static constexpr double kRatioCap = 10.0;

  ModelB() = default;
  ModelB(ServerSpec server, std::uint64_t seed);
  ModelB(ServerSpec server, Mlp net);

  const ServerSpec& server() const { return server_; }
  Mlp& net() { return net_; }
  const Mlp& net() const { return net_; }

  // The head regresses log(1 + ratio) / log(1 + cap) with ratio clipped to
  // [0, cap]; decode inverts it.
  static double encode(double latency_ms, double target_ms);
  static double decode(double y);

  QosPrediction predict(std::span<const double> features) const;

 private:
  ServerSpec server_;
  Mlp net_;
};

inline constexpr int kResourceKinds = 3;

double reward_qos(bool predicted_met, std::span<const double> latencies_ms,
                  std::span<const double> targets_ms);
// Mean over cores, ways and bandwidth of (1 - LC usage / limit).
double reward_resource(const std::array<double, kResourceKinds>& lc_usage,
                       const std::array<double, kResourceKinds>& limits);
// 2 + reward_resource when every latency meets its target, else reward_qos.
double compute_reward(bool predicted_met, std::span<const double> latencies_ms,
                      std::span<const double> targets_ms,
                      const std::array<double, kResourceKinds>& lc_usage,
                      const std::array<double, kResourceKinds>& limits);

}  // namespace cosched

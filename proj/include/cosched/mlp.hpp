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


#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace cosched {

enum class Activation : int { kIdentity = 0, kRelu = 1, kSoftmax = 2 };

struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;     // out
  Activation activation = Activation::kIdentity;
};

// Fully connected network. Batches are column-major: one sample per column.
class Mlp {
 public:
  static constexpr int kHidden1 = 32;
  static constexpr int kHidden2 = 64;
  static constexpr int kHidden3 = 32;

  Mlp() = default;
  // He-initialized layers of the given widths; ReLU on hidden layers.
  Mlp(const std::vector<int>& dims, Activation output, double dropout_rate,
      std::uint64_t seed);
  // [in, 32, 64, 32, out].
  static Mlp standard(int in, int out, Activation output, double dropout_rate,
                      std::uint64_t seed);

  int input_dim() const;
  int output_dim() const;
  std::vector<int> dims() const;
  double dropout_rate() const { return dropout_rate_; }
  void set_dropout_rate(double rate);
  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  bool same_architecture(const Mlp& other) const;

  // Inference; dropout is never applied.
  Eigen::VectorXd forward(std::span<const double> input) const;
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& x) const;
  // Output layer before its activation.
  Eigen::VectorXd forward_logits(std::span<const double> input) const;

  struct Tape {
    std::vector<Eigen::MatrixXd> inputs;  // input to each layer
    std::vector<Eigen::MatrixXd> pre;     // pre-activation of each layer
    std::vector<Eigen::MatrixXd> masks;   // dropout masks for hidden layers
    Eigen::MatrixXd output;
  };
  struct Gradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> bias;
    Eigen::MatrixXd input;  // d loss / d input
  };

  // Training pass. Dropout masks are drawn from `rng` when it is non-null and
  // the rate is positive.
  Eigen::MatrixXd forward_train(const Eigen::MatrixXd& x, Tape& tape,
                                std::mt19937_64* rng) const;
  // Backpropagates d loss / d output through the tape.
  Gradients backward(const Tape& tape, const Eigen::MatrixXd& output_grad) const;

  std::size_t parameter_count() const;
  std::vector<double> flat_parameters() const;
  void set_flat_parameters(std::span<const double> flat);
  static std::vector<double> flatten(const Gradients& g);

  // this <- tau * online + (1 - tau) * this.
  void soft_update_from(const Mlp& online, double tau);

 private:
  std::vector<DenseLayer> layers_;
  double dropout_rate_ = 0.0;
};

class Adam {
 public:
  Adam() = default;
  Adam(const Mlp& net, double learning_rate, double beta1 = 0.9,
       double beta2 = 0.999, double epsilon = 1e-8);
  void step(Mlp& net, const Mlp::Gradients& grads);
  double learning_rate() const { return lr_; }
  void set_learning_rate(double lr) { lr_ = lr; }

 private:
  double lr_ = 1e-3;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  long t_ = 0;
  std::vector<Eigen::MatrixXd> mw_, vw_;
  std::vector<Eigen::VectorXd> mb_, vb_;
};

Eigen::MatrixXd softmax_columns(const Eigen::MatrixXd& z);

}  // namespace cosched

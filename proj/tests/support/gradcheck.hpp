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


// Central finite-difference gradient checks shared by the unit tests and the
// acceptance binary.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "cosched/ddpg.hpp"
#include "cosched/mlp.hpp"
#include "cosched/models.hpp"

namespace cosched::testing {

inline constexpr double kFdStep = 1e-6;

// ||analytic - numeric|| / max(||analytic|| + ||numeric||, 1e-12).
inline double relative_error(const std::vector<double>& a, const std::vector<double>& n) {
  double diff = 0.0, na = 0.0, nn = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - n[i]) * (a[i] - n[i]);
    na += a[i] * a[i];
    nn += n[i] * n[i];
  }
  return std::sqrt(diff) / std::max(std::sqrt(na) + std::sqrt(nn), 1e-12);
}

inline std::vector<double> numeric_gradient(Mlp& net, const std::function<double()>& loss) {
  std::vector<double> p = net.flat_parameters();
  std::vector<double> g(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double keep = p[i];
    p[i] = keep + kFdStep;
    net.set_flat_parameters(p);
    const double up = loss();
    p[i] = keep - kFdStep;
    net.set_flat_parameters(p);
    const double down = loss();
    p[i] = keep;
    g[i] = (up - down) / (2.0 * kFdStep);
  }
  net.set_flat_parameters(p);
  return g;
}

inline Eigen::MatrixXd uniform_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = u(rng);
  }
  return m;
}

// Zero-initialized biases put a layer fed by an all-dead ReLU layer exactly
// on the kink, where central differences are one-sided.
inline void randomize_biases(Mlp& net, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (auto& l : net.layers()) {
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias(i) = u(rng);
  }
}

// Small random regression instance; returns the relative error.
inline double check_mlp_loss(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> width(2, 6);
  const int in = width(rng), out = width(rng);
  Mlp net({in, width(rng), width(rng), out}, Activation::kIdentity, 0.0, seed);
  randomize_biases(net, rng);
  const Eigen::MatrixXd x = uniform_matrix(in, 5, rng);
  const Eigen::MatrixXd y = uniform_matrix(out, 5, rng);
  const auto analytic = Mlp::flatten(mse_loss_and_grad(net, x, y, nullptr).grads);
  const auto numeric =
      numeric_gradient(net, [&] { return mse_loss_and_grad(net, x, y, nullptr).loss; });
  return relative_error(analytic, numeric);
}

inline Batch random_batch(int state_dim, int n, std::mt19937_64& rng) {
  Batch b;
  b.states = uniform_matrix(state_dim, n, rng);
  b.next_states = uniform_matrix(state_dim, n, rng);
  b.actions = softmax_columns(uniform_matrix(kActionCount, n, rng));
  b.rewards = uniform_matrix(n, 1, rng).col(0);
  return b;
}

inline double check_critic_loss(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> width(2, 6);
  const int sd = width(rng);
  Mlp critic({sd + kActionCount, width(rng), width(rng), 1}, Activation::kIdentity, 0.0, seed);
  randomize_biases(critic, rng);
  const Batch batch = random_batch(sd, 6, rng);
  const Eigen::VectorXd targets = uniform_matrix(6, 1, rng).col(0);
  const auto analytic = Mlp::flatten(critic_loss_and_grad(critic, batch, targets).grads);
  const auto numeric = numeric_gradient(
      critic, [&] { return critic_loss_and_grad(critic, batch, targets).loss; });
  return relative_error(analytic, numeric);
}

inline double check_actor_loss(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> width(2, 6);
  const int sd = width(rng);
  Mlp actor({sd, width(rng), width(rng), kActionCount}, Activation::kSoftmax, 0.0, seed);
  Mlp critic({sd + kActionCount, width(rng), width(rng), 1}, Activation::kIdentity, 0.0,
             seed + 1000);
  randomize_biases(actor, rng);
  randomize_biases(critic, rng);
  const Eigen::MatrixXd states = uniform_matrix(sd, 6, rng);
  // Unmasked and restricted the way the scheduler does it, each with and
  // without the entropy term.
  Eigen::MatrixXd masks(kActionCount, states.cols());
  std::bernoulli_distribution under(0.5);
  for (Eigen::Index j = 0; j < masks.cols(); ++j) {
    const ActionMask m = shepherd_actions(under(rng));
    for (int i = 0; i < kActionCount; ++i) masks(i, j) = m[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
  }
  double worst = 0.0;
  for (const Eigen::MatrixXd& mk : {Eigen::MatrixXd(), masks}) {
    for (double beta : {0.0, 0.5}) {
      const auto analytic =
          Mlp::flatten(actor_loss_and_grad(actor, critic, states, mk, beta).grads);
      const auto numeric = numeric_gradient(
          actor, [&] { return actor_loss_and_grad(actor, critic, states, mk, beta).loss; });
      worst = std::max(worst, relative_error(analytic, numeric));
    }
  }
  return worst;
}

}  // namespace cosched::testing

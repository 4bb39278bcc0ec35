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


#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "../support/gradcheck.hpp"
#include "../support/reward_table.hpp"
#include "cosched/error.hpp"
#include "cosched/models.hpp"
#include "cosched/param_io.hpp"
#include "doctest.h"

using namespace cosched;
using cosched::testing::uniform_matrix;

TEST_CASE("holdout split partitions the indices") {
  const auto s = holdout_split(100, 0.7, 3);
  CHECK(s.train.size() == 70);
  CHECK(s.test.size() == 30);
  std::set<Eigen::Index> all(s.train.begin(), s.train.end());
  all.insert(s.test.begin(), s.test.end());
  CHECK(all.size() == 100);
  CHECK(*all.begin() == 0);
  CHECK(*all.rbegin() == 99);
  CHECK(holdout_split(100, 0.7, 3).train == s.train);
  CHECK(holdout_split(100, 0.7, 4).train != s.train);
  CHECK_THROWS_AS(holdout_split(10, 0.0, 1), Error);
}

TEST_CASE("dataset validation") {
  Dataset d{Eigen::MatrixXd::Zero(3, 4), Eigen::MatrixXd::Zero(2, 4)};
  CHECK_NOTHROW(d.validate(3, 2));
  CHECK_THROWS_AS(d.validate(4, 2), Error);
  d.y = Eigen::MatrixXd::Zero(2, 3);
  CHECK_THROWS_AS(d.validate(3, 2), Error);
}

namespace {

// y = A x + b with a mild nonlinearity on one output.
Dataset smooth_dataset(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Dataset d;
  d.x = (uniform_matrix(3, n, rng).array() + 1.0) / 2.0;
  d.y.resize(2, n);
  for (int j = 0; j < n; ++j) {
    d.y(0, j) = 20.0 + 8.0 * d.x(0, j) - 3.0 * d.x(1, j);
    d.y(1, j) = 5.0 * d.x(2, j) * d.x(2, j) + d.x(0, j);
  }
  return d;
}

}  // namespace

TEST_CASE("training fits a smooth map") {
  const Dataset d = smooth_dataset(600, 1);
  TrainOptions o;
  o.epochs = 40;
  o.learning_rate = 3e-3;
  o.standardize_labels = true;
  o.refit_output_layer = true;
  Mlp net({3, 16, 16, 2}, Activation::kIdentity, 0.0, 1);
  const TrainReport r = train_mlp(net, d, o);
  CHECK(r.n_train == 420);
  CHECK(r.n_test == 180);
  CHECK(r.epoch_loss.size() == 40);
  CHECK(r.epoch_loss.back() < r.epoch_loss.front());
  CHECK(r.test_mae(0) < 0.3);
  CHECK(r.test_mae(1) < 0.3);
  // Reported MAE is on the original label scale.
  const auto split = holdout_split(d.size(), o.train_fraction, o.seed);
  CHECK(mean_absolute_error(net, d, split.test)(0) == doctest::Approx(r.test_mae(0)));
}

TEST_CASE("training is reproducible") {
  const Dataset d = smooth_dataset(200, 2);
  TrainOptions o;
  o.epochs = 5;
  o.standardize_labels = true;
  Mlp a({3, 8, 2}, Activation::kIdentity, 0.2, 3);
  Mlp b = a;
  train_mlp(a, d, o);
  train_mlp(b, d, o);
  CHECK(a.flat_parameters() == b.flat_parameters());
}

TEST_CASE("diverging training is reported") {
  Dataset d = smooth_dataset(100, 3);
  d.y.row(0).setConstant(std::numeric_limits<double>::infinity());
  TrainOptions o;
  o.epochs = 2;
  Mlp net({3, 4, 2}, Activation::kIdentity, 0.0, 1);
  try {
    train_mlp(net, d, o);
    FAIL("expected divergence");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kTrainingDiverged);
  }
}

TEST_CASE("output refit recovers a perturbed last layer") {
  std::mt19937_64 rng(7);
  Mlp truth({4, 12, 3}, Activation::kIdentity, 0.0, 7);
  const Eigen::MatrixXd x = uniform_matrix(4, 200, rng);
  const Eigen::MatrixXd y = truth.forward_batch(x);
  Mlp net = truth;
  net.layers().back().weights.array() += 0.5;
  net.layers().back().bias.array() -= 1.0;
  CHECK((net.forward_batch(x) - y).cwiseAbs().maxCoeff() > 0.1);
  refit_output_layer(net, x, y, 1e-12);
  CHECK((net.forward_batch(x) - y).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("allocation model rounds up and clamps") {
  const auto server = ServerSpec::preset("server1");
  ModelA m(server, 1);
  auto& last = m.net().layers().back();
  last.weights.setZero();
  last.bias << 10.2 / 36.0, 25.0 / 20.0, -0.3, 12.0 / 36.0, 3.0 / 20.0;
  const std::vector<double> x(ModelA::kInputs, 0.5);
  const auto p = m.predict(x);
  CHECK(p.oaa_cores == 11);
  CHECK(p.oaa_ways == 20);
  CHECK(p.oaa_bw_units == 1);
  CHECK(p.rcliff_cores == 11);  // never above the OAA
  CHECK(p.rcliff_ways == 3);
  CHECK(p.oaa_grant() == Grant{11, 20, 1});
  CHECK_THROWS_AS(m.predict(std::vector<double>(3, 0.0)), Error);
  OaaResult oaa{true, 18, 10, 5, 17, 10, 12.0};
  const Eigen::VectorXd e = ModelA::encode(server, oaa);
  CHECK(e(0) == 0.5);
  CHECK(e(2) == 0.5);
}

TEST_CASE("QoS model link is monotone and invertible") {
  double prev = -1.0;
  for (double r = 0.0; r <= 10.0; r += 0.25) {
    const double y = ModelB::encode(r * 40.0, 40.0);
    CHECK(y > prev);
    prev = y;
    CHECK(ModelB::decode(y) == doctest::Approx(r));
  }
  CHECK(ModelB::encode(1e9, 1.0) == doctest::Approx(1.0));
  CHECK(ModelB::decode(-3.0) == 0.0);
  ModelB m(ServerSpec::preset("server2"), 2);
  auto& last = m.net().layers().back();
  last.weights.setZero();
  last.bias << ModelB::encode(0.9, 1.0);
  const auto q = m.predict(std::vector<double>(ModelB::kInputs, 0.1));
  CHECK(q.predicted_qos == doctest::Approx(0.9));
  CHECK(q.met);
}

TEST_CASE("model files round-trip") {
  const auto server = ServerSpec::preset("server3");
  const ModelA a(server, 3);
  const ModelA a2 = decode_model_a(encode_model_a(a));
  CHECK(a2.server().platform_id == "server3");
  CHECK(a2.net().flat_parameters() == a.net().flat_parameters());
  const ModelB b(server, 4);
  const ModelB b2 = decode_model_b(encode_model_b(b));
  CHECK(b2.net().flat_parameters() == b.net().flat_parameters());
  CHECK_THROWS_AS(decode_model_b(encode_model_a(a)), Error);
}

TEST_CASE("reward matches the hand-derived table") {
  const auto& table = cosched::testing::reward_table();
  REQUIRE(table.size() >= 20);
  for (const auto& c : table) {
    const double r = compute_reward(c.predicted_met, c.latency_ms, c.target_ms, c.usage,
                                    cosched::testing::kRewardLimits);
    CHECK(r == c.expected);
    CHECK(r >= 0.0);
    CHECK(r <= 3.0);
  }
}

TEST_CASE("reward argument checks") {
  const std::vector<double> one = {1.0};
  const std::vector<double> two = {1.0, 2.0};
  CHECK_THROWS_AS(compute_reward(true, one, two, {0, 0, 0}, {1, 1, 1}), Error);
  CHECK_THROWS_AS(compute_reward(true, {}, {}, {0, 0, 0}, {1, 1, 1}), Error);
  CHECK_THROWS_AS(reward_resource({0, 0, 0}, {1, 0, 1}), Error);
}

// Any met configuration outranks any violating one.
TEST_CASE("met rewards dominate violating rewards") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const std::vector<double> tgt = {10.0, 20.0};
    const std::vector<double> met = {10.0 * u(rng), 20.0 * u(rng)};
    const std::vector<double> bad = {10.0 + 50.0 * u(rng) + 1e-9, 20.0 * u(rng)};
    const std::array<double, 3> use = {36.0 * u(rng), 20.0 * u(rng), 10.0 * u(rng)};
    const double r_met = compute_reward(false, met, tgt, use, {36, 20, 10});
    const double r_bad = compute_reward(true, bad, tgt, use, {36, 20, 10});
    CHECK(r_met >= 2.0);
    CHECK(r_bad < 2.0);
  }
}

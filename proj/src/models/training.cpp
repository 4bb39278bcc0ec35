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
#include <numeric>

#include "cosched/error.hpp"
#include "cosched/models.hpp"

namespace cosched {

void Dataset::validate(int input_dim, int output_dim) const {
  if (x.cols() == 0) throw Error(ErrorCode::kInvalidArgument, "empty dataset");
  if (x.cols() != y.cols()) {
    throw Error(ErrorCode::kStructural, "feature and label counts differ");
  }
  if (x.rows() != input_dim || y.rows() != output_dim) {
    throw Error(ErrorCode::kStructural, "dataset arity does not match the network");
  }
}

HoldoutSplit holdout_split(Eigen::Index n, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "train fraction must be in (0,1]");
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * n));
  HoldoutSplit s;
  s.train.assign(order.begin(), order.begin() + n_train);
  s.test.assign(order.begin() + n_train, order.end());
  return s;
}

LossAndGrad mse_loss_and_grad(const Mlp& net, const Eigen::MatrixXd& x,
                              const Eigen::MatrixXd& y, std::mt19937_64* dropout_rng) {
  Mlp::Tape tape;
  const Eigen::MatrixXd out = net.forward_train(x, tape, dropout_rng);
  if (out.rows() != y.rows() || out.cols() != y.cols()) {
    throw Error(ErrorCode::kStructural, "label shape does not match network output");
  }
  const Eigen::MatrixXd diff = out - y;
  const double scale = 1.0 / static_cast<double>(diff.size());
  LossAndGrad r;
  r.loss = diff.squaredNorm() * scale;
  r.grads = net.backward(tape, 2.0 * scale * diff);
  return r;
}

Eigen::VectorXd mean_absolute_error(const Mlp& net, const Dataset& data,
                                    std::span<const Eigen::Index> columns) {
  Eigen::VectorXd total = Eigen::VectorXd::Zero(data.y.rows());
  if (columns.empty()) return total;
  constexpr std::size_t kChunk = 4096;
  for (std::size_t start = 0; start < columns.size(); start += kChunk) {
    const std::size_t end = std::min(columns.size(), start + kChunk);
    std::vector<Eigen::Index> idx(columns.begin() + start, columns.begin() + end);
    const Eigen::MatrixXd pred = net.forward_batch(data.x(Eigen::all, idx));
    total += (pred - data.y(Eigen::all, idx)).cwiseAbs().rowwise().sum();
  }
  return total / static_cast<double>(columns.size());
}

namespace {

void scale_output_layer(Mlp& net, const Eigen::VectorXd& gain, const Eigen::VectorXd& offset) {
  DenseLayer& out = net.layers().back();
  out.weights = gain.asDiagonal() * out.weights;
  out.bias = gain.cwiseProduct(out.bias) + offset;
}

Eigen::MatrixXd last_hidden(const Mlp& net, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd h = x;
  const auto& layers = net.layers();
  for (std::size_t i = 0; i + 1 < layers.size(); ++i) {
    h = ((layers[i].weights * h).colwise() + layers[i].bias).cwiseMax(0.0);
  }
  return h;
}

}  // namespace

void refit_output_layer(Mlp& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                        double ridge) {
  if (net.layers().empty() || net.layers().back().activation != Activation::kIdentity) {
    throw Error(ErrorCode::kStructural, "output refit needs an identity output layer");
  }
  if (x.cols() != y.cols() || y.rows() != net.output_dim() || x.cols() == 0) {
    throw Error(ErrorCode::kStructural, "refit data does not match the network");
  }
  const Eigen::MatrixXd h = last_hidden(net, x);
  const Eigen::Index k = h.rows();
  Eigen::MatrixXd a(k + 1, h.cols());
  a << h, Eigen::RowVectorXd::Ones(h.cols());
  Eigen::MatrixXd gram = a * a.transpose();
  gram.diagonal().array() += ridge * static_cast<double>(h.cols());
  const Eigen::MatrixXd w = gram.ldlt().solve(a * y.transpose()).transpose();
  if (!w.allFinite()) throw Error(ErrorCode::kTrainingDiverged, "output refit is singular");
  DenseLayer& out = net.layers().back();
  out.weights = w.leftCols(k);
  out.bias = w.col(k);
}

TrainReport train_mlp(Mlp& net, const Dataset& data, const TrainOptions& options) {
  data.validate(net.input_dim(), net.output_dim());
  if (options.epochs < 0 || options.batch_size < 1 || !(options.learning_rate > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "bad training options");
  }
  const HoldoutSplit split = holdout_split(data.size(), options.train_fraction, options.seed);
  TrainReport report;
  report.n_train = static_cast<Eigen::Index>(split.train.size());
  report.n_test = static_cast<Eigen::Index>(split.test.size());
  std::mt19937_64 rng(options.seed ^ 0x7472616eULL);

  const Dataset* fit = &data;
  Dataset standardized;
  Eigen::VectorXd mean, sd;
  const bool standardize = options.standardize_labels && !split.train.empty();
  if (standardize) {
    if (net.layers().back().activation != Activation::kIdentity) {
      throw Error(ErrorCode::kStructural, "label standardization needs an identity output");
    }
    const Eigen::MatrixXd y = data.y(Eigen::all, split.train);
    mean = y.rowwise().mean();
    sd = ((y.colwise() - mean).array().square().rowwise().mean()).sqrt().max(1e-12).matrix();
    standardized.x = data.x;
    standardized.y = (data.y.colwise() - mean).array().colwise() / sd.array();
    scale_output_layer(net, sd.cwiseInverse(), -mean.cwiseQuotient(sd));
    fit = &standardized;
  }

  Adam adam(net, options.learning_rate);
  std::vector<Eigen::Index> order = split.train;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
      const std::size_t end = std::min(order.size(), start + options.batch_size);
      std::vector<Eigen::Index> idx(order.begin() + start, order.begin() + end);
      const LossAndGrad lg =
          mse_loss_and_grad(net, fit->x(Eigen::all, idx), fit->y(Eigen::all, idx), &rng);
      if (!std::isfinite(lg.loss)) {
        throw Error(ErrorCode::kTrainingDiverged,
                    "non-finite training loss at epoch " + std::to_string(epoch + 1) +
                        ", batch " + std::to_string(batches + 1));
      }
      adam.step(net, lg.grads);
      sum += lg.loss;
      ++batches;
    }
    report.epoch_loss.push_back(batches ? sum / batches : 0.0);
    adam.set_learning_rate(adam.learning_rate() * options.lr_decay);
  }
  if (standardize) scale_output_layer(net, sd, mean);
  if (options.refit_output_layer && !split.train.empty()) {
    refit_output_layer(net, data.x(Eigen::all, split.train), data.y(Eigen::all, split.train));
  }
  report.test_mae = mean_absolute_error(net, data, split.test);
  return report;
}

}  // namespace cosched

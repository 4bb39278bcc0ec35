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


#include "cosched/mlp.hpp"

#include <cmath>

#include "cosched/error.hpp"

namespace cosched {
namespace {

Eigen::MatrixXd activate(const Eigen::MatrixXd& z, Activation a) {
  switch (a) {
    case Activation::kRelu: return z.cwiseMax(0.0);
    case Activation::kSoftmax: return softmax_columns(z);
    case Activation::kIdentity: break;
  }
  return z;
}

}  // namespace

Eigen::MatrixXd softmax_columns(const Eigen::MatrixXd& z) {
  Eigen::MatrixXd out(z.rows(), z.cols());
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    const double m = z.col(j).maxCoeff();
    Eigen::VectorXd e = (z.col(j).array() - m).exp();
    out.col(j) = e / e.sum();
  }
  return out;
}

Mlp::Mlp(const std::vector<int>& dims, Activation output, double dropout_rate,
         std::uint64_t seed) {
  if (dims.size() < 2) {
    throw Error(ErrorCode::kStructural, "network needs at least two layer widths");
  }
  for (int d : dims) {
    if (d < 1) throw Error(ErrorCode::kStructural, "layer width must be positive");
  }
  set_dropout_rate(dropout_rate);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const bool last = i + 2 == dims.size();
    DenseLayer layer;
    layer.activation = last ? output : Activation::kRelu;
    const double scale = std::sqrt((last ? 1.0 : 2.0) / dims[i]);
    layer.weights.resize(dims[i + 1], dims[i]);
    for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
      for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
        layer.weights(r, c) = scale * normal(rng);
      }
    }
    layer.bias = Eigen::VectorXd::Zero(dims[i + 1]);
    layers_.push_back(std::move(layer));
  }
}

Mlp Mlp::standard(int in, int out, Activation output, double dropout_rate,
                  std::uint64_t seed) {
  return Mlp({in, kHidden1, kHidden2, kHidden3, out}, output, dropout_rate, seed);
}

int Mlp::input_dim() const {
  return layers_.empty() ? 0 : static_cast<int>(layers_.front().weights.cols());
}

int Mlp::output_dim() const {
  return layers_.empty() ? 0 : static_cast<int>(layers_.back().weights.rows());
}

std::vector<int> Mlp::dims() const {
  std::vector<int> d;
  if (layers_.empty()) return d;
  d.push_back(input_dim());
  for (const auto& l : layers_) d.push_back(static_cast<int>(l.weights.rows()));
  return d;
}

void Mlp::set_dropout_rate(double rate) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "dropout rate must be in [0,1)");
  }
  dropout_rate_ = rate;
}

bool Mlp::same_architecture(const Mlp& other) const {
  if (dims() != other.dims()) return false;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (layers_[i].activation != other.layers_[i].activation) return false;
  }
  return true;
}

Eigen::MatrixXd Mlp::forward_batch(const Eigen::MatrixXd& x) const {
  if (x.rows() != input_dim()) {
    throw Error(ErrorCode::kStructural,
                "input width " + std::to_string(x.rows()) + " does not match network input " +
                    std::to_string(input_dim()));
  }
  Eigen::MatrixXd a = x;
  for (const auto& l : layers_) {
    Eigen::MatrixXd z = l.weights * a;
    z.colwise() += l.bias;
    a = activate(z, l.activation);
  }
  return a;
}

Eigen::VectorXd Mlp::forward(std::span<const double> input) const {
  Eigen::Map<const Eigen::VectorXd> x(input.data(), static_cast<Eigen::Index>(input.size()));
  return forward_batch(x);
}

Eigen::VectorXd Mlp::forward_logits(std::span<const double> input) const {
  if (static_cast<int>(input.size()) != input_dim()) {
    throw Error(ErrorCode::kStructural, "input width does not match network input");
  }
  Eigen::VectorXd a =
      Eigen::Map<const Eigen::VectorXd>(input.data(), static_cast<Eigen::Index>(input.size()));
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    Eigen::VectorXd z = layers_[i].weights * a + layers_[i].bias;
    if (i + 1 == layers_.size()) return z;
    a = activate(z, layers_[i].activation);
  }
  return a;
}

Eigen::MatrixXd Mlp::forward_train(const Eigen::MatrixXd& x, Tape& tape,
                                   std::mt19937_64* rng) const {
  if (x.rows() != input_dim()) {
    throw Error(ErrorCode::kStructural, "input width does not match network input");
  }
  tape.inputs.clear();
  tape.pre.clear();
  tape.masks.clear();
  const bool drop = rng != nullptr && dropout_rate_ > 0.0;
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Eigen::MatrixXd a = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    tape.inputs.push_back(a);
    Eigen::MatrixXd z = l.weights * a;
    z.colwise() += l.bias;
    a = activate(z, l.activation);
    tape.pre.push_back(std::move(z));
    const bool hidden = i + 1 < layers_.size();
    if (hidden && drop) {
      Eigen::MatrixXd mask(a.rows(), a.cols());
      const double keep = 1.0 / (1.0 - dropout_rate_);
      for (Eigen::Index c = 0; c < mask.cols(); ++c) {
        for (Eigen::Index r = 0; r < mask.rows(); ++r) {
          mask(r, c) = uniform(*rng) >= dropout_rate_ ? keep : 0.0;
        }
      }
      a = a.cwiseProduct(mask);
      tape.masks.push_back(std::move(mask));
    } else {
      tape.masks.emplace_back();
    }
  }
  tape.output = a;
  return a;
}

Mlp::Gradients Mlp::backward(const Tape& tape, const Eigen::MatrixXd& output_grad) const {
  if (tape.pre.size() != layers_.size()) {
    throw Error(ErrorCode::kStructural, "tape does not belong to this network");
  }
  Gradients g;
  g.weights.resize(layers_.size());
  g.bias.resize(layers_.size());
  Eigen::MatrixXd grad = output_grad;
  for (std::size_t k = layers_.size(); k-- > 0;) {
    const auto& l = layers_[k];
    if (tape.masks[k].size() > 0) grad = grad.cwiseProduct(tape.masks[k]);
    Eigen::MatrixXd dz;
    switch (l.activation) {
      case Activation::kRelu:
        dz = grad.cwiseProduct((tape.pre[k].array() > 0.0).cast<double>().matrix());
        break;
      case Activation::kSoftmax: {
        const Eigen::MatrixXd y = softmax_columns(tape.pre[k]);
        const Eigen::RowVectorXd dot = y.cwiseProduct(grad).colwise().sum();
        dz = y.cwiseProduct(grad - Eigen::MatrixXd::Ones(y.rows(), 1) * dot);
        break;
      }
      case Activation::kIdentity:
        dz = grad;
        break;
    }
    g.weights[k] = dz * tape.inputs[k].transpose();
    g.bias[k] = dz.rowwise().sum();
    grad = l.weights.transpose() * dz;
  }
  g.input = std::move(grad);
  return g;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weights.size() + l.bias.size();
  return n;
}

std::vector<double> Mlp::flat_parameters() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const auto& l : layers_) {
    flat.insert(flat.end(), l.weights.data(), l.weights.data() + l.weights.size());
    flat.insert(flat.end(), l.bias.data(), l.bias.data() + l.bias.size());
  }
  return flat;
}

void Mlp::set_flat_parameters(std::span<const double> flat) {
  if (flat.size() != parameter_count()) {
    throw Error(ErrorCode::kStructural, "parameter vector length mismatch");
  }
  std::size_t pos = 0;
  for (auto& l : layers_) {
    std::copy_n(flat.data() + pos, l.weights.size(), l.weights.data());
    pos += l.weights.size();
    std::copy_n(flat.data() + pos, l.bias.size(), l.bias.data());
    pos += l.bias.size();
  }
}

std::vector<double> Mlp::flatten(const Gradients& g) {
  std::vector<double> flat;
  for (std::size_t k = 0; k < g.weights.size(); ++k) {
    flat.insert(flat.end(), g.weights[k].data(), g.weights[k].data() + g.weights[k].size());
    flat.insert(flat.end(), g.bias[k].data(), g.bias[k].data() + g.bias[k].size());
  }
  return flat;
}

void Mlp::soft_update_from(const Mlp& online, double tau) {
  if (!same_architecture(online)) {
    throw Error(ErrorCode::kStructural, "soft update between different architectures");
  }
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "tau must be in [0,1]");
  }
  if (tau == 0.0) return;
  if (tau == 1.0) {
    layers_ = online.layers_;
    return;
  }
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    layers_[k].weights = tau * online.layers_[k].weights + (1.0 - tau) * layers_[k].weights;
    layers_[k].bias = tau * online.layers_[k].bias + (1.0 - tau) * layers_[k].bias;
  }
}

Adam::Adam(const Mlp& net, double learning_rate, double beta1, double beta2,
           double epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {
  for (const auto& l : net.layers()) {
    mw_.push_back(Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()));
    vw_.push_back(Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()));
    mb_.push_back(Eigen::VectorXd::Zero(l.bias.size()));
    vb_.push_back(Eigen::VectorXd::Zero(l.bias.size()));
  }
}

void Adam::step(Mlp& net, const Mlp::Gradients& grads) {
  auto& layers = net.layers();
  if (layers.size() != mw_.size() || grads.weights.size() != mw_.size()) {
    throw Error(ErrorCode::kStructural, "optimizer state does not match network");
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  const double step = lr_ * std::sqrt(c2) / c1;
  const double eps = eps_ * std::sqrt(c2);
  for (std::size_t k = 0; k < layers.size(); ++k) {
    mw_[k] = beta1_ * mw_[k] + (1.0 - beta1_) * grads.weights[k];
    vw_[k] = beta2_ * vw_[k] + (1.0 - beta2_) * grads.weights[k].cwiseAbs2();
    layers[k].weights.array() -= step * mw_[k].array() / (vw_[k].array().sqrt() + eps);
    mb_[k] = beta1_ * mb_[k] + (1.0 - beta1_) * grads.bias[k];
    vb_[k] = beta2_ * vb_[k] + (1.0 - beta2_) * grads.bias[k].cwiseAbs2();
    layers[k].bias.array() -= step * mb_[k].array() / (vb_[k].array().sqrt() + eps);
  }
}

}  // namespace cosched

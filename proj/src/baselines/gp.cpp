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
#include <numbers>

#include "cosched/baselines.hpp"
#include "cosched/error.hpp"

namespace cosched {
namespace {

constexpr double kInitialLength = 0.3;
constexpr double kLengthGrid[] = {0.05, 0.1, 0.2, 0.3, 0.5, 0.8, 1.2, 2.0};
constexpr int kSearchPasses = 2;

}  // namespace

double GaussianProcess::kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  const Eigen::VectorXd d = (a - b).cwiseQuotient(length_);
  return std::exp(-0.5 * d.squaredNorm());
}

bool GaussianProcess::factor(const Eigen::VectorXd& length, double* lml) {
  length_ = length;
  const auto n = static_cast<Eigen::Index>(x_.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      k(i, j) = k(j, i) = kernel(x_[static_cast<std::size_t>(i)], x_[static_cast<std::size_t>(j)]);
    }
  }
  for (double jitter = 0.0; jitter <= 1e-1; jitter = jitter == 0.0 ? 1e-10 : jitter * 10.0) {
    Eigen::MatrixXd kj = k;
    kj.diagonal().array() += noise_ + jitter;
    llt_.compute(kj);
    if (llt_.info() != Eigen::Success) continue;
    const Eigen::MatrixXd l = llt_.matrixL();
    if ((l.diagonal().array() <= 0.0).any()) continue;
    jitter_ = jitter;
    alpha_ = llt_.solve(y_);
    *lml = -0.5 * y_.dot(alpha_) - l.diagonal().array().log().sum() -
           0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
    return true;
  }
  return false;
}

void GaussianProcess::fit(const std::vector<Eigen::VectorXd>& x, const std::vector<double>& y,
                          bool optimize_length_scales) {
  if (x.empty() || x.size() != y.size()) {
    throw Error(ErrorCode::kInvalidArgument, "gp: need matching non-empty x and y");
  }
  const Eigen::Index dim = x.front().size();
  for (const auto& xi : x) {
    if (xi.size() != dim) throw Error(ErrorCode::kInvalidArgument, "gp: ragged inputs");
  }
  x_ = x;
  const auto n = static_cast<Eigen::Index>(y.size());
  Eigen::VectorXd raw(n);
  for (Eigen::Index i = 0; i < n; ++i) raw(i) = y[static_cast<std::size_t>(i)];
  y_mean_ = raw.mean();
  const double var = (raw.array() - y_mean_).square().mean();
  y_scale_ = var > 1e-24 ? std::sqrt(var) : 1.0;
  y_ = (raw.array() - y_mean_) / y_scale_;

  Eigen::VectorXd best = Eigen::VectorXd::Constant(dim, kInitialLength);
  double best_lml = 0.0;
  if (!factor(best, &best_lml)) {
    throw Error(ErrorCode::kInternal, "gp: covariance factorization failed");
  }
  if (optimize_length_scales && n > 1) {
    for (int pass = 0; pass < kSearchPasses; ++pass) {
      for (Eigen::Index d = 0; d < dim; ++d) {
        for (double l : kLengthGrid) {
          Eigen::VectorXd trial = best;
          trial(d) = l;
          double lml = 0.0;
          if (factor(trial, &lml) && lml > best_lml + 1e-12) {
            best_lml = lml;
            best = trial;
          }
        }
      }
    }
  }
  factor(best, &lml_);
}

GaussianProcess::Posterior GaussianProcess::predict(const Eigen::VectorXd& x) const {
  if (x_.empty()) throw Error(ErrorCode::kInvalidArgument, "gp: predict before fit");
  const auto n = static_cast<Eigen::Index>(x_.size());
  Eigen::VectorXd ks(n);
  for (Eigen::Index i = 0; i < n; ++i) ks(i) = kernel(x_[static_cast<std::size_t>(i)], x);
  const double mean = ks.dot(alpha_);
  const Eigen::VectorXd v = llt_.matrixL().solve(ks);
  const double var = std::max(0.0, 1.0 - v.squaredNorm());
  return {y_mean_ + y_scale_ * mean, y_scale_ * y_scale_ * var};
}

double expected_improvement(double mean, double sd, double best) {
  const double gain = mean - best;
  if (!(sd > 0.0)) return std::max(0.0, gain);
  const double z = gain / sd;
  const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  return gain * cdf + sd * pdf;
}

}  // namespace cosched

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


// Comparator schedulers: a one-dimension-at-a-time heuristic and a
// Gaussian-process Bayesian optimizer over share vectors.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cosched/scheduler.hpp"

namespace cosched {

struct HeuristicConfig {
  double interval_ms = 500.0;
  // Resource trial order: 0 cores, 1 ways, 2 bandwidth.
  std::array<int, 3> priority = {0, 1, 2};
  double improvement_threshold = 0.05;
};

class HeuristicScheduler : public Scheduler {
 public:
  explicit HeuristicScheduler(HeuristicConfig config = {});
  std::string_view name() const override { return "heuristic"; }
  void on_tick(Simulator& sim, const Snapshot& snap, DecisionLog& log) override;
  // One invocation regardless of the interval. Returns true if it changed
  // the allocation.
  bool step(Simulator& sim, const Snapshot& snap, DecisionLog& log);

 private:
  void equal_partition(Simulator& sim, const Snapshot& snap, DecisionLog& log);
  void admit(Simulator& sim, const Snapshot& snap, DecisionLog& log);

  HeuristicConfig config_;
  double next_ms_ = 0.0;
  bool partitioned_ = false;
  int dim_ = 0;
  std::string last_service_;
  double last_ratio_ = 0.0;
};

// Zero-mean GP on standardized targets with a squared-exponential kernel
// whose per-dimension length scales maximize the marginal likelihood.
class GaussianProcess {
 public:
  struct Posterior {
    double mean = 0.0;
    double variance = 0.0;
  };

  void fit(const std::vector<Eigen::VectorXd>& x, const std::vector<double>& y,
           bool optimize_length_scales = true);
  Posterior predict(const Eigen::VectorXd& x) const;
  double log_marginal_likelihood() const { return lml_; }
  const Eigen::VectorXd& length_scales() const { return length_; }
  double jitter() const { return jitter_; }

 private:
  double kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;
  bool factor(const Eigen::VectorXd& length, double* lml);

  std::vector<Eigen::VectorXd> x_;
  Eigen::VectorXd y_;  // standardized
  double y_mean_ = 0.0;
  double y_scale_ = 1.0;
  Eigen::VectorXd length_;
  double noise_ = 1e-6;
  double jitter_ = 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
  double lml_ = 0.0;
};

double expected_improvement(double mean, double sd, double best);

struct BoConfig {
  double interval_ms = 2000.0;
  int initial_samples = 5;
  int max_samples = 40;
  double ei_threshold = 0.01;  // relative to |best objective|
  int candidates = 512;
  std::uint64_t seed = 1;
};

struct BoSample {
  Eigen::VectorXd point;
  Allocation allocation;
  double objective = 0.0;
  double acquisition = 0.0;
};

class BoScheduler : public Scheduler {
 public:
  explicit BoScheduler(BoConfig config = {});
  std::string_view name() const override { return "bo"; }
  void on_tick(Simulator& sim, const Snapshot& snap, DecisionLog& log) override;

  const std::vector<BoSample>& samples() const { return samples_; }
  bool terminated() const { return terminated_; }

  // Feasible: 1 + BE throughput. Otherwise mean min(1, target / latency) - 1.
  static double objective(const Snapshot& snap);
  // Share vector (cores, ways, bw per LC) to a valid allocation.
  static Allocation decode(const Eigen::VectorXd& x, const std::vector<std::string>& lc_ids,
                           const std::vector<std::string>& be_ids, const ServerSpec& server);

 private:
  void restart(const std::vector<std::string>& lc_ids, const std::vector<std::string>& be_ids);
  Eigen::VectorXd propose(double* acquisition);

  BoConfig config_;
  std::mt19937_64 rng_;
  double next_ms_ = 0.0;
  std::vector<std::string> lc_ids_;
  std::vector<std::string> be_ids_;
  std::vector<BoSample> samples_;
  std::optional<BoSample> in_flight_;
  bool terminated_ = false;
};

}  // namespace cosched

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


// Actor-critic shepherd agent (Model-C) with target networks and a bounded
// FIFO experience pool.

#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cosched/mlp.hpp"
#include "cosched/models.hpp"

namespace cosched {

enum class SchedulingAction : int {
  kCoresUp = 0,
  kCoresDown = 1,
  kWaysUp = 2,
  kWaysDown = 3,
  kBwUp = 4,
  kBwDown = 5,
  kIdle = 6,
};
inline constexpr int kActionCount = 7;

std::string_view action_name(SchedulingAction a);
// +1 / -1 step for a grant; zero for idle.
Grant action_delta(SchedulingAction a);

// Actions the agent may choose from.
using ActionMask = std::array<bool, kActionCount>;
inline constexpr ActionMask kAllActions = {true, true, true, true, true, true, true};
// The three scale-up actions for an under-provisioned service; the three
// scale-down actions and idle otherwise.
ActionMask shepherd_actions(bool under_provisioned);

struct AgentConfig {
  int state_dim = 7;
  double gamma = 0.99;
  double tau = 0.001;
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  double noise_mean = 0.0;
  double noise_sigma = 0.1;
  double noise_decay = 0.99;  // per episode
  // Weight of the masked policy's entropy in the actor loss.
  double entropy_weight = 0.01;
  std::size_t pool_capacity = 100000;
  int batch_size = 64;
  std::uint64_t seed = 1;

  void validate() const;
  friend bool operator==(const AgentConfig&, const AgentConfig&) = default;
};

struct Transition {
  std::vector<double> state;
  std::vector<double> action;  // the masked probability vector
  double reward = 0.0;
  std::vector<double> next_state;
  ActionMask mask = kAllActions;
  ActionMask next_mask = kAllActions;
};

class ExperiencePool {
 public:
  explicit ExperiencePool(std::size_t capacity = 100000);
  void push(Transition t);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& at(std::size_t i) const { return items_.at(i); }

 private:
  std::size_t capacity_;
  std::deque<Transition> items_;
};

struct ActionChoice {
  SchedulingAction action = SchedulingAction::kIdle;
  std::vector<double> probabilities;
};


struct UpdateResult {
  bool performed = false;
  double critic_loss = 0.0;
  double actor_loss = 0.0;
};

// Batch form for the two losses. States, actions and next states hold one
// sample per column.
struct Batch {
  Eigen::MatrixXd states;
  Eigen::MatrixXd actions;
  Eigen::VectorXd rewards;
  Eigen::MatrixXd next_states;
  // 0/1 per action and sample; empty allows every action.
  Eigen::MatrixXd masks;
  Eigen::MatrixXd next_masks;
};

// Probabilities renormalized over the allowed actions of each column.
Eigen::MatrixXd mask_policy(const Eigen::MatrixXd& probs, const Eigen::MatrixXd& masks);

Eigen::MatrixXd critic_input(const Eigen::MatrixXd& states, const Eigen::MatrixXd& actions);
// y = r + gamma * Q'(s', pi'(s')), with pi' masked by next_masks.
Eigen::VectorXd critic_targets(const Mlp& critic_target, const Mlp& actor_target,
                               const Batch& batch, double gamma);
// Mean squared error between Q(s, a) and fixed targets.
LossAndGrad critic_loss_and_grad(const Mlp& critic, const Batch& batch,
                                 const Eigen::VectorXd& targets);
// Negative mean of Q(s, pi(s)) + entropy_weight * H(pi(s)) with pi masked;
// gradients are for the actor's parameters.
LossAndGrad actor_loss_and_grad(const Mlp& actor, const Mlp& critic,
                                const Eigen::MatrixXd& states,
                                const Eigen::MatrixXd& masks = Eigen::MatrixXd(),
                                double entropy_weight = 0.0);

class Agent {
 public:
  explicit Agent(AgentConfig config = {});

  const AgentConfig& config() const { return config_; }
  Mlp& actor() { return actor_; }
  Mlp& critic() { return critic_; }
  Mlp& actor_target() { return actor_target_; }
  Mlp& critic_target() { return critic_target_; }
  const Mlp& actor() const { return actor_; }
  const Mlp& critic() const { return critic_; }
  const Mlp& actor_target() const { return actor_target_; }
  const Mlp& critic_target() const { return critic_target_; }
  ExperiencePool& pool() { return pool_; }
  const ExperiencePool& pool() const { return pool_; }
  double noise_sigma() const { return noise_sigma_; }
  void set_noise_sigma(double sigma) { noise_sigma_ = sigma; }
  void set_tau(double tau);

  // Greedy when `explore` is false or sigma is zero; lowest id wins ties.
  // Highest (noisy) probability among the allowed actions. Throws
  // Error(kInvalidArgument) when the mask allows none.
  ActionChoice select_action(std::span<const double> state, bool explore,
                             const ActionMask& allowed = kAllActions);
  void remember(Transition t) { pool_.push(std::move(t)); }
  // Samples a batch from the pool; a no-op while the pool is smaller than it.
  UpdateResult update();
  UpdateResult update_on(const Batch& batch);
  void end_episode();

  // Replaces all four networks, keeping the pool empty.
  void load_networks(Mlp actor, Mlp critic, Mlp actor_target, Mlp critic_target);
  // Reseeds exploration and batch sampling, and resets noise to the config.
  void reseed(std::uint64_t seed);

 private:
  void reset_optimizers();

  AgentConfig config_;
  Mlp actor_, critic_, actor_target_, critic_target_;
  Adam actor_opt_, critic_opt_;
  ExperiencePool pool_;
  std::mt19937_64 rng_;
  double noise_sigma_;
};

}  // namespace cosched

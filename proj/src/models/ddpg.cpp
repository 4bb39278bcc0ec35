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


#include "cosched/ddpg.hpp"

#include <cmath>

#include "cosched/error.hpp"

namespace cosched {
namespace {

constexpr double kActorHeadScale = 0.1;
// Below this the allowed actions' share is treated as fully underflowed.
constexpr double kMinMaskedMass = 1e-300;

}  // namespace

std::string_view action_name(SchedulingAction a) {
  switch (a) {
    case SchedulingAction::kCoresUp: return "cores+1";
    case SchedulingAction::kCoresDown: return "cores-1";
    case SchedulingAction::kWaysUp: return "ways+1";
    case SchedulingAction::kWaysDown: return "ways-1";
    case SchedulingAction::kBwUp: return "bw+1";
    case SchedulingAction::kBwDown: return "bw-1";
    case SchedulingAction::kIdle: return "idle";
  }
  return "?";
}

Grant action_delta(SchedulingAction a) {
  switch (a) {
    case SchedulingAction::kCoresUp: return {1, 0, 0};
    case SchedulingAction::kCoresDown: return {-1, 0, 0};
    case SchedulingAction::kWaysUp: return {0, 1, 0};
    case SchedulingAction::kWaysDown: return {0, -1, 0};
    case SchedulingAction::kBwUp: return {0, 0, 1};
    case SchedulingAction::kBwDown: return {0, 0, -1};
    case SchedulingAction::kIdle: break;
  }
  return {};
}

ActionMask shepherd_actions(bool under_provisioned) {
  ActionMask m{};
  for (int i = 0; i < kActionCount; ++i) {
    const Grant d = action_delta(static_cast<SchedulingAction>(i));
    const int step = d.cores + d.ways + d.bw_units;
    m[static_cast<std::size_t>(i)] = under_provisioned ? step > 0 : step <= 0;
  }
  return m;
}

void AgentConfig::validate() const {
  if (state_dim < 1) throw Error(ErrorCode::kConfig, "agent state_dim must be positive");
  if (!(gamma >= 0.0 && gamma <= 1.0) || !(tau >= 0.0 && tau <= 1.0)) {
    throw Error(ErrorCode::kConfig, "agent gamma and tau must be in [0,1]");
  }
  if (!(actor_lr > 0.0) || !(critic_lr > 0.0) || !(noise_sigma >= 0.0) ||
      !(noise_decay > 0.0 && noise_decay <= 1.0) || !(entropy_weight >= 0.0)) {
    throw Error(ErrorCode::kConfig, "agent learning rates or noise out of range");
  }
  if (pool_capacity < 1 || batch_size < 1) {
    throw Error(ErrorCode::kConfig, "agent pool capacity and batch size must be positive");
  }
}

ExperiencePool::ExperiencePool(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw Error(ErrorCode::kConfig, "pool capacity must be positive");
}

void ExperiencePool::push(Transition t) {
  if (items_.size() == capacity_) items_.pop_front();
  items_.push_back(std::move(t));
}

Eigen::MatrixXd critic_input(const Eigen::MatrixXd& states, const Eigen::MatrixXd& actions) {
  if (states.cols() != actions.cols()) {
    throw Error(ErrorCode::kStructural, "state and action batches differ in size");
  }
  Eigen::MatrixXd in(states.rows() + actions.rows(), states.cols());
  in.topRows(states.rows()) = states;
  in.bottomRows(actions.rows()) = actions;
  return in;
}

Eigen::MatrixXd mask_policy(const Eigen::MatrixXd& probs, const Eigen::MatrixXd& masks) {
  if (masks.size() == 0) return probs;
  if (masks.rows() != probs.rows() || masks.cols() != probs.cols()) {
    throw Error(ErrorCode::kStructural, "mask batch does not match the policy batch");
  }
  Eigen::MatrixXd out = probs.cwiseProduct(masks);
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    const double sum = out.col(j).sum();
    if (sum > kMinMaskedMass) {
      out.col(j) /= sum;
    } else {
      const double allowed = masks.col(j).sum();
      if (!(allowed > 0.0)) throw Error(ErrorCode::kInvalidArgument, "action mask allows no action");
      out.col(j) = masks.col(j) / allowed;
    }
  }
  return out;
}

Eigen::VectorXd critic_targets(const Mlp& critic_target, const Mlp& actor_target,
                               const Batch& batch, double gamma) {
  const Eigen::MatrixXd next_actions =
      mask_policy(actor_target.forward_batch(batch.next_states), batch.next_masks);
  const Eigen::MatrixXd q = critic_target.forward_batch(critic_input(batch.next_states, next_actions));
  if (gamma == 0.0) return batch.rewards;
  return batch.rewards + gamma * q.row(0).transpose();
}

LossAndGrad critic_loss_and_grad(const Mlp& critic, const Batch& batch,
                                 const Eigen::VectorXd& targets) {
  Mlp::Tape tape;
  const Eigen::MatrixXd q = critic.forward_train(critic_input(batch.states, batch.actions), tape, nullptr);
  const Eigen::RowVectorXd diff = q.row(0) - targets.transpose();
  const double n = static_cast<double>(diff.size());
  LossAndGrad r;
  r.loss = diff.squaredNorm() / n;
  r.grads = critic.backward(tape, (2.0 / n) * diff);
  return r;
}

LossAndGrad actor_loss_and_grad(const Mlp& actor, const Mlp& critic,
                                const Eigen::MatrixXd& states, const Eigen::MatrixXd& masks,
                                double entropy_weight) {
  Mlp::Tape actor_tape, critic_tape;
  const Eigen::MatrixXd probs = actor.forward_train(states, actor_tape, nullptr);
  const Eigen::MatrixXd policy = mask_policy(probs, masks);
  const Eigen::MatrixXd q = critic.forward_train(critic_input(states, policy), critic_tape, nullptr);
  const double n = static_cast<double>(states.cols());
  LossAndGrad r;
  r.loss = -q.sum() / n;
  const Mlp::Gradients cg =
      critic.backward(critic_tape, Eigen::MatrixXd::Constant(1, states.cols(), -1.0 / n));
  Eigen::MatrixXd g = cg.input.bottomRows(probs.rows());
  if (entropy_weight > 0.0) {
    // The loss gains entropy_weight * sum(pi log pi) / n.
    for (Eigen::Index j = 0; j < policy.cols(); ++j) {
      for (Eigen::Index i = 0; i < policy.rows(); ++i) {
        const double pi = policy(i, j);
        if (!(pi > 0.0)) continue;
        r.loss += entropy_weight * pi * std::log(pi) / n;
        g(i, j) += entropy_weight * (std::log(pi) + 1.0) / n;
      }
    }
  }
  if (masks.size() != 0) {
    // d policy_i / d p_j = m_j (delta_ij - policy_i) / sum_k m_k p_k
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
      const double mass = probs.col(j).dot(masks.col(j));
      if (!(mass > kMinMaskedMass)) {
        g.col(j).setZero();
        continue;
      }
      const double mean = g.col(j).dot(policy.col(j));
      g.col(j) = masks.col(j).cwiseProduct((g.col(j).array() - mean).matrix()) / mass;
    }
  }
  r.grads = actor.backward(actor_tape, g);
  return r;
}

Agent::Agent(AgentConfig config)
    : config_(config), pool_(config.pool_capacity), rng_(config.seed),
      noise_sigma_(config.noise_sigma) {
  config_.validate();
  actor_ = Mlp::standard(config_.state_dim, kActionCount, Activation::kSoftmax, 0.0,
                         config_.seed * 2 + 1);
  actor_.layers().back().weights *= kActorHeadScale;
  critic_ = Mlp::standard(config_.state_dim + kActionCount, 1, Activation::kIdentity, 0.0,
                          config_.seed * 2 + 2);
  actor_target_ = actor_;
  critic_target_ = critic_;
  reset_optimizers();
}

void Agent::reset_optimizers() {
  actor_opt_ = Adam(actor_, config_.actor_lr);
  critic_opt_ = Adam(critic_, config_.critic_lr);
}

void Agent::set_tau(double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw Error(ErrorCode::kConfig, "tau must be in [0,1]");
  config_.tau = tau;
}

ActionChoice Agent::select_action(std::span<const double> state, bool explore,
                                  const ActionMask& allowed) {
  Eigen::VectorXd logits = actor_.forward_logits(state);
  if (explore && noise_sigma_ > 0.0) {
    std::normal_distribution<double> noise(config_.noise_mean, noise_sigma_);
    for (Eigen::Index i = 0; i < logits.size(); ++i) logits(i) += noise(rng_);
  }
  Eigen::VectorXd m(kActionCount);
  for (int i = 0; i < kActionCount; ++i) m(i) = allowed[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
  const Eigen::VectorXd p = mask_policy(softmax_columns(logits), m);
  ActionChoice choice;
  choice.probabilities.assign(p.data(), p.data() + p.size());
  int best = -1;
  for (int i = 0; i < kActionCount; ++i) {
    if (!allowed[static_cast<std::size_t>(i)]) continue;
    if (best < 0 || p(i) > p(best)) best = i;
  }
  if (best < 0) throw Error(ErrorCode::kInvalidArgument, "action mask allows no action");
  choice.action = static_cast<SchedulingAction>(best);
  return choice;
}

UpdateResult Agent::update() {
  const auto n = static_cast<std::size_t>(config_.batch_size);
  if (pool_.size() < n) return {};
  Batch b;
  const auto sd = static_cast<Eigen::Index>(config_.state_dim);
  b.states.resize(sd, static_cast<Eigen::Index>(n));
  b.actions.resize(kActionCount, static_cast<Eigen::Index>(n));
  b.rewards.resize(static_cast<Eigen::Index>(n));
  b.next_states.resize(sd, static_cast<Eigen::Index>(n));
  b.masks.resize(kActionCount, static_cast<Eigen::Index>(n));
  b.next_masks.resize(kActionCount, static_cast<Eigen::Index>(n));
  std::uniform_int_distribution<std::size_t> pick(0, pool_.size() - 1);
  for (std::size_t j = 0; j < n; ++j) {
    const Transition& t = pool_.at(pick(rng_));
    const auto col = static_cast<Eigen::Index>(j);
    b.states.col(col) = Eigen::Map<const Eigen::VectorXd>(t.state.data(), sd);
    b.actions.col(col) = Eigen::Map<const Eigen::VectorXd>(t.action.data(), kActionCount);
    b.rewards(col) = t.reward;
    b.next_states.col(col) = Eigen::Map<const Eigen::VectorXd>(t.next_state.data(), sd);
    for (int i = 0; i < kActionCount; ++i) {
      const auto k = static_cast<std::size_t>(i);
      b.masks(i, col) = t.mask[k] ? 1.0 : 0.0;
      b.next_masks(i, col) = t.next_mask[k] ? 1.0 : 0.0;
    }
  }
  return update_on(b);
}

UpdateResult Agent::update_on(const Batch& batch) {
  const Eigen::VectorXd y = critic_targets(critic_target_, actor_target_, batch, config_.gamma);
  const LossAndGrad cl = critic_loss_and_grad(critic_, batch, y);
  if (!std::isfinite(cl.loss)) {
    throw Error(ErrorCode::kTrainingDiverged, "non-finite critic loss");
  }
  critic_opt_.step(critic_, cl.grads);
  const LossAndGrad al = actor_loss_and_grad(actor_, critic_, batch.states, batch.masks,
                                              config_.entropy_weight);
  if (!std::isfinite(al.loss)) {
    throw Error(ErrorCode::kTrainingDiverged, "non-finite actor loss");
  }
  actor_opt_.step(actor_, al.grads);
  actor_target_.soft_update_from(actor_, config_.tau);
  critic_target_.soft_update_from(critic_, config_.tau);
  return {true, cl.loss, al.loss};
}

void Agent::end_episode() { noise_sigma_ *= config_.noise_decay; }

void Agent::load_networks(Mlp actor, Mlp critic, Mlp actor_target, Mlp critic_target) {
  if (!actor.same_architecture(actor_) || !critic.same_architecture(critic_) ||
      !actor_target.same_architecture(actor_) || !critic_target.same_architecture(critic_)) {
    throw Error(ErrorCode::kStructural, "agent networks do not match the configured shape");
  }
  actor_ = std::move(actor);
  critic_ = std::move(critic);
  actor_target_ = std::move(actor_target);
  critic_target_ = std::move(critic_target);
  pool_ = ExperiencePool(config_.pool_capacity);
  reset_optimizers();
}

void Agent::reseed(std::uint64_t seed) {
  rng_.seed(seed);
  noise_sigma_ = config_.noise_sigma;
}

}  // namespace cosched

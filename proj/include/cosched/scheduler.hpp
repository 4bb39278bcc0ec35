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


// Central control loop: monitoring, arrival handling with the allocation
// model, shepherding with the agent, and victim selection with the QoS model.

#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cosched/ddpg.hpp"
#include "cosched/features.hpp"
#include "cosched/models.hpp"
#include "cosched/simenv.hpp"

namespace cosched {

enum class EventKind { kNewLc = 0, kNewBe = 1, kQosViolation = 2, kOverProvision = 3 };
std::string_view event_name(EventKind k);

struct SchedulerEvent {
  EventKind kind = EventKind::kNewLc;
  std::string service_id;
  double t_ms = 0.0;
  friend bool operator==(const SchedulerEvent&, const SchedulerEvent&) = default;
};

struct DecisionRecord {
  double t_ms = 0.0;
  std::string scheduler;
  std::string event;
  std::string service;
  std::string algorithm;
  std::string action;
  std::map<std::string, Grant> before;  // "be_pool" keys the BE partition
  std::map<std::string, Grant> after;
  std::optional<double> reward;
  bool rollback = false;
  std::string note;
  friend bool operator==(const DecisionRecord&, const DecisionRecord&) = default;
};

class DecisionLog {
 public:
  void add(DecisionRecord r) { records_.push_back(std::move(r)); }
  const std::vector<DecisionRecord>& records() const { return records_; }
  std::string to_jsonl() const;
  static DecisionLog parse_jsonl(const std::string& text);

 private:
  std::vector<DecisionRecord> records_;
};

std::map<std::string, Grant> grants_of(const Allocation& a);

class Scheduler {
 public:
  virtual ~Scheduler() = default;
  virtual std::string_view name() const = 0;
  // Called once per monitor tick with the latest snapshot.
  virtual void on_tick(Simulator& sim, const Snapshot& snap, DecisionLog& log) = 0;
};

// Predicts latency / target for a service if its effective grant changed.
class QosPredictor {
 public:
  virtual ~QosPredictor() = default;
  virtual QosPrediction predict(const Snapshot& snap, const std::string& id,
                                const EffectiveGrant& expected) const = 0;
};

class ModelBPredictor : public QosPredictor {
 public:
  ModelBPredictor(const ModelB& model, NormalizationSpec norm);
  QosPrediction predict(const Snapshot& snap, const std::string& id,
                        const EffectiveGrant& expected) const override;

 private:
  const ModelB& model_;
  NormalizationSpec norm_;
  double way_mb_;
};

// Evaluates the true surface at the snapshot's load with an empty queue.
class GroundTruthPredictor : public QosPredictor {
 public:
  explicit GroundTruthPredictor(const Simulator& sim) : sim_(sim) {}
  QosPrediction predict(const Snapshot& snap, const std::string& id,
                        const EffectiveGrant& expected) const override;

 private:
  const Simulator& sim_;
};

struct SharingPolicy {
  bool allow = true;
  // Largest predicted latency / target the upper scheduler accepts for the
  // lending partner.
  double max_partner_qos = ModelB::kRatioCap;
};

struct DeprivationConfig {
  // Victims must stay at or below this predicted latency / target.
  double allowable_qos = 1.0;
  SharingPolicy sharing;
};

struct DeprivationRequest {
  std::string requester;
  int cores = 0;
  int ways = 0;
};

struct Victim {
  std::string id;
  int cores = 0;
  int ways = 0;
  double predicted_qos = 0.0;
  double slowdown = 0.0;
  friend bool operator==(const Victim&, const Victim&) = default;
};

enum class PlanKind { kBestEffort, kVictims, kSharing, kInfeasible };
std::string_view plan_kind_name(PlanKind k);

struct DeprivationPlan {
  PlanKind kind = PlanKind::kInfeasible;
  int be_cores = 0;
  int be_ways = 0;
  std::vector<Victim> victims;  // ordered by id
  std::optional<SharingPair> sharing;
  double sharing_slowdown = 0.0;
  double total_slowdown = 0.0;
  friend bool operator==(const DeprivationPlan&, const DeprivationPlan&) = default;
};

inline constexpr std::size_t kMaxVictims = 3;

// Per-neighbor table of admissible (m, n) deprivations.
struct NeighborOptions {
  std::string id;
  int max_cores = 0;  // table extents
  int max_ways = 0;
  std::vector<std::optional<Victim>> table;  // (max_cores+1) x (max_ways+1)

  const std::optional<Victim>& at(int m, int n) const {
    return table[static_cast<std::size_t>(m * (max_ways + 1) + n)];
  }
};

std::vector<NeighborOptions> score_neighbors(const Allocation& alloc, const Snapshot& snap,
                                             const std::string& requester, int cores,
                                             int ways, const QosPredictor& qos,
                                             const DeprivationConfig& config);
// Exact-sum combination of at most three neighbors minimizing total slowdown,
// then victim count, then victim ids, then per-victim (m, n).
std::optional<std::vector<Victim>> best_fit_victims(const std::vector<NeighborOptions>& options,
                                                    int cores, int ways);

// Throws Error(kInvalidArgument) for a zero request.
DeprivationPlan plan_deprivation(const Allocation& alloc, const Snapshot& snap,
                                 const DeprivationRequest& request, const QosPredictor& qos,
                                 const DeprivationConfig& config);
// Moves the planned units to the requester. Infeasible plans are rejected.
void apply_plan(Allocation& alloc, const DeprivationPlan& plan, const std::string& requester);

// Gives every idle unit to the BE pool when a BE service is present.
void sweep_idle_to_be(Allocation& alloc, const ServerSpec& server);

struct ActionOutcome {
  bool applied = false;
  Allocation next;
  std::vector<std::string> victims;
  std::string note;
};

// Resolves one shepherd action for `id` against the current allocation:
// idle units first, then the BE pool and LC victims via plan_deprivation.
ActionOutcome resolve_action(const Simulator& sim, const Snapshot& snap, const std::string& id,
                             SchedulingAction action, const QosPredictor& qos,
                             const DeprivationConfig& config);

struct OsmlConfig {
  bool allocate_at_rcliff = false;
  bool online_learning = true;
  bool explore = false;
  DeprivationConfig deprivation;
};

struct OsmlModels {
  const ModelA* model_a = nullptr;
  const QosPredictor* qos = nullptr;
  Agent* agent = nullptr;
  NormalizationSpec norm;
};

class OsmlScheduler : public Scheduler {
 public:
  OsmlScheduler(OsmlModels models, OsmlConfig config = {});

  std::string_view name() const override { return "osml+"; }
  void on_tick(Simulator& sim, const Snapshot& snap, DecisionLog& log) override;

  std::vector<SchedulerEvent> monitor(const Simulator& sim, const Snapshot& snap) const;
  void handle_new_lc(Simulator& sim, const Snapshot& snap, const std::string& id,
                     DecisionLog& log);
  void handle_new_be(Simulator& sim, const Snapshot& snap, const std::string& id,
                     DecisionLog& log);
  void shepherd(Simulator& sim, const Snapshot& snap, const std::string& id,
                EventKind why, DecisionLog& log);
  // Scale-up actions for a violation, scale-down or idle for over-provision,
  // minus actions that were rolled back or infeasible from this exact
  // allocation.
  ActionMask allowed_actions(const Allocation& alloc, const std::string& id,
                             EventKind why) const;

  const std::map<std::string, Grant>& oaa_reference() const { return oaa_ref_; }
  void set_oaa_reference(const std::string& id, const Grant& g) { oaa_ref_[id] = g; }
  const std::set<std::string>& queued() const { return queued_; }

 private:
  struct Pending {
    std::string service;
    std::vector<double> state;
    std::vector<double> probabilities;
    ActionMask mask = kAllActions;
    SchedulingAction action = SchedulingAction::kIdle;
    bool indicator = false;
    bool applied = false;
    Allocation before;
    std::map<std::string, bool> met_before;  // acted service and victims
  };

  bool settle_pending(Simulator& sim, const Snapshot& snap, DecisionLog& log);
  void refresh_oaa(const Snapshot& snap);
  Grant query_target(const ServiceTelemetry& tel) const;

  OsmlModels models_;
  OsmlConfig config_;
  std::map<std::string, Grant> oaa_ref_;
  std::map<std::string, double> oaa_load_;
  std::set<std::string> queued_;
  std::optional<Pending> pending_;
  struct Withdrawn {
    SchedulingAction action;
    Allocation from;
  };
  std::map<std::string, std::vector<Withdrawn>> withdrawn_;
  // Keeps only entries recorded from `from`.
  void withdraw(const std::string& id, SchedulingAction action, const Allocation& from);
};

}  // namespace cosched

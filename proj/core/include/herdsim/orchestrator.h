// Copyright 2026 The Herdsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HERDSIM_ORCHESTRATOR_H_
#define HERDSIM_ORCHESTRATOR_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "herdsim/agents.h"
#include "herdsim/equilibrium.h"
#include "herdsim/history.h"

namespace herdsim {

enum class TrajectoryKind { kFixed, kAscending, kDescending, kRandom };
std::string_view TrajectoryKindName(TrajectoryKind kind);
TrajectoryKind ParseTrajectoryKind(std::string_view text);

// Ordered prices presented to the agents. Each element is one step.
struct Trajectory {
  TrajectoryKind kind = TrajectoryKind::kAscending;
  std::vector<double> prices;
  std::uint64_t seed = 0;
  PriceSchedule source_schedule;
  // Unique name within a run, e.g. "ascending" or "fixed_k6".
  std::string label;
};

// Ascending / Descending / Random reorder the schedule's chosen prices.
// Fixed takes the entry for `fixed_target` and repeats it `fixed_rounds`
// times. Throws Error(kInvalidKind) for Fixed without a target.
Trajectory MakeTrajectory(const PriceSchedule& schedule, TrajectoryKind kind,
                          std::uint64_t seed = 0,
                          std::optional<int> fixed_target = std::nullopt,
                          int fixed_rounds = 6);

// Fixed trajectory at an arbitrary price.
Trajectory MakeFixedTrajectory(const PriceSchedule& schedule, double price,
                               int fixed_rounds);

// The schedule's chosen price for k when the selection policy lands on k
// there; otherwise PriceSelectingLevel().
double DefaultFixedPrice(const GameConfig& config, const PriceSchedule& schedule,
                         int k, SelectionPolicy selection);

enum class RunMode { kStatic, kRepeated };
std::string_view RunModeName(RunMode mode);
RunMode ParseRunMode(std::string_view text);

struct RunPlan {
  GameConfig game;
  std::vector<PolicySpec> agents;
  RunMode mode = RunMode::kRepeated;
  std::vector<Trajectory> trajectories;
  int replications = 10;
  // Rounds held at each step of a moving trajectory. Fixed trajectories
  // already spell out one price per round.
  int rounds_per_step = 1;
  CurationSpec curation;
  SelectionPolicy selection = SelectionPolicy::kIterateFromZero;
  std::uint64_t master_seed = 0;
  bool know_all_thetas = true;
};

std::vector<std::string> ValidatePlan(const RunPlan& plan);

// One replication of one trajectory. step_of_round[i] is the trajectory
// step of history.records()[i].
struct ReplicationLog {
  History history;
  std::vector<int> step_of_round;
};

struct TrajectoryLog {
  Trajectory trajectory;
  std::vector<ReplicationLog> replications;
};

struct RunMetadata {
  std::string template_version;
  std::string shuffle_algorithm;
  std::string seed_derivation;
  std::string started_at;
  std::string finished_at;
  std::vector<std::string> models;
};

struct RunLog {
  RunPlan plan;
  std::vector<TrajectoryLog> trajectories;
  RunMetadata metadata;
};

// Position of the next round to play.
struct RoundSlot {
  int trajectory = 0;
  int replication = 0;
  int step = 0;
  int round_index = 1;
  double price = 0.0;
  // True when agents must be rebuilt before this round: the first round of
  // every repeated replication, and every static round.
  bool fresh_agents = true;
};

// Walks trajectories x replications x steps x rounds and owns the records.
// Contexts depend only on completed rounds and the current price; a round
// is resolved only once all n moves are in.
class ExperimentCursor {
 public:
  // Throws Error(kInvalidPlan).
  explicit ExperimentCursor(RunPlan plan);

  bool finished() const { return finished_; }
  const RoundSlot& slot() const { return slot_; }
  const RunPlan& plan() const { return log_.plan; }

  // Curation seed in effect for the current round (shuffled order only).
  std::optional<std::uint64_t> CurrentShuffleSeed() const;
  std::string RenderedHistoryFor(int agent_id) const;
  // Round number shown to agents; always 1 in static mode.
  int DisclosedRoundIndex() const;
  DecisionContext ContextFor(int agent_id) const;

  // Resolves the current round and advances. Throws Error(kWrongState)
  // once finished and Error(kInconsistentRecord) on a wrong move count.
  RoundRecord Submit(std::vector<AgentMove> moves);

  int rounds_completed() const { return rounds_completed_; }
  int total_rounds() const { return total_rounds_; }

  const RunLog& log() const { return log_; }
  RunLog TakeLog() &&;

 private:
  int RoundsInStep(const Trajectory& trajectory) const;
  void Advance();
  ReplicationLog& Current();
  const ReplicationLog& Current() const;

  RunLog log_;
  RoundSlot slot_;
  int round_in_step_ = 0;
  bool finished_ = false;
  int rounds_completed_ = 0;
  int total_rounds_ = 0;
};

using AgentFactory = std::function<std::unique_ptr<Agent>(
    const PolicySpec&, const GameConfig&, const AgentProfile&)>;

struct RunOptions {
  // Backend for kLlm policies.
  std::shared_ptr<ChatCompleter> completer;
  // Overrides MakeAgent when set.
  AgentFactory agent_factory;
  // Query the n agents of a round concurrently.
  bool parallel_agents = false;
};

// Runs the agent and converts any failure into the fallback move.
AgentMove ActOrFallback(Agent& agent, const DecisionContext& context);

RunLog RunStatic(const RunPlan& plan, const RunOptions& options = {});
RunLog RunRepeated(const RunPlan& plan, const RunOptions& options = {});
// Dispatches on plan.mode.
RunLog Run(const RunPlan& plan, const RunOptions& options = {});

std::string UtcTimestamp();

}  // namespace herdsim

#endif  // HERDSIM_ORCHESTRATOR_H_

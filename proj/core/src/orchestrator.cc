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

#include "herdsim/orchestrator.h"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <future>
#include <set>

#include "herdsim/error.h"
#include "herdsim/llm_client.h"
#include "herdsim/numfmt.h"
#include "herdsim/seeding.h"

namespace herdsim {

std::string_view TrajectoryKindName(TrajectoryKind kind) {
  switch (kind) {
    case TrajectoryKind::kFixed: return "fixed";
    case TrajectoryKind::kAscending: return "ascending";
    case TrajectoryKind::kDescending: return "descending";
    case TrajectoryKind::kRandom: return "random";
  }
  return "fixed";
}

TrajectoryKind ParseTrajectoryKind(std::string_view text) {
  for (auto k : {TrajectoryKind::kFixed, TrajectoryKind::kAscending,
                 TrajectoryKind::kDescending, TrajectoryKind::kRandom}) {
    if (TrajectoryKindName(k) == text) return k;
  }
  throw Error(ErrorCode::kInvalidKind, "unknown trajectory kind '" + std::string(text) + "'");
}

Trajectory MakeTrajectory(const PriceSchedule& schedule, TrajectoryKind kind,
                          std::uint64_t seed, std::optional<int> fixed_target,
                          int fixed_rounds) {
  if (schedule.entries.empty()) {
    throw Error(ErrorCode::kInvalidKind, "trajectory needs a non-empty schedule");
  }
  Trajectory t;
  t.kind = kind;
  t.seed = seed;
  t.source_schedule = schedule;
  t.label = std::string(TrajectoryKindName(kind));
  std::vector<double> prices;
  for (const auto& e : schedule.entries) prices.push_back(e.chosen_price);
  switch (kind) {
    case TrajectoryKind::kAscending:
      std::sort(prices.begin(), prices.end());
      t.prices = std::move(prices);
      break;
    case TrajectoryKind::kDescending:
      std::sort(prices.begin(), prices.end(), std::greater<>());
      t.prices = std::move(prices);
      break;
    case TrajectoryKind::kRandom:
      t.prices = SeededShuffle(prices, seed);
      break;
    case TrajectoryKind::kFixed: {
      if (!fixed_target) {
        throw Error(ErrorCode::kInvalidKind, "fixed trajectory needs a designated target");
      }
      if (fixed_rounds < 1) {
        throw Error(ErrorCode::kInvalidKind, "fixed trajectory needs at least one round");
      }
      t.prices.assign(fixed_rounds, schedule.ForTarget(*fixed_target).chosen_price);
      t.label = "fixed_k" + std::to_string(*fixed_target);
      break;
    }
  }
  return t;
}

Trajectory MakeFixedTrajectory(const PriceSchedule& schedule, double price,
                               int fixed_rounds) {
  if (fixed_rounds < 1) {
    throw Error(ErrorCode::kInvalidKind, "fixed trajectory needs at least one round");
  }
  Trajectory t;
  t.kind = TrajectoryKind::kFixed;
  t.source_schedule = schedule;
  t.prices.assign(fixed_rounds, price);
  t.label = "fixed_p" + FormatReal(price);
  return t;
}

double DefaultFixedPrice(const GameConfig& config, const PriceSchedule& schedule,
                         int k, SelectionPolicy selection) {
  const double chosen = schedule.ForTarget(k).chosen_price;
  if (SelectEquilibrium(SolveFee(config, chosen), selection, config) == k) return chosen;
  return PriceSelectingLevel(config, k, selection);
}

std::string_view RunModeName(RunMode mode) {
  return mode == RunMode::kStatic ? "static" : "repeated";
}

RunMode ParseRunMode(std::string_view text) {
  if (text == "static") return RunMode::kStatic;
  if (text == "repeated") return RunMode::kRepeated;
  throw Error(ErrorCode::kInvalidSpec, "unknown run mode '" + std::string(text) + "'");
}

std::vector<std::string> ValidatePlan(const RunPlan& plan) {
  std::vector<std::string> problems;
  for (const auto& v : ValidateConfig(plan.game)) problems.push_back(v.field + ": " + v.message);
  if (static_cast<int>(plan.agents.size()) != plan.game.n) {
    problems.push_back("expected " + std::to_string(plan.game.n) + " agent specs, got " +
                       std::to_string(plan.agents.size()));
  }
  for (std::size_t j = 0; j < plan.agents.size(); ++j) {
    for (const auto& p : ValidatePolicySpec(plan.agents[j], plan.game)) {
      problems.push_back("agent " + std::to_string(j) + ": " + p);
    }
  }
  if (plan.replications < 1) problems.push_back("replications must be >= 1");
  if (plan.rounds_per_step < 1) problems.push_back("rounds_per_step must be >= 1");
  if (plan.trajectories.empty()) problems.push_back("at least one trajectory is required");
  std::set<std::string> labels;
  for (const auto& t : plan.trajectories) {
    if (t.prices.empty()) problems.push_back("trajectory '" + t.label + "' has no prices");
    if (!labels.insert(t.label).second) {
      problems.push_back("duplicate trajectory label '" + t.label + "'");
    }
    for (double p : t.prices) {
      if (!(p >= plan.game.price_floor)) {
        problems.push_back("trajectory '" + t.label + "' price " + FormatReal(p) +
                           " below the price floor");
        break;
      }
    }
  }
  for (const auto& p : ValidateCurationSpec(plan.curation)) problems.push_back("curation: " + p);
  return problems;
}

ExperimentCursor::ExperimentCursor(RunPlan plan) {
  if (auto problems = ValidatePlan(plan); !problems.empty()) {
    std::string message = "invalid run plan:";
    for (const auto& p : problems) message += " " + p + ";";
    throw Error(ErrorCode::kInvalidPlan, message);
  }
  log_.plan = std::move(plan);
  log_.metadata.template_version = std::string(kPromptTemplateVersion);
  log_.metadata.shuffle_algorithm = std::string(kShuffleAlgorithm);
  log_.metadata.seed_derivation = std::string(kSeedDerivation);
  log_.metadata.started_at = UtcTimestamp();
  for (const auto& spec : log_.plan.agents) {
    if (spec.llm_params &&
        std::find(log_.metadata.models.begin(), log_.metadata.models.end(),
                  spec.llm_params->model_name) == log_.metadata.models.end()) {
      log_.metadata.models.push_back(spec.llm_params->model_name);
    }
  }
  for (const auto& t : log_.plan.trajectories) {
    TrajectoryLog tl{t, {}};
    for (int r = 0; r < log_.plan.replications; ++r) {
      tl.replications.push_back(ReplicationLog{History(log_.plan.game), {}});
    }
    log_.trajectories.push_back(std::move(tl));
    total_rounds_ += static_cast<int>(t.prices.size()) * RoundsInStep(t) * log_.plan.replications;
  }
  slot_ = RoundSlot{0, 0, 0, 1, log_.plan.trajectories[0].prices[0], true};
}

int ExperimentCursor::RoundsInStep(const Trajectory& trajectory) const {
  if (log_.plan.mode == RunMode::kStatic || trajectory.kind == TrajectoryKind::kFixed) return 1;
  return log_.plan.rounds_per_step;
}

ReplicationLog& ExperimentCursor::Current() {
  return log_.trajectories[slot_.trajectory].replications[slot_.replication];
}

const ReplicationLog& ExperimentCursor::Current() const {
  return log_.trajectories[slot_.trajectory].replications[slot_.replication];
}

std::optional<std::uint64_t> ExperimentCursor::CurrentShuffleSeed() const {
  const CurationSpec& spec = log_.plan.curation;
  if (spec.order != HistoryOrder::kShuffled) return std::nullopt;
  return DeriveSeed(log_.plan.master_seed,
                    {kCurationStream, *spec.shuffle_seed,
                     static_cast<std::uint64_t>(slot_.trajectory),
                     static_cast<std::uint64_t>(slot_.replication),
                     static_cast<std::uint64_t>(slot_.round_index)});
}

std::string ExperimentCursor::RenderedHistoryFor(int agent_id) const {
  if (log_.plan.mode == RunMode::kStatic) return std::string(kNoHistoryLine);
  CurationSpec spec = log_.plan.curation;
  if (auto seed = CurrentShuffleSeed()) spec.shuffle_seed = seed;
  return Render(Curate(Current().history, spec, agent_id), log_.plan.game);
}

int ExperimentCursor::DisclosedRoundIndex() const {
  return log_.plan.mode == RunMode::kStatic ? 1 : slot_.round_index;
}

DecisionContext ExperimentCursor::ContextFor(int agent_id) const {
  if (finished_) throw Error(ErrorCode::kWrongState, "experiment already finished");
  DecisionContext ctx;
  ctx.agent = ProfileFor(log_.plan.game, agent_id);
  ctx.game = log_.plan.game;
  ctx.current_price = slot_.price;
  ctx.rendered_history = RenderedHistoryFor(agent_id);
  ctx.round_index = DisclosedRoundIndex();
  ctx.know_all_thetas = log_.plan.know_all_thetas;
  return ctx;
}

RoundRecord ExperimentCursor::Submit(std::vector<AgentMove> moves) {
  if (finished_) throw Error(ErrorCode::kWrongState, "experiment already finished");
  if (static_cast<int>(moves.size()) != log_.plan.game.n) {
    throw Error(ErrorCode::kInconsistentRecord,
                "expected " + std::to_string(log_.plan.game.n) + " moves, got " +
                    std::to_string(moves.size()));
  }
  RoundRecord record =
      ResolveRound(log_.plan.game, slot_.round_index, slot_.price, std::move(moves));
  ReplicationLog& rep = Current();
  rep.history.Append(record);
  rep.step_of_round.push_back(slot_.step);
  ++rounds_completed_;
  Advance();
  return record;
}

void ExperimentCursor::Advance() {
  const Trajectory* t = &log_.plan.trajectories[slot_.trajectory];
  const bool is_static = log_.plan.mode == RunMode::kStatic;
  slot_.fresh_agents = is_static;
  if (++round_in_step_ < RoundsInStep(*t)) {
    ++slot_.round_index;
  } else {
    round_in_step_ = 0;
    if (++slot_.step < static_cast<int>(t->prices.size())) {
      ++slot_.round_index;
    } else {
      slot_.step = 0;
      slot_.round_index = 1;
      slot_.fresh_agents = true;
      if (++slot_.replication >= log_.plan.replications) {
        slot_.replication = 0;
        if (++slot_.trajectory >= static_cast<int>(log_.plan.trajectories.size())) {
          finished_ = true;
          log_.metadata.finished_at = UtcTimestamp();
          return;
        }
        t = &log_.plan.trajectories[slot_.trajectory];
      }
    }
  }
  slot_.price = t->prices[slot_.step];
}

RunLog ExperimentCursor::TakeLog() && { return std::move(log_); }

AgentMove ActOrFallback(Agent& agent, const DecisionContext& context) {
  try {
    return agent.Act(context);
  } catch (const Error& e) {
    MoveStatus status = MoveStatus::kError;
    if (e.code() == ErrorCode::kParseFailed) status = MoveStatus::kParseFailed;
    if (e.code() == ErrorCode::kTimeout) status = MoveStatus::kTimeout;
    return FallbackMove(status, std::string(ErrorCodeName(e.code())) + ": " + e.what());
  } catch (const std::exception& e) {
    return FallbackMove(MoveStatus::kError, e.what());
  }
}

namespace {

RunLog Drive(const RunPlan& plan, const RunOptions& options) {
  ExperimentCursor cursor(plan);
  const GameConfig& game = cursor.plan().game;
  auto factory = options.agent_factory;
  if (!factory) {
    factory = [completer = options.completer](const PolicySpec& spec, const GameConfig& g,
                                              const AgentProfile& profile) {
      return MakeAgent(spec, g, profile, completer);
    };
  }

  std::vector<std::unique_ptr<Agent>> agents(game.n);
  while (!cursor.finished()) {
    if (cursor.slot().fresh_agents) {
      for (int j = 0; j < game.n; ++j) {
        agents[j] = factory(cursor.plan().agents[j], game, ProfileFor(game, j));
      }
    }
    // Every context is built before any agent moves.
    std::vector<DecisionContext> contexts;
    contexts.reserve(game.n);
    for (int j = 0; j < game.n; ++j) contexts.push_back(cursor.ContextFor(j));

    std::vector<AgentMove> moves(game.n);
    if (options.parallel_agents) {
      std::vector<std::future<AgentMove>> pending;
      for (int j = 0; j < game.n; ++j) {
        pending.push_back(std::async(std::launch::async, [&, j] {
          return ActOrFallback(*agents[j], contexts[j]);
        }));
      }
      for (int j = 0; j < game.n; ++j) moves[j] = pending[j].get();
    } else {
      for (int j = 0; j < game.n; ++j) moves[j] = ActOrFallback(*agents[j], contexts[j]);
    }

    RoundRecord record = cursor.Submit(moves);
    for (int j = 0; j < game.n; ++j) {
      agents[j]->Observe(OwnOutcome{record.price, record.realized_n, record.moves[j]});
    }
  }
  return std::move(cursor).TakeLog();
}

}  // namespace

RunLog RunStatic(const RunPlan& plan, const RunOptions& options) {
  if (plan.mode != RunMode::kStatic) {
    throw Error(ErrorCode::kInvalidPlan, "RunStatic needs a static plan");
  }
  return Drive(plan, options);
}

RunLog RunRepeated(const RunPlan& plan, const RunOptions& options) {
  if (plan.mode != RunMode::kRepeated) {
    throw Error(ErrorCode::kInvalidPlan, "RunRepeated needs a repeated plan");
  }
  return Drive(plan, options);
}

RunLog Run(const RunPlan& plan, const RunOptions& options) {
  return plan.mode == RunMode::kStatic ? RunStatic(plan, options) : RunRepeated(plan, options);
}

std::string UtcTimestamp() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace herdsim

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

#include <gtest/gtest.h>

#include "herdsim/error.h"
#include "herdsim/metrics.h"
#include "herdsim/seeding.h"
#include "plan_helpers.h"
#include "test_util.h"

namespace herdsim {
namespace {

using testing::ErrorOf;
using testing::Kind;
using testing::MidpointSchedule;
using testing::UniformPlan;

Trajectory Fixed(double beta, double price, int rounds) {
  return MakeFixedTrajectory(MidpointSchedule(beta), price, rounds);
}

std::vector<int> RealizedOf(const ReplicationLog& rep) {
  std::vector<int> out;
  for (const auto& r : rep.history.records()) out.push_back(r.realized_n);
  return out;
}

std::string Transcript(const RunLog& log) {
  std::string out;
  for (const auto& r : FlattenRunLog(log)) out += TranscriptLine(r) + "\n";
  return out;
}

TEST(MakeTrajectoryTest, AscendingDescendingRandom) {
  PriceSchedule s = MidpointSchedule(0.25);
  Trajectory up = MakeTrajectory(s, TrajectoryKind::kAscending);
  std::vector<double> expected{2.0, 2.75, 3.5, 4.25, 5.0, 5.75};
  ASSERT_EQ(up.prices.size(), 6u);
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(up.prices[i], expected[i], 1e-12);
  Trajectory down = MakeTrajectory(s, TrajectoryKind::kDescending);
  EXPECT_EQ(down.prices, std::vector<double>(up.prices.rbegin(), up.prices.rend()));
  EXPECT_EQ(MakeTrajectory(s, TrajectoryKind::kRandom, 42).prices,
            MakeTrajectory(s, TrajectoryKind::kRandom, 42).prices);
  auto shuffled = MakeTrajectory(s, TrajectoryKind::kRandom, 42).prices;
  std::sort(shuffled.begin(), shuffled.end());
  EXPECT_EQ(shuffled, up.prices);
}

TEST(MakeTrajectoryTest, FixedNeedsTarget) {
  EXPECT_EQ(ErrorOf([] { MakeTrajectory(MidpointSchedule(0.25), TrajectoryKind::kFixed); }),
            ErrorCode::kInvalidKind);
  Trajectory t = MakeTrajectory(MidpointSchedule(0.25), TrajectoryKind::kFixed, 0, 4, 3);
  EXPECT_EQ(t.prices, (std::vector<double>{3.5, 3.5, 3.5}));
  EXPECT_EQ(t.label, "fixed_k4");
}

TEST(DefaultFixedPriceTest, SelectsTheTarget) {
  for (double beta : {0.25, 0.75}) {
    GameConfig game = GameConfig::Default(beta);
    PriceSchedule s = MidpointSchedule(beta);
    for (int k : {6, 4, 2}) {
      double p = DefaultFixedPrice(game, s, k, SelectionPolicy::kIterateFromZero);
      EXPECT_EQ(SelectEquilibrium(SolveFee(game, p), SelectionPolicy::kIterateFromZero, game), k);
    }
  }
  // Where the midpoint already works it is kept.
  EXPECT_EQ(DefaultFixedPrice(GameConfig::Default(0.25), MidpointSchedule(0.25), 4,
                              SelectionPolicy::kIterateFromZero),
            3.5);
}

TEST(RunStaticTest, OptimistsAllAttend) {
  RunPlan plan = UniformPlan(0.25, Kind(PolicyKind::kOptimist), {Fixed(0.25, 2.24, 1)});
  plan.mode = RunMode::kStatic;
  RunLog log = herdsim::Run(plan);
  ASSERT_EQ(log.trajectories[0].replications.size(), 10u);
  for (const auto& rep : log.trajectories[0].replications) {
    ASSERT_EQ(rep.history.size(), 1u);
    const RoundRecord& r = rep.history.records()[0];
    EXPECT_EQ(r.realized_n, 6);
    for (const auto& m : r.moves) EXPECT_EQ(m.expected_n, 6);
  }
}

TEST(RunStaticTest, PessimistsLeaveFour) {
  RunPlan plan = UniformPlan(0.25, Kind(PolicyKind::kPessimist), {Fixed(0.25, 2.24, 1)});
  plan.mode = RunMode::kStatic;
  RunLog log = herdsim::Run(plan);
  for (const auto& rep : log.trajectories[0].replications) {
    EXPECT_EQ(rep.history.records()[0].realized_n, 4);
  }
}

TEST(RunStaticTest, OracleFulfilsSelectedEquilibrium) {
  for (double beta : {0.25, 0.75}) {
    PriceSchedule s = MidpointSchedule(beta);
    RunPlan plan = UniformPlan(beta, Kind(PolicyKind::kEquilibriumOracle),
                               {MakeTrajectory(s, TrajectoryKind::kAscending)}, 2);
    plan.mode = RunMode::kStatic;
    RunLog log = herdsim::Run(plan);
    for (const auto& rep : log.trajectories[0].replications) {
      for (const auto& r : rep.history.records()) {
        int selected = SelectEquilibrium(SolveFee(plan.game, r.price),
                                         SelectionPolicy::kIterateFromZero, plan.game);
        EXPECT_EQ(r.realized_n, selected);
      }
    }
  }
}

TEST(RunStaticTest, EveryRoundStartsFresh) {
  auto seen = std::make_shared<std::vector<DecisionContext>>();
  RunPlan plan = UniformPlan(0.25, Kind(PolicyKind::kMyopic),
                             {MakeTrajectory(MidpointSchedule(0.25), TrajectoryKind::kAscending)},
                             3);
  plan.mode = RunMode::kStatic;
  RunOptions options;
  options.agent_factory = [seen](const PolicySpec&, const GameConfig&, const AgentProfile&) {
    return std::make_unique<testing::SpyAgent>(seen);
  };
  RunLog log = herdsim::Run(plan, options);
  EXPECT_EQ(seen->size(), 3u * 6 * 6);
  for (const auto& ctx : *seen) {
    EXPECT_EQ(ctx.rendered_history, kNoHistoryLine);
    EXPECT_EQ(ctx.round_index, 1);
  }
  // One fresh round per price.
  EXPECT_EQ(log.trajectories[0].replications[0].history.size(), 6u);
}

TEST(RunRepeatedTest, MyopicFromAboveFollowsBestResponse) {
  RunPlan plan = UniformPlan(0.75, Kind(PolicyKind::kMyopic, 6), {Fixed(0.75, 5.99, 4)});
  RunLog log = herdsim::Run(plan);
  for (const auto& rep : log.trajectories[0].replications) {
    EXPECT_EQ(RealizedOf(rep), (std::vector<int>{5, 4, 4, 4}));
  }
}

TEST(RunRepeatedTest, MyopicFromBelowStaysLow) {
  RunPlan plan = UniformPlan(0.75, Kind(PolicyKind::kMyopic, 0), {Fixed(0.75, 5.99, 6)});
  RunLog log = herdsim::Run(plan);
  for (const auto& rep : log.trajectories[0].replications) {
    EXPECT_EQ(RealizedOf(rep), (std::vector<int>(6, 1)));
  }
}

TEST(RunRepeatedTest, BeliefsResetBetweenReplications) {
  RunPlan plan = UniformPlan(0.75, Kind(PolicyKind::kMyopic, 6), {Fixed(0.75, 5.99, 3)}, 2);
  RunLog log = herdsim::Run(plan);
  for (const auto& rep : log.trajectories[0].replications) {
    EXPECT_EQ(rep.history.records()[0].moves[0].expected_n, 6);
  }
}

TEST(RunRepeatedTest, RoundsPerStepRepeatsMovingPrices) {
  RunPlan plan = UniformPlan(0.25, Kind(PolicyKind::kFictitiousPlay),
                             {MakeTrajectory(MidpointSchedule(0.25), TrajectoryKind::kDescending)},
                             1);
  plan.rounds_per_step = 3;
  RunLog log = herdsim::Run(plan);
  const auto& rep = log.trajectories[0].replications[0];
  ASSERT_EQ(rep.history.size(), 18u);
  EXPECT_EQ(rep.step_of_round[0], 0);
  EXPECT_EQ(rep.step_of_round[3], 1);
  EXPECT_EQ(rep.history.records()[2].price, rep.history.records()[0].price);
}

TEST(RunRepeatedTest, Deterministic) {
  PriceSchedule s = MidpointSchedule(0.75);
  std::vector<PolicySpec> mixed{Kind(PolicyKind::kOptimist), Kind(PolicyKind::kPessimist),
                                Kind(PolicyKind::kMyopic, 2), Kind(PolicyKind::kFictitiousPlay),
                                Kind(PolicyKind::kEquilibriumOracle), Kind(PolicyKind::kMyopic)};
  RunPlan plan = UniformPlan(0.75, Kind(PolicyKind::kMyopic),
                             {MakeTrajectory(s, TrajectoryKind::kRandom, 5),
                              MakeTrajectory(s, TrajectoryKind::kAscending)});
  plan.agents = mixed;
  plan.curation.order = HistoryOrder::kShuffled;
  plan.curation.shuffle_seed = 77;
  EXPECT_EQ(Transcript(herdsim::Run(plan)), Transcript(herdsim::Run(plan)));
}

TEST(RunRepeatedTest, SpyNeverSeesTheOpenRound) {
  auto seen = std::make_shared<std::vector<DecisionContext>>();
  RunPlan plan = UniformPlan(0.25, Kind(PolicyKind::kMyopic),
                             {MakeTrajectory(MidpointSchedule(0.25), TrajectoryKind::kAscending)},
                             2);
  RunOptions options;
  options.agent_factory = [seen](const PolicySpec&, const GameConfig&,
                                 const AgentProfile& profile) -> std::unique_ptr<Agent> {
    if (profile.agent_id == 5) return std::make_unique<testing::SpyAgent>(seen);
    return std::make_unique<testing::CoinAgent>(9, profile.agent_id, -1);
  };
  RunLog log = herdsim::Run(plan, options);
  ASSERT_EQ(seen->size(), 12u);
  for (int rep = 0; rep < 2; ++rep) {
    const History& full = log.trajectories[0].replications[rep].history;
    for (int t = 0; t < 6; ++t) {
      History prefix(full.game());
      for (int i = 0; i < t; ++i) prefix.Append(full.records()[i]);
      const DecisionContext& ctx = (*seen)[rep * 6 + t];
      EXPECT_EQ(ctx.rendered_history, Render(Curate(prefix, plan.curation, 5), plan.game));
    }
  }
}

TEST(RunTest, InvalidPlanRejected) {
  RunPlan plan = UniformPlan(0.25, Kind(PolicyKind::kMyopic), {Fixed(0.25, 2.24, 1)}, 0);
  EXPECT_FALSE(ValidatePlan(plan).empty());
  EXPECT_EQ(ErrorOf([&] { herdsim::Run(plan); }), ErrorCode::kInvalidPlan);
}

TEST(RunTest, DuplicateLabelsRejected) {
  RunPlan plan = UniformPlan(0.25, Kind(PolicyKind::kMyopic),
                             {Fixed(0.25, 2.24, 1), Fixed(0.25, 2.24, 2)});
  EXPECT_EQ(ErrorOf([&] { herdsim::Run(plan); }), ErrorCode::kInvalidPlan);
}

class ThrowingAgent : public Agent {
 public:
  explicit ThrowingAgent(ErrorCode code) : code_(code) {}
  AgentMove Act(const DecisionContext&) override { throw Error(code_, "boom"); }
  void Observe(const OwnOutcome&) override {}

 private:
  ErrorCode code_;
};

TEST(RunTest, FailuresBecomeFallbackMoves) {
  RunPlan plan = UniformPlan(0.25, Kind(PolicyKind::kMyopic), {Fixed(0.25, 2.24, 2)}, 1);
  RunOptions options;
  options.agent_factory = [](const PolicySpec&, const GameConfig&,
                             const AgentProfile& profile) -> std::unique_ptr<Agent> {
    if (profile.agent_id == 0) return std::make_unique<ThrowingAgent>(ErrorCode::kTimeout);
    if (profile.agent_id == 1) return std::make_unique<ThrowingAgent>(ErrorCode::kParseFailed);
    if (profile.agent_id == 2) return std::make_unique<ThrowingAgent>(ErrorCode::kTransportError);
    return std::make_unique<testing::CoinAgent>(1, profile.agent_id, -1);
  };
  RunLog log = herdsim::Run(plan, options);
  for (const auto& r : log.trajectories[0].replications[0].history.records()) {
    EXPECT_EQ(r.moves[0].status, MoveStatus::kTimeout);
    EXPECT_EQ(r.moves[1].status, MoveStatus::kParseFailed);
    EXPECT_EQ(r.moves[2].status, MoveStatus::kError);
    for (int j = 0; j < 3; ++j) {
      EXPECT_EQ(r.moves[j].decision, Decision::kNotAttend);
      EXPECT_EQ(r.moves[j].expected_n, 0);
    }
  }
}

TEST(RunTest, ParallelAgentsMatchSequential) {
  PriceSchedule s = MidpointSchedule(0.75);
  RunPlan plan = UniformPlan(0.75, Kind(PolicyKind::kFictitiousPlay, 3),
                             {MakeTrajectory(s, TrajectoryKind::kRandom, 3)}, 3);
  RunOptions parallel;
  parallel.parallel_agents = true;
  EXPECT_EQ(Transcript(herdsim::Run(plan)), Transcript(herdsim::Run(plan, parallel)));
}

TEST(ExperimentCursorTest, CountsRounds) {
  PriceSchedule s = MidpointSchedule(0.25);
  RunPlan plan = UniformPlan(0.25, Kind(PolicyKind::kMyopic),
                             {MakeTrajectory(s, TrajectoryKind::kAscending), Fixed(0.25, 2.24, 4)},
                             3);
  plan.rounds_per_step = 2;
  ExperimentCursor cursor(plan);
  EXPECT_EQ(cursor.total_rounds(), 3 * (6 * 2 + 4));
  EXPECT_EQ(ErrorOf([&] { cursor.Submit({}); }), ErrorCode::kInconsistentRecord);
}

TEST(ExperimentCursorTest, RejectsSubmitAfterFinish) {
  RunPlan plan = UniformPlan(0.25, Kind(PolicyKind::kOptimist), {Fixed(0.25, 2.24, 1)}, 1);
  ExperimentCursor cursor(plan);
  std::vector<AgentMove> moves(6);
  cursor.Submit(moves);
  EXPECT_TRUE(cursor.finished());
  EXPECT_EQ(ErrorOf([&] { cursor.Submit(moves); }), ErrorCode::kWrongState);
}

TEST(RunMetadataTest, RecordsAlgorithms) {
  RunPlan plan = UniformPlan(0.25, Kind(PolicyKind::kOptimist), {Fixed(0.25, 2.24, 1)}, 1);
  RunLog log = herdsim::Run(plan);
  EXPECT_EQ(log.metadata.shuffle_algorithm, kShuffleAlgorithm);
  EXPECT_EQ(log.metadata.seed_derivation, kSeedDerivation);
  EXPECT_FALSE(log.metadata.started_at.empty());
}

}  // namespace
}  // namespace herdsim

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

#include <benchmark/benchmark.h>

#include <random>

#include "herdsim/equilibrium.h"
#include "herdsim/history.h"
#include "herdsim/llm_client.h"
#include "herdsim/metrics.h"
#include "herdsim/orchestrator.h"

namespace herdsim {
namespace {

GameConfig LargeGame(int n, double beta) {
  GameConfig config;
  config.n = n;
  config.beta = beta;
  config.thetas.clear();
  for (int j = 1; j <= n; ++j) config.thetas.push_back(j);
  return config;
}

void BM_SolveFee(benchmark::State& state) {
  GameConfig config = LargeGame(static_cast<int>(state.range(0)), 0.75);
  const double price = 0.5 * config.n;
  for (auto _ : state) benchmark::DoNotOptimize(SolveFee(config, price));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SolveFee)->RangeMultiplier(4)->Range(6, 1536)->Complexity();

void BM_PriceSchedule(benchmark::State& state) {
  GameConfig config = LargeGame(static_cast<int>(state.range(0)), 0.25);
  for (auto _ : state) {
    benchmark::DoNotOptimize(BuildPriceSchedule(config, ScheduleStrategy::kMidpoint));
  }
}
BENCHMARK(BM_PriceSchedule)->Arg(6)->Arg(24)->Arg(96);

History LongHistory(int rounds) {
  GameConfig game = GameConfig::Default(0.25);
  History h(game);
  std::mt19937_64 rng(1);
  for (int r = 1; r <= rounds; ++r) {
    std::vector<AgentMove> moves(game.n);
    for (auto& m : moves) {
      m.expected_n = static_cast<int>(rng() % 7);
      m.decision = rng() % 2 ? Decision::kAttend : Decision::kNotAttend;
    }
    h.Append(ResolveRound(game, r, 2.0 + 0.25 * (r % 16), std::move(moves)));
  }
  return h;
}

void BM_CurateAndRender(benchmark::State& state) {
  History h = LongHistory(static_cast<int>(state.range(0)));
  CurationSpec spec;
  spec.order = HistoryOrder::kShuffled;
  spec.shuffle_seed = 7;
  for (auto _ : state) benchmark::DoNotOptimize(Render(Curate(h, spec, 3), h.game()));
}
BENCHMARK(BM_CurateAndRender)->Arg(6)->Arg(60)->Arg(600);

void BM_ParseMove(benchmark::State& state) {
  const std::string json = R"(Here you go: {"expected_attendance": 4, "decision": "attend"})";
  const std::string prose = "I expect about 4 people to show up, so I will not attend this time.";
  const std::string& text = state.range(0) == 0 ? json : prose;
  for (auto _ : state) benchmark::DoNotOptimize(ParseMove(text, 6));
}
BENCHMARK(BM_ParseMove)->Arg(0)->Arg(1);

RunPlan MatrixPlan(int replications) {
  GameConfig game = GameConfig::Default(0.75);
  PriceSchedule s = BuildPriceSchedule(game, ScheduleStrategy::kMidpoint);
  RunPlan plan;
  plan.game = game;
  plan.agents.assign(game.n, PolicySpec{PolicyKind::kFictitiousPlay});
  plan.trajectories = {MakeTrajectory(s, TrajectoryKind::kAscending),
                       MakeTrajectory(s, TrajectoryKind::kDescending),
                       MakeTrajectory(s, TrajectoryKind::kRandom, 3),
                       MakeFixedTrajectory(s, 5.99, 6)};
  plan.replications = replications;
  return plan;
}

void BM_RunRepeated(benchmark::State& state) {
  RunPlan plan = MatrixPlan(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Run(plan));
}
BENCHMARK(BM_RunRepeated)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_Summarize(benchmark::State& state) {
  auto rounds = FlattenRunLog(Run(MatrixPlan(10)));
  for (auto _ : state) benchmark::DoNotOptimize(SummaryCsv(Summarize(rounds)));
}
BENCHMARK(BM_Summarize);

}  // namespace
}  // namespace herdsim

BENCHMARK_MAIN();

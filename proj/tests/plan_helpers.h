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

#ifndef HERDSIM_TESTS_PLAN_HELPERS_H_
#define HERDSIM_TESTS_PLAN_HELPERS_H_

#include <memory>
#include <random>
#include <vector>

#include "herdsim/agents.h"
#include "herdsim/equilibrium.h"
#include "herdsim/orchestrator.h"

namespace herdsim::testing {

inline RunPlan UniformPlan(double beta, PolicySpec policy, std::vector<Trajectory> trajectories,
                           int replications = 10) {
  RunPlan plan;
  plan.game = GameConfig::Default(beta);
  plan.agents.assign(plan.game.n, policy);
  plan.trajectories = std::move(trajectories);
  plan.replications = replications;
  plan.master_seed = 1234;
  return plan;
}

inline PolicySpec Kind(PolicyKind kind, std::optional<int> prior = std::nullopt) {
  PolicySpec spec;
  spec.kind = kind;
  spec.prior_n = prior;
  return spec;
}

inline PriceSchedule MidpointSchedule(double beta) {
  return BuildPriceSchedule(GameConfig::Default(beta), ScheduleStrategy::kMidpoint);
}

// Records every context it is shown and answers with a fixed move.
class SpyAgent : public Agent {
 public:
  explicit SpyAgent(std::shared_ptr<std::vector<DecisionContext>> seen) : seen_(std::move(seen)) {}
  AgentMove Act(const DecisionContext& context) override {
    seen_->push_back(context);
    AgentMove m;
    m.expected_n = 3;
    m.decision = Decision::kAttend;
    return m;
  }
  void Observe(const OwnOutcome&) override {}

 private:
  std::shared_ptr<std::vector<DecisionContext>> seen_;
};

// Attends at random. The draw for the k-th call is a pure function of
// (seed, seat, k); calls listed in `flip_calls` have their decision
// inverted, which lets two runs differ in exactly one round.
class CoinAgent : public Agent {
 public:
  CoinAgent(std::uint64_t seed, int seat, int flip_call)
      : seed_(seed), seat_(seat), flip_call_(flip_call) {}
  AgentMove Act(const DecisionContext& context) override {
    std::mt19937_64 rng(seed_ * 1000003 + seat_ * 7919 + calls_);
    AgentMove m;
    m.expected_n = static_cast<int>(rng() % (context.game.n + 1));
    bool attend = rng() % 2 == 0;
    if (calls_ == flip_call_) attend = !attend;
    m.decision = attend ? Decision::kAttend : Decision::kNotAttend;
    ++calls_;
    return m;
  }
  void Observe(const OwnOutcome&) override {}

 private:
  std::uint64_t seed_;
  int seat_;
  int flip_call_;
  int calls_ = 0;
};

}  // namespace herdsim::testing

#endif  // HERDSIM_TESTS_PLAN_HELPERS_H_

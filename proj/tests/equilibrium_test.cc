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

#include "herdsim/equilibrium.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "herdsim/error.h"
#include "oracles.h"
#include "test_util.h"

namespace herdsim {
namespace {

using testing::ErrorOf;

GameConfig FromInstance(const testing::Instance& inst) {
  GameConfig config;
  config.n = static_cast<int>(inst.thetas.size());
  config.beta = inst.beta;
  config.thetas = inst.thetas;
  return config;
}

TEST(BestResponseCountTest, Examples) {
  EXPECT_EQ(BestResponseCount(GameConfig::Default(0.25), 2.24, 6), 6);
  EXPECT_EQ(BestResponseCount(GameConfig::Default(0.75), 5.99, 0), 1);
  EXPECT_EQ(BestResponseCount(GameConfig::Default(0.25), 8, 6), 0);
}

TEST(SolveFeeTest, Examples) {
  EXPECT_EQ(SolveFee(GameConfig::Default(0.25), 2.24).Levels(), (std::vector<int>{6}));
  EXPECT_EQ(SolveFee(GameConfig::Default(0.75), 5.99).Levels(),
            (std::vector<int>{1, 2, 3, 4}));
  EXPECT_EQ(SolveFee(GameConfig::Default(0.25), 8).Levels(), (std::vector<int>{0}));
}

TEST(SolveFeeTest, RecordsPriceAndHash) {
  GameConfig config = GameConfig::Default(0.75);
  EquilibriumSet eq = SolveFee(config, 5.99);
  EXPECT_EQ(eq.price, 5.99);
  EXPECT_EQ(eq.config_hash, ConfigHash(config));
  EXPECT_TRUE(eq.Contains(3));
  EXPECT_FALSE(eq.Contains(5));
}

TEST(SolveFeeTest, StabilityLabels) {
  EquilibriumSet eq = SolveFee(GameConfig::Default(0.75), 5.99);
  ASSERT_EQ(eq.fixed_points.size(), 4u);
  // 1 is reached from 0 but not from 2; 4 from 5 but not from 3.
  EXPECT_EQ(eq.fixed_points[0].stability, Stability::kNeutral);
  EXPECT_EQ(eq.fixed_points[1].stability, Stability::kRepelling);
  EXPECT_EQ(eq.fixed_points[2].stability, Stability::kRepelling);
  EXPECT_EQ(eq.fixed_points[3].stability, Stability::kNeutral);
}

TEST(SolveFeeTest, MatchesEnumerationOnRandomInstances) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 500; ++i) {
    testing::Instance inst = testing::RandomInstance(rng);
    EXPECT_EQ(SolveFee(FromInstance(inst), inst.price).Levels(), testing::EnumerateFee(inst))
        << "instance " << i;
  }
}

TEST(SolveFeeTest, NeverEmpty) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 300; ++i) {
    testing::Instance inst = testing::RandomInstance(rng);
    EXPECT_FALSE(SolveFee(FromInstance(inst), inst.price).fixed_points.empty());
  }
}

TEST(BestResponseCountTest, NondecreasingInAssumedCount) {
  std::mt19937_64 rng(15);
  for (int i = 0; i < 300; ++i) {
    testing::Instance inst = testing::RandomInstance(rng);
    GameConfig config = FromInstance(inst);
    for (int m = 0; m < config.n; ++m) {
      EXPECT_LE(BestResponseCount(config, inst.price, m),
                BestResponseCount(config, inst.price, m + 1));
    }
    for (int m = 0; m <= config.n; ++m) {
      EXPECT_EQ(BestResponseCount(config, inst.price, m), testing::CountAttending(inst, m));
    }
  }
}

TEST(IterateBestResponseTest, Examples) {
  EXPECT_EQ(IterateBestResponse(GameConfig::Default(0.75), 5.99, 6, 10),
            (std::vector<int>{6, 5, 4, 4}));
  EXPECT_EQ(IterateBestResponse(GameConfig::Default(0.75), 5.99, 0, 10),
            (std::vector<int>{0, 1, 1}));
  EXPECT_EQ(IterateBestResponse(GameConfig::Default(0.25), 2.24, 6, 10),
            (std::vector<int>{6, 6}));
}

TEST(IterateBestResponseTest, ThrowsWhenBudgetTooSmall) {
  EXPECT_EQ(ErrorOf([] { IterateBestResponse(GameConfig::Default(0.75), 5.99, 6, 1); }),
            ErrorCode::kNonConvergence);
}

TEST(IterateBestResponseTest, MatchesNaiveIterationAndIsMonotone) {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 300; ++i) {
    testing::Instance inst = testing::RandomInstance(rng);
    GameConfig config = FromInstance(inst);
    for (int n0 : {0, config.n}) {
      auto path = IterateBestResponse(config, inst.price, n0, config.n + 1);
      EXPECT_EQ(path, testing::NaiveIterate(inst, n0));
      EXPECT_TRUE(std::is_sorted(path.begin(), path.end()) ||
                  std::is_sorted(path.rbegin(), path.rend()));
    }
  }
}

TEST(SelectEquilibriumTest, Examples) {
  GameConfig strong = GameConfig::Default(0.75);
  EquilibriumSet multi = SolveFee(strong, 5.99);
  EXPECT_EQ(SelectEquilibrium(multi, SelectionPolicy::kIterateFromZero, strong), 1);
  EXPECT_EQ(SelectEquilibrium(multi, SelectionPolicy::kMax, strong), 4);
  EXPECT_EQ(SelectEquilibrium(multi, SelectionPolicy::kMin, strong), 1);
  EXPECT_EQ(SelectEquilibrium(multi, SelectionPolicy::kIterateFromN, strong), 4);
  GameConfig weak = GameConfig::Default(0.25);
  EXPECT_EQ(SelectEquilibrium(SolveFee(weak, 2.24), SelectionPolicy::kMin, weak), 6);
}

TEST(SelectEquilibriumTest, EmptySetSignals) {
  EquilibriumSet empty;
  EXPECT_EQ(ErrorOf([&] {
              SelectEquilibrium(empty, SelectionPolicy::kMin, GameConfig::Default(0.25));
            }),
            ErrorCode::kNoEquilibrium);
}

TEST(SelectionPolicyTest, NamesRoundTrip) {
  for (auto p : {SelectionPolicy::kMin, SelectionPolicy::kMax,
                 SelectionPolicy::kIterateFromZero, SelectionPolicy::kIterateFromN}) {
    EXPECT_EQ(ParseSelectionPolicy(SelectionPolicyName(p)), p);
  }
}

TEST(ExactlyKIntervalTest, AgreesWithEnumeration) {
  std::mt19937_64 rng(14);
  for (int i = 0; i < 300; ++i) {
    testing::Instance inst = testing::RandomInstance(rng);
    GameConfig config = FromInstance(inst);
    auto fee = testing::EnumerateFee(inst);
    for (int k = 0; k <= config.n; ++k) {
      bool in_fee = std::find(fee.begin(), fee.end(), k) != fee.end();
      EXPECT_EQ(ExactlyKInterval(config, k).Contains(inst.price), in_fee)
          << "instance " << i << " k=" << k;
    }
  }
}

TEST(PriceScheduleTest, WeakMidpoints) {
  PriceSchedule s = BuildPriceSchedule(GameConfig::Default(0.25), ScheduleStrategy::kMidpoint);
  std::vector<double> expected{5.75, 5.0, 4.25, 3.5, 2.75, 2.0};
  ASSERT_EQ(s.entries.size(), 6u);
  for (int k = 1; k <= 6; ++k) {
    EXPECT_NEAR(s.ForTarget(k).chosen_price, expected[k - 1], 1e-12);
    EXPECT_EQ(s.ForTarget(k).fee_set_at_price, (std::vector<int>{k}));
  }
  EXPECT_EQ(s.ForTarget(6).interval_low, 1.5);
  EXPECT_EQ(s.ForTarget(6).interval_high, 2.5);
}

TEST(PriceScheduleTest, ExplicitOverrides) {
  PriceSchedule s = BuildPriceSchedule(GameConfig::Default(0.25), ScheduleStrategy::kExplicit,
                                       {{6, 2.24}, {1, 5.99}});
  EXPECT_EQ(s.ForTarget(6).chosen_price, 2.24);
  EXPECT_EQ(s.ForTarget(1).chosen_price, 5.99);
  EXPECT_NEAR(s.ForTarget(3).chosen_price, 4.25, 1e-12);
}

TEST(PriceScheduleTest, StrongNetworkEffectMultiplicity) {
  PriceSchedule s = BuildPriceSchedule(GameConfig::Default(0.75), ScheduleStrategy::kMidpoint);
  EXPECT_NEAR(s.ForTarget(4).chosen_price, 5.5, 1e-12);
  EXPECT_EQ(s.ForTarget(4).fee_set_at_price, (std::vector<int>{3, 4, 5, 6}));
}

TEST(PriceScheduleTest, OverrideOutsideIntervalRejected) {
  EXPECT_EQ(ErrorOf([] {
              BuildPriceSchedule(GameConfig::Default(0.25), ScheduleStrategy::kExplicit,
                                 {{6, 3.0}});
            }),
            ErrorCode::kOverrideOutOfInterval);
  EXPECT_EQ(ErrorOf([] {
              BuildPriceSchedule(GameConfig::Default(0.25), ScheduleStrategy::kMidpoint,
                                 {{6, 2.24}});
            }),
            ErrorCode::kInvalidSpec);
}

TEST(PriceScheduleTest, EmptyIntervalRejected) {
  // Equal thetas collapse the interior bands.
  GameConfig config;
  config.n = 3;
  config.beta = 0.5;
  config.thetas = {2, 2, 2};
  EXPECT_EQ(ErrorOf([&] { BuildPriceSchedule(config, ScheduleStrategy::kMidpoint); }),
            ErrorCode::kEmptyInterval);
}

TEST(PriceSelectingLevelTest, StrongNetworkEffect) {
  GameConfig config = GameConfig::Default(0.75);
  for (int k : {2, 4, 6}) {
    double p = PriceSelectingLevel(config, k, SelectionPolicy::kIterateFromZero);
    EXPECT_EQ(SelectEquilibrium(SolveFee(config, p), SelectionPolicy::kIterateFromZero, config),
              k);
    EXPECT_TRUE(ExactlyKInterval(config, k).Contains(p));
  }
}

}  // namespace
}  // namespace herdsim

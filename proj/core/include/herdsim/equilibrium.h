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

#ifndef HERDSIM_EQUILIBRIUM_H_
#define HERDSIM_EQUILIBRIUM_H_

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "herdsim/game.h"

namespace herdsim {

enum class Stability { kAttracting, kNeutral, kRepelling };
std::string_view StabilityName(Stability stability);

struct FixedPoint {
  int n_star = 0;
  Stability stability = Stability::kNeutral;

  bool operator==(const FixedPoint&) const = default;
};

// All fulfilled-expectation attendance levels at one price, ascending.
struct EquilibriumSet {
  double price = 0.0;
  std::vector<FixedPoint> fixed_points;
  std::string config_hash;

  std::vector<int> Levels() const;
  bool Contains(int n_star) const;
};

enum class SelectionPolicy { kMin, kMax, kIterateFromZero, kIterateFromN };
std::string_view SelectionPolicyName(SelectionPolicy policy);
// Accepts the snake_case names; throws Error(kInvalidSpec) otherwise.
SelectionPolicy ParseSelectionPolicy(std::string_view text);

// Number of players whose utility is non-negative when everyone expects
// n_assumed attendees.
int BestResponseCount(const GameConfig& config, double price, int n_assumed);

EquilibriumSet SolveFee(const GameConfig& config, double price);

// Adaptive dynamics n -> BestResponseCount(n) starting at n0. The returned
// trajectory ends with the fixed point repeated once. Throws
// Error(kNonConvergence) if max_iter steps do not reach a fixed point.
std::vector<int> IterateBestResponse(const GameConfig& config, double price,
                                     int n0, int max_iter);

// Throws Error(kNoEquilibrium) when Min/Max meet an empty set.
int SelectEquilibrium(const EquilibriumSet& eq, SelectionPolicy policy,
                      const GameConfig& config);

// Standalone values sorted descending; rank k (1-based) is element k-1.
std::vector<double> SortedThetasDescending(const GameConfig& config);

// Price interval (low, high] on which exactly k players attending is
// self-fulfilling. k = 0 has high = +inf; k = n has low = -inf.
struct PriceInterval {
  double low = 0.0;
  double high = 0.0;
  bool Contains(double price) const { return low < price && price <= high; }
};
PriceInterval ExactlyKInterval(const GameConfig& config, int k);

enum class ScheduleStrategy { kMidpoint, kExplicit };
std::string_view ScheduleStrategyName(ScheduleStrategy strategy);
ScheduleStrategy ParseScheduleStrategy(std::string_view text);

struct ScheduleEntry {
  int target_k = 0;
  double interval_low = 0.0;   // exclusive
  double interval_high = 0.0;  // inclusive
  double chosen_price = 0.0;
  std::vector<int> fee_set_at_price;
};

// One entry per target level k = 1..n, ordered by k.
struct PriceSchedule {
  std::vector<ScheduleEntry> entries;
  ScheduleStrategy strategy = ScheduleStrategy::kMidpoint;

  const ScheduleEntry& ForTarget(int k) const;
};

// Builds the threshold-derived schedule. The k = n interval is closed from
// below by a virtual (n+1)-th standalone value of 0. Under kExplicit, targets
// without an override fall back to the midpoint.
//
// Errors: kEmptyInterval when an interval has non-positive width,
// kOverrideOutOfInterval when an override misses its interval.
PriceSchedule BuildPriceSchedule(const GameConfig& config,
                                 ScheduleStrategy strategy,
                                 const std::map<int, double>& overrides = {});

// A price inside target k's schedule interval whose selected equilibrium is
// exactly k: the midpoint of the widest such sub-interval. Throws
// Error(kNoEquilibrium) if the selection never lands on k inside the interval.
double PriceSelectingLevel(const GameConfig& config, int k,
                           SelectionPolicy policy);

}  // namespace herdsim

#endif  // HERDSIM_EQUILIBRIUM_H_

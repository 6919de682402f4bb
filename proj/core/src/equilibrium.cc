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

#include <algorithm>
#include <functional>
#include <limits>

#include "herdsim/error.h"
#include "herdsim/numfmt.h"

namespace herdsim {

std::string_view StabilityName(Stability stability) {
  switch (stability) {
    case Stability::kAttracting: return "attracting";
    case Stability::kNeutral: return "neutral";
    case Stability::kRepelling: return "repelling";
  }
  return "neutral";
}

std::vector<int> EquilibriumSet::Levels() const {
  std::vector<int> out;
  out.reserve(fixed_points.size());
  for (const auto& fp : fixed_points) out.push_back(fp.n_star);
  return out;
}

bool EquilibriumSet::Contains(int n_star) const {
  return std::any_of(fixed_points.begin(), fixed_points.end(),
                     [n_star](const FixedPoint& fp) { return fp.n_star == n_star; });
}

std::string_view SelectionPolicyName(SelectionPolicy policy) {
  switch (policy) {
    case SelectionPolicy::kMin: return "min";
    case SelectionPolicy::kMax: return "max";
    case SelectionPolicy::kIterateFromZero: return "iterate_from_zero";
    case SelectionPolicy::kIterateFromN: return "iterate_from_n";
  }
  return "iterate_from_zero";
}

SelectionPolicy ParseSelectionPolicy(std::string_view text) {
  for (auto p : {SelectionPolicy::kMin, SelectionPolicy::kMax,
                 SelectionPolicy::kIterateFromZero, SelectionPolicy::kIterateFromN}) {
    if (SelectionPolicyName(p) == text) return p;
  }
  throw Error(ErrorCode::kInvalidSpec,
              "unknown selection policy '" + std::string(text) + "'");
}

int BestResponseCount(const GameConfig& config, double price, int n_assumed) {
  int count = 0;
  for (double theta : config.thetas) {
    if (Decide(theta, config.beta, n_assumed, price) == Decision::kAttend) ++count;
  }
  return count;
}

std::vector<int> IterateBestResponse(const GameConfig& config, double price,
                                     int n0, int max_iter) {
  if (n0 < 0 || n0 > config.n) {
    throw Error(ErrorCode::kOutOfRange, "start level " + std::to_string(n0) +
                                            " outside [0, n]");
  }
  std::vector<int> trajectory{n0};
  int current = n0;
  for (int step = 0; step < max_iter; ++step) {
    int next = BestResponseCount(config, price, current);
    trajectory.push_back(next);
    if (next == current) return trajectory;
    current = next;
  }
  throw Error(ErrorCode::kNonConvergence,
              "best-response iteration from " + std::to_string(n0) +
                  " did not settle within " + std::to_string(max_iter) + " steps");
}

namespace {

int Terminal(const GameConfig& config, double price, int n0) {
  return IterateBestResponse(config, price, n0, config.n + 1).back();
}

Stability Classify(const GameConfig& config, double price, int n_star) {
  int below = std::max(n_star - 1, 0);
  int above = std::min(n_star + 1, config.n);
  int hits = (Terminal(config, price, below) == n_star ? 1 : 0) +
             (Terminal(config, price, above) == n_star ? 1 : 0);
  if (hits == 2) return Stability::kAttracting;
  if (hits == 0) return Stability::kRepelling;
  return Stability::kNeutral;
}

}  // namespace

EquilibriumSet SolveFee(const GameConfig& config, double price) {
  EquilibriumSet eq;
  eq.price = price;
  eq.config_hash = ConfigHash(config);
  for (int level = 0; level <= config.n; ++level) {
    if (BestResponseCount(config, price, level) == level) {
      eq.fixed_points.push_back({level, Classify(config, price, level)});
    }
  }
  return eq;
}

int SelectEquilibrium(const EquilibriumSet& eq, SelectionPolicy policy,
                      const GameConfig& config) {
  switch (policy) {
    case SelectionPolicy::kMin:
    case SelectionPolicy::kMax:
      if (eq.fixed_points.empty()) {
        throw Error(ErrorCode::kNoEquilibrium,
                    "no fulfilled-expectation equilibrium at price " +
                        FormatReal(eq.price));
      }
      return policy == SelectionPolicy::kMin ? eq.fixed_points.front().n_star
                                             : eq.fixed_points.back().n_star;
    case SelectionPolicy::kIterateFromZero:
      return Terminal(config, eq.price, 0);
    case SelectionPolicy::kIterateFromN:
      return Terminal(config, eq.price, config.n);
  }
  throw Error(ErrorCode::kInvalidSpec, "unhandled selection policy");
}

std::vector<double> SortedThetasDescending(const GameConfig& config) {
  std::vector<double> sorted = config.thetas;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  return sorted;
}

PriceInterval ExactlyKInterval(const GameConfig& config, int k) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  auto sorted = SortedThetasDescending(config);
  const int n = config.n;
  // Exactly k attend under expectation k iff the k-th largest value clears
  // the bar and the (k+1)-th does not. Same arithmetic as Utility().
  double high = k == 0 ? kInf : sorted[k - 1] + config.beta * k;
  double low = k == n ? -kInf : sorted[k] + config.beta * k;
  return {low, high};
}

std::string_view ScheduleStrategyName(ScheduleStrategy strategy) {
  return strategy == ScheduleStrategy::kMidpoint ? "midpoint" : "explicit";
}

ScheduleStrategy ParseScheduleStrategy(std::string_view text) {
  if (text == "midpoint") return ScheduleStrategy::kMidpoint;
  if (text == "explicit") return ScheduleStrategy::kExplicit;
  throw Error(ErrorCode::kInvalidSpec,
              "unknown schedule strategy '" + std::string(text) + "'");
}

const ScheduleEntry& PriceSchedule::ForTarget(int k) const {
  for (const auto& e : entries) {
    if (e.target_k == k) return e;
  }
  throw Error(ErrorCode::kOutOfRange,
              "schedule has no entry for target " + std::to_string(k));
}

namespace {

PriceInterval ScheduleInterval(const GameConfig& config, int k) {
  PriceInterval interval = ExactlyKInterval(config, k);
  if (k == config.n) interval.low = 0.0 + config.beta * k;
  return interval;
}

}  // namespace

PriceSchedule BuildPriceSchedule(const GameConfig& config,
                                 ScheduleStrategy strategy,
                                 const std::map<int, double>& overrides) {
  RequireValidConfig(config);
  for (const auto& [k, price] : overrides) {
    if (k < 1 || k > config.n) {
      throw Error(ErrorCode::kOverrideOutOfInterval,
                  "override target " + std::to_string(k) + " outside 1..n");
    }
  }
  if (strategy == ScheduleStrategy::kMidpoint && !overrides.empty()) {
    throw Error(ErrorCode::kInvalidSpec,
                "price overrides require the explicit strategy");
  }
  PriceSchedule schedule;
  schedule.strategy = strategy;
  for (int k = 1; k <= config.n; ++k) {
    PriceInterval interval = ScheduleInterval(config, k);
    if (!(interval.high > interval.low)) {
      throw Error(ErrorCode::kEmptyInterval,
                  "price interval for target " + std::to_string(k) + " is (" +
                      FormatReal(interval.low) + ", " + FormatReal(interval.high) +
                      "]; standalone values must be distinct and positive");
    }
    ScheduleEntry entry;
    entry.target_k = k;
    entry.interval_low = interval.low;
    entry.interval_high = interval.high;
    entry.chosen_price = (interval.low + interval.high) / 2.0;
    if (auto it = overrides.find(k); it != overrides.end()) {
      if (!interval.Contains(it->second)) {
        throw Error(ErrorCode::kOverrideOutOfInterval,
                    "override " + FormatReal(it->second) + " for target " +
                        std::to_string(k) + " outside (" + FormatReal(interval.low) +
                        ", " + FormatReal(interval.high) + "]");
      }
      entry.chosen_price = it->second;
    }
    entry.fee_set_at_price = SolveFee(config, entry.chosen_price).Levels();
    schedule.entries.push_back(std::move(entry));
  }
  return schedule;
}

double PriceSelectingLevel(const GameConfig& config, int k,
                           SelectionPolicy policy) {
  PriceInterval interval = ScheduleInterval(config, k);
  // Selection is piecewise constant between the interval endpoints of every
  // level, so probing one point per piece is exhaustive.
  std::vector<double> cuts{interval.low, interval.high};
  for (int j = 0; j <= config.n; ++j) {
    PriceInterval other = ExactlyKInterval(config, j);
    for (double c : {other.low, other.high}) {
      if (interval.low < c && c < interval.high) cuts.push_back(c);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  double best_width = -1.0;
  double best_price = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double lo = cuts[i];
    double hi = cuts[i + 1];
    double mid = (lo + hi) / 2.0;
    int selected = SelectEquilibrium(SolveFee(config, mid), policy, config);
    if (selected == k && hi - lo > best_width) {
      best_width = hi - lo;
      best_price = mid;
    }
  }
  if (best_width < 0.0) {
    throw Error(ErrorCode::kNoEquilibrium,
                "no price in the target-" + std::to_string(k) + " interval selects " +
                    std::to_string(k) + " under " +
                    std::string(SelectionPolicyName(policy)));
  }
  return best_price;
}

}  // namespace herdsim

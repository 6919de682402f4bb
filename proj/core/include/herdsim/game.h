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

#ifndef HERDSIM_GAME_H_
#define HERDSIM_GAME_H_

#include <string>
#include <string_view>
#include <vector>

namespace herdsim {

// Structure of the participation game that every player knows.
struct GameConfig {
  int n = 6;
  double beta = 0.0;
  std::vector<double> thetas = {1, 2, 3, 4, 5, 6};
  // Lowest admissible price; only used when validating price lists.
  double price_floor = 0.0;

  // Six players with standalone values 1..6.
  static GameConfig Default(double beta);

  bool operator==(const GameConfig&) const = default;
};

struct AgentProfile {
  int agent_id = 0;
  double theta = 0.0;
  bool operator==(const AgentProfile&) const = default;
};

AgentProfile ProfileFor(const GameConfig& config, int agent_id);

enum class Decision { kAttend, kNotAttend };

// "attend" / "not_attend".
std::string_view DecisionName(Decision decision);
// Inverse of DecisionName; throws Error(kInvalidSpec) on anything else.
Decision ParseDecision(std::string_view text);

// Payoff of attending when n_total players attend in total (self included).
double Utility(double theta, double beta, int n_total, double price);

// Attend iff the utility at the expected total is non-negative. No epsilon.
Decision Decide(double theta, double beta, int n_expected, double price);

struct ConfigViolation {
  std::string field;
  std::string message;
};

std::vector<ConfigViolation> ValidateConfig(const GameConfig& config);

// Throws Error(kInvalidConfig) listing every violation.
void RequireValidConfig(const GameConfig& config);

// Hex FNV-1a digest over a canonical rendering of the config.
std::string ConfigHash(const GameConfig& config);

}  // namespace herdsim

#endif  // HERDSIM_GAME_H_

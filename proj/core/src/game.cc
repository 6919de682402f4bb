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

#include "herdsim/game.h"

#include <cmath>
#include <cstdint>
#include <cstdio>

#include "herdsim/error.h"
#include "herdsim/numfmt.h"

namespace herdsim {

GameConfig GameConfig::Default(double beta) {
  GameConfig config;
  config.beta = beta;
  return config;
}

AgentProfile ProfileFor(const GameConfig& config, int agent_id) {
  if (agent_id < 0 || agent_id >= static_cast<int>(config.thetas.size())) {
    throw Error(ErrorCode::kOutOfRange,
                "agent id " + std::to_string(agent_id) + " outside [0, " +
                    std::to_string(config.thetas.size()) + ")");
  }
  return {agent_id, config.thetas[agent_id]};
}

std::string_view DecisionName(Decision decision) {
  return decision == Decision::kAttend ? "attend" : "not_attend";
}

Decision ParseDecision(std::string_view text) {
  if (text == "attend") return Decision::kAttend;
  if (text == "not_attend") return Decision::kNotAttend;
  throw Error(ErrorCode::kInvalidSpec,
              "unknown decision '" + std::string(text) + "'");
}

double Utility(double theta, double beta, int n_total, double price) {
  return theta + beta * n_total - price;
}

Decision Decide(double theta, double beta, int n_expected, double price) {
  return Utility(theta, beta, n_expected, price) >= 0.0 ? Decision::kAttend
                                                        : Decision::kNotAttend;
}

std::vector<ConfigViolation> ValidateConfig(const GameConfig& config) {
  std::vector<ConfigViolation> out;
  if (config.n < 1) {
    out.push_back({"n", "n must be at least 1, got " + std::to_string(config.n)});
  }
  if (static_cast<int>(config.thetas.size()) != config.n) {
    out.push_back({"thetas", "expected " + std::to_string(config.n) +
                                 " standalone values, got " +
                                 std::to_string(config.thetas.size())});
  }
  if (!(config.beta >= 0.0) || !std::isfinite(config.beta)) {
    out.push_back({"beta", "beta must be a finite value >= 0, got " +
                               FormatReal(config.beta)});
  }
  for (std::size_t j = 0; j < config.thetas.size(); ++j) {
    if (!std::isfinite(config.thetas[j])) {
      out.push_back({"thetas", "theta[" + std::to_string(j) + "] is not finite"});
    }
  }
  if (!(config.price_floor >= 0.0)) {
    out.push_back({"price_floor", "price_floor must be >= 0, got " +
                                      FormatReal(config.price_floor)});
  }
  return out;
}

void RequireValidConfig(const GameConfig& config) {
  auto violations = ValidateConfig(config);
  if (violations.empty()) return;
  std::string message = "invalid game config:";
  for (const auto& v : violations) message += " [" + v.field + "] " + v.message + ";";
  throw Error(ErrorCode::kInvalidConfig, message);
}

std::string ConfigHash(const GameConfig& config) {
  std::string canonical = "n=" + std::to_string(config.n) +
                          ";beta=" + FormatReal(config.beta) + ";thetas=";
  for (double t : config.thetas) canonical += FormatReal(t) + ",";
  canonical += ";floor=" + FormatReal(config.price_floor);
  return Fnv1aHex(canonical);
}

}  // namespace herdsim

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

#ifndef HERDSIM_DECISION_CONTEXT_H_
#define HERDSIM_DECISION_CONTEXT_H_

#include <string>

#include "herdsim/game.h"
#include "herdsim/history.h"

namespace herdsim {

// Everything an agent is told before it moves in one round.
struct DecisionContext {
  AgentProfile agent;
  GameConfig game;
  double current_price = 0.0;
  // Output of Render() for this agent's curated view.
  std::string rendered_history;
  int round_index = 1;
  // When false the LLM prompt only states the agent's own standalone value.
  bool know_all_thetas = true;

  bool operator==(const DecisionContext&) const = default;
};

// What an agent learns about itself once a round resolves.
struct OwnOutcome {
  double price = 0.0;
  int realized_n = 0;
  AgentMove own_move;

  bool operator==(const OwnOutcome&) const = default;
};

}  // namespace herdsim

#endif  // HERDSIM_DECISION_CONTEXT_H_

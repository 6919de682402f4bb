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

#ifndef HERDSIM_AGENTS_H_
#define HERDSIM_AGENTS_H_

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "herdsim/decision_context.h"
#include "herdsim/equilibrium.h"
#include "herdsim/llm_client.h"

namespace herdsim {

// kExternal marks a seat played by a remote process through the session
// server; it cannot be instantiated in-process.
enum class PolicyKind {
  kOptimist,
  kPessimist,
  kMyopic,
  kFictitiousPlay,
  kEquilibriumOracle,
  kLlm,
  kExternal,
};
std::string_view PolicyKindName(PolicyKind kind);
PolicyKind ParsePolicyKind(std::string_view text);

struct PolicySpec {
  PolicyKind kind = PolicyKind::kMyopic;
  // Round-1 expectation for Myopic / FictitiousPlay; defaults to n.
  std::optional<int> prior_n;
  SelectionPolicy selection = SelectionPolicy::kIterateFromZero;
  std::optional<CompletionParams> llm_params;

  bool operator==(const PolicySpec&) const = default;
};

std::vector<std::string> ValidatePolicySpec(const PolicySpec& spec, const GameConfig& game);

// Pure decision rule. `completer` is only consulted for kLlm. Throws
// Error(kParseFailed) when every LLM reply fails to parse, transport errors
// from the completer, and Error(kNoEquilibrium) from selection.
AgentMove ExpectAndDecide(const PolicySpec& spec, const DecisionContext& context,
                          std::span<const OwnOutcome> own_history,
                          ChatCompleter* completer = nullptr);

// A player bound to one seat. Implementations keep whatever belief state
// they need; each handle is used by one query at a time.
class Agent {
 public:
  virtual ~Agent() = default;
  virtual AgentMove Act(const DecisionContext& context) = 0;
  virtual void Observe(const OwnOutcome& outcome) = 0;
};

// Throws Error(kInvalidSpec) for invalid specs, for kExternal, and for kLlm
// without a completer.
std::unique_ptr<Agent> MakeAgent(const PolicySpec& spec, const GameConfig& game,
                                 const AgentProfile& profile,
                                 std::shared_ptr<ChatCompleter> completer = nullptr);

}  // namespace herdsim

#endif  // HERDSIM_AGENTS_H_

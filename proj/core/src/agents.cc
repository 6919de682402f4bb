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

#include "herdsim/agents.h"

#include "herdsim/error.h"

namespace herdsim {

std::string_view PolicyKindName(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kOptimist: return "optimist";
    case PolicyKind::kPessimist: return "pessimist";
    case PolicyKind::kMyopic: return "myopic";
    case PolicyKind::kFictitiousPlay: return "fictitious_play";
    case PolicyKind::kEquilibriumOracle: return "equilibrium_oracle";
    case PolicyKind::kLlm: return "llm";
    case PolicyKind::kExternal: return "external";
  }
  return "external";
}

PolicyKind ParsePolicyKind(std::string_view text) {
  for (auto k : {PolicyKind::kOptimist, PolicyKind::kPessimist, PolicyKind::kMyopic,
                 PolicyKind::kFictitiousPlay, PolicyKind::kEquilibriumOracle,
                 PolicyKind::kLlm, PolicyKind::kExternal}) {
    if (PolicyKindName(k) == text) return k;
  }
  throw Error(ErrorCode::kInvalidSpec, "unknown policy kind '" + std::string(text) + "'");
}

std::vector<std::string> ValidatePolicySpec(const PolicySpec& spec, const GameConfig& game) {
  std::vector<std::string> problems;
  if (spec.kind == PolicyKind::kLlm && !spec.llm_params) {
    problems.push_back("llm policy requires llm parameters");
  }
  if (spec.kind != PolicyKind::kLlm && spec.llm_params) {
    problems.push_back("llm parameters given for a non-llm policy");
  }
  if (spec.llm_params) {
    for (auto& p : ValidateCompletionParams(*spec.llm_params)) problems.push_back(p);
  }
  if (spec.prior_n && (*spec.prior_n < 0 || *spec.prior_n > game.n)) {
    problems.push_back("prior_n must lie in [0, n]");
  }
  return problems;
}

namespace {

AgentMove Consistent(const DecisionContext& context, int expected_n, PolicyKind kind) {
  AgentMove move;
  move.expected_n = expected_n;
  move.decision = Decide(context.agent.theta, context.game.beta, expected_n,
                         context.current_price);
  move.rationale = std::string(PolicyKindName(kind));
  return move;
}

AgentMove AskModel(const PolicySpec& spec, const DecisionContext& context,
                   ChatCompleter* completer) {
  if (completer == nullptr) {
    throw Error(ErrorCode::kInvalidSpec, "llm policy has no completion backend");
  }
  const CompletionParams& params = *spec.llm_params;
  const std::string prompt = BuildPrompt(context);
  std::string last_problem;
  for (int attempt = 0; attempt <= params.max_retries; ++attempt) {
    std::string reply = completer->Complete(prompt, params);
    try {
      ParsedMove parsed = ParseMove(reply, context.game.n);
      AgentMove move;
      move.expected_n = parsed.expected_n;
      move.decision = parsed.decision;
      move.rationale = std::move(parsed.raw_text);
      return move;
    } catch (const Error& e) {
      last_problem = e.what();
    }
  }
  throw Error(ErrorCode::kParseFailed,
              "no usable reply after " + std::to_string(params.max_retries + 1) +
                  " attempts; last problem: " + last_problem);
}

}  // namespace

AgentMove ExpectAndDecide(const PolicySpec& spec, const DecisionContext& context,
                          std::span<const OwnOutcome> own_history,
                          ChatCompleter* completer) {
  const int n = context.game.n;
  const int prior = spec.prior_n.value_or(n);
  switch (spec.kind) {
    case PolicyKind::kOptimist:
      return Consistent(context, n, spec.kind);
    case PolicyKind::kPessimist:
      return Consistent(context, 0, spec.kind);
    case PolicyKind::kMyopic:
      return Consistent(context, own_history.empty() ? prior : own_history.back().realized_n,
                        spec.kind);
    case PolicyKind::kFictitiousPlay: {
      if (own_history.empty()) return Consistent(context, prior, spec.kind);
      long long sum = 0;
      for (const auto& o : own_history) sum += o.realized_n;
      const long long count = static_cast<long long>(own_history.size());
      // floor(mean + 1/2) in integers: ties round up.
      return Consistent(context, static_cast<int>((2 * sum + count) / (2 * count)), spec.kind);
    }
    case PolicyKind::kEquilibriumOracle: {
      EquilibriumSet eq = SolveFee(context.game, context.current_price);
      return Consistent(context, SelectEquilibrium(eq, spec.selection, context.game),
                        spec.kind);
    }
    case PolicyKind::kLlm:
      return AskModel(spec, context, completer);
    case PolicyKind::kExternal:
      break;
  }
  throw Error(ErrorCode::kInvalidSpec, "external seats are played remotely");
}

namespace {

class PolicyAgent final : public Agent {
 public:
  PolicyAgent(PolicySpec spec, AgentProfile profile, std::shared_ptr<ChatCompleter> completer)
      : spec_(std::move(spec)), profile_(profile), completer_(std::move(completer)) {}

  AgentMove Act(const DecisionContext& context) override {
    return ExpectAndDecide(spec_, context, history_, completer_.get());
  }

  void Observe(const OwnOutcome& outcome) override { history_.push_back(outcome); }

 private:
  PolicySpec spec_;
  AgentProfile profile_;
  std::shared_ptr<ChatCompleter> completer_;
  std::vector<OwnOutcome> history_;
};

}  // namespace

std::unique_ptr<Agent> MakeAgent(const PolicySpec& spec, const GameConfig& game,
                                 const AgentProfile& profile,
                                 std::shared_ptr<ChatCompleter> completer) {
  if (auto problems = ValidatePolicySpec(spec, game); !problems.empty()) {
    throw Error(ErrorCode::kInvalidSpec, "invalid policy spec: " + problems.front());
  }
  if (spec.kind == PolicyKind::kExternal) {
    throw Error(ErrorCode::kInvalidSpec, "external seats cannot be instantiated in-process");
  }
  if (spec.kind == PolicyKind::kLlm && !completer) {
    throw Error(ErrorCode::kInvalidSpec, "llm policy requires a completion backend");
  }
  return std::make_unique<PolicyAgent>(spec, profile, std::move(completer));
}

}  // namespace herdsim

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

#ifndef HERDSIM_LLM_CLIENT_H_
#define HERDSIM_LLM_CLIENT_H_

#include <chrono>
#include <cstddef>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "herdsim/decision_context.h"

namespace herdsim {

// Bumped whenever the prompt text changes; recorded in every run.
inline constexpr std::string_view kPromptTemplateVersion = "herdsim-prompt-v1";
inline constexpr std::string_view kApiKeyEnvVar = "HERDSIM_API_KEY";

struct CompletionParams {
  // Full URL of an OpenAI-style chat-completions endpoint.
  std::string endpoint;
  std::string model_name;
  double temperature = 0.7;
  int max_retries = 2;
  std::chrono::milliseconds timeout{60000};
  std::chrono::milliseconds initial_backoff{500};
  std::string auth_header = "Authorization";
  // Sent as "Bearer <api_key>" when non-empty.
  std::string api_key;

  bool operator==(const CompletionParams&) const = default;
};

std::vector<std::string> ValidateCompletionParams(const CompletionParams& params);

// Deterministic prompt for one agent and round.
std::string BuildPrompt(const DecisionContext& context);

// Append-only, thread-safe log of request/response events as JSON lines.
class RequestLog {
 public:
  void Append(std::string json_line);
  std::vector<std::string> Lines() const;
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::vector<std::string> lines_;
};

// A chat completion backend. Complete() wraps Attempt() with retries and
// exponential backoff on transport errors and timeouts; service errors
// (non-2xx) are not retried.
class ChatCompleter {
 public:
  explicit ChatCompleter(std::shared_ptr<RequestLog> log = nullptr)
      : log_(std::move(log)) {}
  virtual ~ChatCompleter() = default;

  // Throws Error(kTimeout | kTransportError | kServiceError).
  std::string Complete(const std::string& prompt, const CompletionParams& params);

  const std::shared_ptr<RequestLog>& log() const { return log_; }

 protected:
  // One request. Throws Error with kTimeout, kTransportError or kServiceError.
  virtual std::string Attempt(const std::string& prompt,
                              const CompletionParams& params) = 0;

 private:
  std::shared_ptr<RequestLog> log_;
};

// JSON-over-HTTP client for {model, messages, temperature} requests.
class HttpChatClient : public ChatCompleter {
 public:
  using ChatCompleter::ChatCompleter;

 protected:
  std::string Attempt(const std::string& prompt, const CompletionParams& params) override;
};

// Offline stand-in that replays a fixed script, cycling when exhausted.
class ScriptedCompleter : public ChatCompleter {
 public:
  enum class StepKind { kReply, kTransportError, kTimeout, kServiceError };
  struct Step {
    StepKind kind = StepKind::kReply;
    std::string text;
  };

  explicit ScriptedCompleter(std::vector<Step> script,
                             std::shared_ptr<RequestLog> log = nullptr);

  // One JSON object per line: {"reply": "..."} or {"fail": "transport" |
  // "timeout" | "service"}. Blank lines are skipped.
  static std::vector<Step> ParseScript(std::string_view jsonl);
  static std::vector<Step> LoadScript(const std::string& path);

  std::size_t calls() const;

 protected:
  std::string Attempt(const std::string& prompt, const CompletionParams& params) override;

 private:
  std::vector<Step> script_;
  mutable std::mutex mu_;
  std::size_t next_ = 0;
};

enum class ParsePath { kJson, kRegex };
std::string_view ParsePathName(ParsePath path);

struct ParsedMove {
  int expected_n = 0;
  Decision decision = Decision::kNotAttend;
  std::string raw_text;
  ParsePath path = ParsePath::kJson;
};

// First JSON object with "expected_attendance" and "decision"; otherwise a
// keyword scan. Throws Error(kMalformedResponse) when nothing parses and
// Error(kOutOfRange) when the expectation lies outside [0, n].
ParsedMove ParseMove(std::string_view text, int n);

// {"expected_attendance": N, "decision": "..."}
std::string SerializeMove(const ParsedMove& move);

}  // namespace herdsim

#endif  // HERDSIM_LLM_CLIENT_H_

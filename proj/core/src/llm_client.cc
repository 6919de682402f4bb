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

#include "herdsim/llm_client.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>
#include <sstream>
#include <thread>

#include "herdsim/error.h"
#include "herdsim/numfmt.h"
#include "httplib.h"
#include "json.hpp"

namespace herdsim {

using nlohmann::json;

std::vector<std::string> ValidateCompletionParams(const CompletionParams& params) {
  std::vector<std::string> problems;
  if (params.model_name.empty()) problems.push_back("model name is empty");
  if (!(params.temperature >= 0.0 && params.temperature <= 2.0)) {
    problems.push_back("temperature must lie in [0, 2]");
  }
  if (params.max_retries < 0) problems.push_back("max_retries must be >= 0");
  if (params.timeout.count() <= 0) problems.push_back("timeout must be positive");
  return problems;
}

std::string BuildPrompt(const DecisionContext& context) {
  const GameConfig& game = context.game;
  const std::string n = std::to_string(game.n);
  std::string p;
  p += "You are scholar " + std::to_string(context.agent.agent_id + 1) + " of " + n +
       " deciding whether to attend a conference. This is round " +
       std::to_string(context.round_index) + ".\n\n";

  p += "Game rules:\n";
  p += "- total number of scholars: " + n + "\n";
  p += "- each scholar chooses one action: attend or not_attend\n";
  p += "- network effect strength: " + FormatReal(game.beta) + "\n";
  p += "- a scholar who attends gets utility = standalone value + network effect "
       "strength * N - price, where N is the total number of attendees including "
       "yourself\n";
  p += "- a scholar attends if and only if that utility is non-negative; a scholar "
       "who does not attend gets 0\n";
  p += "- nobody can observe the other scholars' choices in the current round\n\n";

  p += "Your parameters:\n";
  p += "- your standalone value: " + FormatReal(context.agent.theta) + "\n";
  if (context.know_all_thetas) {
    p += "- standalone values of all scholars: ";
    for (std::size_t j = 0; j < game.thetas.size(); ++j) {
      if (j > 0) p += ", ";
      p += FormatReal(game.thetas[j]);
    }
    p += "\n";
  }
  p += "\n";

  p += "History of previous rounds:\n";
  p += context.rendered_history + "\n\n";

  p += "This round:\n";
  p += "- current price: " + FormatFixed2(context.current_price) + "\n\n";

  p += "Estimate N, the total number of attendees this round (an integer from 0 to " +
       n + "), and decide whether to attend.\n";
  p += "Respond with a single JSON object and nothing else, in the form "
       "{\"expected_attendance\": <integer>, \"decision\": \"attend\" or "
       "\"not_attend\"}\n";
  return p;
}

void RequestLog::Append(std::string json_line) {
  std::lock_guard lock(mu_);
  lines_.push_back(std::move(json_line));
}

std::vector<std::string> RequestLog::Lines() const {
  std::lock_guard lock(mu_);
  return lines_;
}

std::size_t RequestLog::size() const {
  std::lock_guard lock(mu_);
  return lines_.size();
}

std::string ChatCompleter::Complete(const std::string& prompt,
                                    const CompletionParams& params) {
  auto backoff = params.initial_backoff;
  for (int attempt = 0;; ++attempt) {
    if (log_) {
      log_->Append(json{{"event", "request"},
                        {"attempt", attempt + 1},
                        {"model", params.model_name},
                        {"temperature", params.temperature},
                        {"prompt", prompt}}
                       .dump());
    }
    try {
      std::string reply = Attempt(prompt, params);
      if (log_) {
        log_->Append(
            json{{"event", "response"}, {"attempt", attempt + 1}, {"text", reply}}.dump());
      }
      return reply;
    } catch (const Error& e) {
      if (log_) {
        log_->Append(json{{"event", "error"},
                          {"attempt", attempt + 1},
                          {"code", ErrorCodeName(e.code())},
                          {"message", e.what()}}
                         .dump());
      }
      const bool retryable =
          e.code() == ErrorCode::kTransportError || e.code() == ErrorCode::kTimeout;
      if (!retryable || attempt >= params.max_retries) throw;
    }
    if (backoff.count() > 0) std::this_thread::sleep_for(backoff);
    backoff *= 2;
  }
}

namespace {

struct Endpoint {
  std::string scheme_host_port;
  std::string path;
};

Endpoint SplitEndpoint(const std::string& url) {
  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, kUrl)) {
    throw Error(ErrorCode::kTransportError, "malformed endpoint URL '" + url + "'");
  }
  return {m[1].str(), m[2].matched ? m[2].str() : "/"};
}

}  // namespace

std::string HttpChatClient::Attempt(const std::string& prompt,
                                    const CompletionParams& params) {
  Endpoint endpoint = SplitEndpoint(params.endpoint);
  httplib::Client client(endpoint.scheme_host_port);
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(params.timeout);
  auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(params.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  httplib::Headers headers;
  if (!params.api_key.empty()) {
    headers.emplace(params.auth_header, "Bearer " + params.api_key);
  }
  json body = {{"model", params.model_name},
               {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
               {"temperature", params.temperature}};

  const auto started = std::chrono::steady_clock::now();
  auto result = client.Post(endpoint.path, headers, body.dump(), "application/json");
  if (!result) {
    const auto elapsed = std::chrono::steady_clock::now() - started;
    const bool timed_out = result.error() == httplib::Error::ConnectionTimeout ||
                           elapsed >= params.timeout;
    throw Error(timed_out ? ErrorCode::kTimeout : ErrorCode::kTransportError,
                "request to " + params.endpoint + " failed: " +
                    httplib::to_string(result.error()));
  }
  if (result->status < 200 || result->status >= 300) {
    throw Error(ErrorCode::kServiceError, "endpoint returned HTTP " +
                                              std::to_string(result->status) + ": " +
                                              result->body);
  }
  try {
    json reply = json::parse(result->body);
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kServiceError,
                std::string("unexpected completion payload: ") + e.what());
  }
}

ScriptedCompleter::ScriptedCompleter(std::vector<Step> script,
                                     std::shared_ptr<RequestLog> log)
    : ChatCompleter(std::move(log)), script_(std::move(script)) {
  if (script_.empty()) {
    throw Error(ErrorCode::kInvalidSpec, "scripted completer needs at least one step");
  }
}

std::vector<ScriptedCompleter::Step> ScriptedCompleter::ParseScript(std::string_view jsonl) {
  std::vector<Step> steps;
  std::istringstream in{std::string(jsonl)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) {
      continue;
    }
    try {
      json obj = json::parse(line);
      Step step;
      if (obj.contains("reply")) {
        step.text = obj.at("reply").get<std::string>();
      } else {
        const std::string fail = obj.at("fail").get<std::string>();
        if (fail == "transport") step.kind = StepKind::kTransportError;
        else if (fail == "timeout") step.kind = StepKind::kTimeout;
        else if (fail == "service") step.kind = StepKind::kServiceError;
        else throw Error(ErrorCode::kInvalidSpec, "unknown failure kind '" + fail + "'");
      }
      steps.push_back(std::move(step));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kInvalidSpec, "mock script line " + std::to_string(line_no) +
                                               ": " + e.what());
    }
  }
  return steps;
}

std::vector<ScriptedCompleter::Step> ScriptedCompleter::LoadScript(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open mock script " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return ParseScript(buf.str());
}

std::size_t ScriptedCompleter::calls() const {
  std::lock_guard lock(mu_);
  return next_;
}

std::string ScriptedCompleter::Attempt(const std::string& /*prompt*/,
                                       const CompletionParams& /*params*/) {
  Step step;
  {
    std::lock_guard lock(mu_);
    step = script_[next_ % script_.size()];
    ++next_;
  }
  switch (step.kind) {
    case StepKind::kReply: return step.text;
    case StepKind::kTransportError:
      throw Error(ErrorCode::kTransportError, "scripted transport failure");
    case StepKind::kTimeout: throw Error(ErrorCode::kTimeout, "scripted timeout");
    case StepKind::kServiceError:
      throw Error(ErrorCode::kServiceError, "scripted service error");
  }
  return step.text;
}

std::string_view ParsePathName(ParsePath path) {
  return path == ParsePath::kJson ? "json" : "regex";
}

namespace {

// Index one past the brace closing the object opened at `open`, or npos.
std::size_t MatchBrace(std::string_view text, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = open; i < text.size(); ++i) {
    char c = text[i];
    if (in_string) {
      if (escaped) escaped = false;
      else if (c == '\\') escaped = true;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '{') ++depth;
    else if (c == '}' && --depth == 0) return i + 1;
  }
  return std::string_view::npos;
}

std::optional<Decision> NormalizeDecision(std::string text) {
  std::transform(text.begin(), text.end(), text.begin(), [](unsigned char c) {
    return (c == ' ' || c == '-') ? '_' : static_cast<char>(std::tolower(c));
  });
  if (text == "attend") return Decision::kAttend;
  if (text == "not_attend") return Decision::kNotAttend;
  return std::nullopt;
}

Error OutOfRangeError(long long value, int n) {
  return Error(ErrorCode::kOutOfRange, "expected attendance " + std::to_string(value) +
                                           " outside [0, " + std::to_string(n) + "]");
}

std::optional<ParsedMove> TryJson(std::string_view text, int n) {
  for (std::size_t open = text.find('{'); open != std::string_view::npos;
       open = text.find('{', open + 1)) {
    std::size_t close = MatchBrace(text, open);
    if (close == std::string_view::npos) continue;
    json obj = json::parse(text.substr(open, close - open), nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) continue;
    auto count_it = obj.find("expected_attendance");
    auto decision_it = obj.find("decision");
    if (count_it == obj.end() || decision_it == obj.end()) continue;
    if (!decision_it->is_string()) continue;
    auto decision = NormalizeDecision(decision_it->get<std::string>());
    if (!decision) continue;
    long long count = 0;
    if (count_it->is_number_integer()) {
      count = count_it->get<long long>();
    } else if (count_it->is_number_float()) {
      double v = count_it->get<double>();
      if (v != static_cast<double>(static_cast<long long>(v))) continue;
      count = static_cast<long long>(v);
    } else {
      continue;
    }
    if (count < 0 || count > n) throw OutOfRangeError(count, n);
    return ParsedMove{static_cast<int>(count), *decision, std::string(text), ParsePath::kJson};
  }
  return std::nullopt;
}

ParsedMove TryRegex(std::string_view text, int n) {
  static const std::regex kCount(R"(expect[a-z_]*[^0-9\-]{0,40}?(-?\d+))", std::regex::icase);
  static const std::regex kChoice(R"(\b(not[\s_\-]+attend|attend)\b)", std::regex::icase);
  const std::string s(text);

  std::optional<long long> first_out_of_range;
  std::optional<int> count;
  for (auto it = std::sregex_iterator(s.begin(), s.end(), kCount); it != std::sregex_iterator();
       ++it) {
    const std::string digits = (*it)[1].str();
    long long v = digits.size() > 12 ? (digits[0] == '-' ? -1 : n + 1LL) : std::stoll(digits);
    if (v >= 0 && v <= n) {
      count = static_cast<int>(v);
      break;
    }
    if (!first_out_of_range) first_out_of_range = v;
  }
  std::smatch choice;
  const bool has_choice = std::regex_search(s, choice, kChoice);
  if (!count && first_out_of_range && has_choice) throw OutOfRangeError(*first_out_of_range, n);
  if (!count || !has_choice) {
    throw Error(ErrorCode::kMalformedResponse,
                "no expectation/decision found in reply: " + s.substr(0, 200));
  }
  const std::string keyword = choice[1].str();
  const bool negated = keyword.size() > 3 && std::tolower(static_cast<unsigned char>(keyword[0])) == 'n';
  return ParsedMove{*count, negated ? Decision::kNotAttend : Decision::kAttend, s,
                    ParsePath::kRegex};
}

}  // namespace

ParsedMove ParseMove(std::string_view text, int n) {
  if (auto parsed = TryJson(text, n)) return *parsed;
  return TryRegex(text, n);
}

std::string SerializeMove(const ParsedMove& move) {
  return json{{"expected_attendance", move.expected_n},
              {"decision", DecisionName(move.decision)}}
      .dump();
}

}  // namespace herdsim

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

#ifndef HERDSIM_HISTORY_H_
#define HERDSIM_HISTORY_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "herdsim/game.h"

namespace herdsim {

// How a move was obtained. Anything but kOk is a fallback move
// (NotAttend, expected 0) substituted so the round can proceed.
enum class MoveStatus { kOk, kParseFailed, kTimeout, kError };
std::string_view MoveStatusName(MoveStatus status);
MoveStatus ParseMoveStatus(std::string_view text);

struct AgentMove {
  int expected_n = 0;
  Decision decision = Decision::kNotAttend;
  // Raw LLM output, or the policy name for deterministic agents.
  std::string rationale;
  MoveStatus status = MoveStatus::kOk;
  std::string error;

  bool IsFallback() const { return status != MoveStatus::kOk; }
  bool operator==(const AgentMove&) const = default;
};

AgentMove FallbackMove(MoveStatus status, std::string error);

struct RoundRecord {
  int round_index = 0;
  double price = 0.0;
  std::vector<AgentMove> moves;
  int realized_n = 0;
  std::vector<double> payoffs;

  bool operator==(const RoundRecord&) const = default;
};

// Counts attendance and pays attendees their utility at the realized total;
// non-attendees get 0.
RoundRecord ResolveRound(const GameConfig& config, int round_index, double price,
                         std::vector<AgentMove> moves);

// Append-only record of one replication.
class History {
 public:
  explicit History(GameConfig game) : game_(std::move(game)) {}

  // Throws Error(kIndexGap) unless round_index == size() + 1, and
  // Error(kInconsistentRecord) if realized_n or payoffs disagree with moves.
  void Append(RoundRecord record);

  const std::vector<RoundRecord>& records() const { return records_; }
  const GameConfig& game() const { return game_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  bool operator==(const History&) const = default;

 private:
  GameConfig game_;
  std::vector<RoundRecord> records_;
};

enum class HistoryOrder { kChronological, kReversed, kShuffled };
std::string_view HistoryOrderName(HistoryOrder order);
HistoryOrder ParseHistoryOrder(std::string_view text);

enum class DetailLevel { kAggregateOnly, kOwnOutcomes };
std::string_view DetailLevelName(DetailLevel detail);
DetailLevel ParseDetailLevel(std::string_view text);

struct CurationSpec {
  HistoryOrder order = HistoryOrder::kChronological;
  std::optional<std::uint64_t> shuffle_seed;
  std::optional<int> last_k;
  // Inclusive on both ends.
  std::optional<std::pair<double, double>> price_range;
  DetailLevel detail = DetailLevel::kOwnOutcomes;
  // Echo the agent's own past expectation back (off by default).
  bool include_expectation = false;

  bool operator==(const CurationSpec&) const = default;
};

// Empty when valid.
std::vector<std::string> ValidateCurationSpec(const CurationSpec& spec);

struct CuratedItem {
  int round_index = 0;
  double price = 0.0;
  int realized_n = 0;
  std::optional<Decision> own_decision;
  std::optional<double> own_payoff;
  std::optional<int> own_expectation;

  bool operator==(const CuratedItem&) const = default;
};

struct CuratedView {
  std::vector<CuratedItem> items;
  CurationSpec spec;
};

// Price filter, then last-k truncation, then ordering. Throws
// Error(kInvalidSpec) for an invalid spec.
CuratedView Curate(const History& history, const CurationSpec& spec, int agent_id);

inline constexpr std::string_view kNoHistoryLine = "No history available.";

// One line per item, joined by '\n' without a trailing newline:
//   Round {i}: price={p:.2f}, total_attendance={N}
// followed, when own outcomes are disclosed, by
//   , your_decision={attend|not_attend}, your_payoff={u:.2f}
// and optionally ", your_expectation={N}".
std::string Render(const CuratedView& view, const GameConfig& config);

}  // namespace herdsim

#endif  // HERDSIM_HISTORY_H_

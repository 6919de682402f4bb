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

#include "herdsim/history.h"

#include <algorithm>

#include "herdsim/error.h"
#include "herdsim/numfmt.h"
#include "herdsim/seeding.h"

namespace herdsim {

std::string_view MoveStatusName(MoveStatus status) {
  switch (status) {
    case MoveStatus::kOk: return "ok";
    case MoveStatus::kParseFailed: return "parse_failed";
    case MoveStatus::kTimeout: return "timeout";
    case MoveStatus::kError: return "error";
  }
  return "error";
}

MoveStatus ParseMoveStatus(std::string_view text) {
  for (auto s : {MoveStatus::kOk, MoveStatus::kParseFailed, MoveStatus::kTimeout,
                 MoveStatus::kError}) {
    if (MoveStatusName(s) == text) return s;
  }
  throw Error(ErrorCode::kInvalidSpec, "unknown move status '" + std::string(text) + "'");
}

AgentMove FallbackMove(MoveStatus status, std::string error) {
  AgentMove move;
  move.expected_n = 0;
  move.decision = Decision::kNotAttend;
  move.status = status;
  move.error = std::move(error);
  return move;
}

RoundRecord ResolveRound(const GameConfig& config, int round_index, double price,
                         std::vector<AgentMove> moves) {
  RoundRecord record;
  record.round_index = round_index;
  record.price = price;
  record.moves = std::move(moves);
  record.realized_n = static_cast<int>(
      std::count_if(record.moves.begin(), record.moves.end(),
                    [](const AgentMove& m) { return m.decision == Decision::kAttend; }));
  record.payoffs.reserve(record.moves.size());
  for (std::size_t j = 0; j < record.moves.size(); ++j) {
    record.payoffs.push_back(
        record.moves[j].decision == Decision::kAttend
            ? Utility(config.thetas.at(j), config.beta, record.realized_n, price)
            : 0.0);
  }
  return record;
}

void History::Append(RoundRecord record) {
  const int expected_index = static_cast<int>(records_.size()) + 1;
  if (record.round_index != expected_index) {
    throw Error(ErrorCode::kIndexGap, "expected round " + std::to_string(expected_index) +
                                          ", got " + std::to_string(record.round_index));
  }
  const auto n = static_cast<std::size_t>(game_.n);
  if (record.moves.size() != n || record.payoffs.size() != n) {
    throw Error(ErrorCode::kInconsistentRecord,
                "round " + std::to_string(record.round_index) + " must carry " +
                    std::to_string(n) + " moves and payoffs");
  }
  RoundRecord expected = ResolveRound(game_, record.round_index, record.price, record.moves);
  if (expected.realized_n != record.realized_n) {
    throw Error(ErrorCode::kInconsistentRecord,
                "round " + std::to_string(record.round_index) + " reports realized_n=" +
                    std::to_string(record.realized_n) + " but " +
                    std::to_string(expected.realized_n) + " moves attend");
  }
  if (expected.payoffs != record.payoffs) {
    throw Error(ErrorCode::kInconsistentRecord,
                "round " + std::to_string(record.round_index) +
                    " payoffs disagree with the utility rule");
  }
  records_.push_back(std::move(record));
}

std::string_view HistoryOrderName(HistoryOrder order) {
  switch (order) {
    case HistoryOrder::kChronological: return "chronological";
    case HistoryOrder::kReversed: return "reversed";
    case HistoryOrder::kShuffled: return "shuffled";
  }
  return "chronological";
}

HistoryOrder ParseHistoryOrder(std::string_view text) {
  for (auto o : {HistoryOrder::kChronological, HistoryOrder::kReversed,
                 HistoryOrder::kShuffled}) {
    if (HistoryOrderName(o) == text) return o;
  }
  throw Error(ErrorCode::kInvalidSpec, "unknown history order '" + std::string(text) + "'");
}

std::string_view DetailLevelName(DetailLevel detail) {
  return detail == DetailLevel::kAggregateOnly ? "aggregate_only" : "own_outcomes";
}

DetailLevel ParseDetailLevel(std::string_view text) {
  if (text == "aggregate_only") return DetailLevel::kAggregateOnly;
  if (text == "own_outcomes") return DetailLevel::kOwnOutcomes;
  throw Error(ErrorCode::kInvalidSpec, "unknown detail level '" + std::string(text) + "'");
}

std::vector<std::string> ValidateCurationSpec(const CurationSpec& spec) {
  std::vector<std::string> problems;
  if (spec.order == HistoryOrder::kShuffled && !spec.shuffle_seed) {
    problems.push_back("shuffled order requires a shuffle seed");
  }
  if (spec.last_k && *spec.last_k < 1) {
    problems.push_back("last_k must be >= 1");
  }
  if (spec.price_range && spec.price_range->first > spec.price_range->second) {
    problems.push_back("price_range low exceeds high");
  }
  return problems;
}

CuratedView Curate(const History& history, const CurationSpec& spec, int agent_id) {
  if (auto problems = ValidateCurationSpec(spec); !problems.empty()) {
    throw Error(ErrorCode::kInvalidSpec, "invalid curation spec: " + problems.front());
  }
  std::vector<const RoundRecord*> selected;
  for (const auto& record : history.records()) {
    if (spec.price_range && (record.price < spec.price_range->first ||
                             record.price > spec.price_range->second)) {
      continue;
    }
    selected.push_back(&record);
  }
  if (spec.last_k && selected.size() > static_cast<std::size_t>(*spec.last_k)) {
    selected.erase(selected.begin(), selected.end() - *spec.last_k);
  }
  switch (spec.order) {
    case HistoryOrder::kChronological:
      break;
    case HistoryOrder::kReversed:
      std::reverse(selected.begin(), selected.end());
      break;
    case HistoryOrder::kShuffled:
      selected = SeededShuffle(selected, *spec.shuffle_seed);
      break;
  }

  CuratedView view;
  view.spec = spec;
  view.items.reserve(selected.size());
  for (const RoundRecord* record : selected) {
    CuratedItem item;
    item.round_index = record->round_index;
    item.price = record->price;
    item.realized_n = record->realized_n;
    if (spec.detail == DetailLevel::kOwnOutcomes && agent_id >= 0 &&
        static_cast<std::size_t>(agent_id) < record->moves.size()) {
      const AgentMove& own = record->moves[agent_id];
      item.own_decision = own.decision;
      item.own_payoff = record->payoffs[agent_id];
      if (spec.include_expectation) item.own_expectation = own.expected_n;
    }
    view.items.push_back(item);
  }
  return view;
}

std::string Render(const CuratedView& view, const GameConfig& /*config*/) {
  if (view.items.empty()) return std::string(kNoHistoryLine);
  std::string out;
  for (const auto& item : view.items) {
    if (!out.empty()) out += '\n';
    out += "Round " + std::to_string(item.round_index) +
           ": price=" + FormatFixed2(item.price) +
           ", total_attendance=" + std::to_string(item.realized_n);
    if (item.own_decision && item.own_payoff) {
      out += ", your_decision=" + std::string(DecisionName(*item.own_decision)) +
             ", your_payoff=" + FormatFixed2(*item.own_payoff);
    }
    if (item.own_expectation) {
      out += ", your_expectation=" + std::to_string(*item.own_expectation);
    }
  }
  return out;
}

}  // namespace herdsim

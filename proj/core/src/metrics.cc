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

#include "herdsim/metrics.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "herdsim/error.h"
#include "herdsim/numfmt.h"
#include "json.hpp"

namespace herdsim {

using nlohmann::json;

namespace {

double MedianOfSorted(std::span<const double> sorted) {
  const std::size_t n = sorted.size();
  return n % 2 == 1 ? sorted[n / 2] : (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;
}

double Mean(std::span<const double> values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

}  // namespace

BoxStats ComputeBoxStats(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::kEmptyInput, "box stats of an empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  BoxStats box;
  box.count = static_cast<int>(n);
  box.min = sorted.front();
  box.max = sorted.back();
  box.median = MedianOfSorted(sorted);
  if (n == 1) {
    box.q1 = box.q3 = box.median;
    return box;
  }
  const std::size_t half = n / 2;
  std::span<const double> all(sorted);
  box.q1 = MedianOfSorted(all.first(half));
  box.q3 = MedianOfSorted(all.last(half));
  return box;
}

std::optional<int> ConvergenceRound(std::span<const double> series, double target, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorCode::kInvalidSpec, "convergence eps must be positive");
  std::optional<int> start;
  for (std::size_t t = series.size(); t > 0; --t) {
    const double d = series[t - 1] - target;
    if (!(d <= eps && -d <= eps)) break;
    start = static_cast<int>(t);
  }
  return start;
}

double OptimismBias(std::span<const double> expectations, int fee_selected) {
  if (expectations.empty()) {
    throw Error(ErrorCode::kEmptyInput, "optimism bias of an empty sample");
  }
  return Mean(expectations) - fee_selected;
}

namespace {

json GameJson(const GameConfig& game) {
  return {{"n", game.n}, {"beta", game.beta}, {"thetas", game.thetas},
          {"price_floor", game.price_floor}};
}

GameConfig GameFromJson(const json& j) {
  GameConfig game;
  game.n = j.at("n").get<int>();
  game.beta = j.at("beta").get<double>();
  game.thetas = j.at("thetas").get<std::vector<double>>();
  game.price_floor = j.value("price_floor", 0.0);
  return game;
}

json PlanJson(const RunPlan& plan) {
  json agents = json::array();
  for (const auto& a : plan.agents) {
    json spec = {{"kind", PolicyKindName(a.kind)},
                 {"prior_n", a.prior_n ? json(*a.prior_n) : json(nullptr)},
                 {"selection", SelectionPolicyName(a.selection)}};
    if (a.llm_params) {
      spec["llm"] = {{"endpoint", a.llm_params->endpoint},
                     {"model", a.llm_params->model_name},
                     {"temperature", a.llm_params->temperature},
                     {"max_retries", a.llm_params->max_retries},
                     {"timeout_ms", a.llm_params->timeout.count()}};
    }
    agents.push_back(std::move(spec));
  }
  json trajectories = json::array();
  for (const auto& t : plan.trajectories) {
    trajectories.push_back({{"kind", TrajectoryKindName(t.kind)},
                            {"label", t.label},
                            {"prices", t.prices},
                            {"seed", t.seed}});
  }
  const CurationSpec& c = plan.curation;
  json curation = {{"order", HistoryOrderName(c.order)},
                   {"seed", c.shuffle_seed ? json(*c.shuffle_seed) : json(nullptr)},
                   {"last_k", c.last_k ? json(*c.last_k) : json(nullptr)},
                   {"price_range", c.price_range ? json::array({c.price_range->first,
                                                                c.price_range->second})
                                                 : json(nullptr)},
                   {"detail", DetailLevelName(c.detail)},
                   {"include_expectation", c.include_expectation}};
  return {{"game", GameJson(plan.game)},
          {"agents", agents},
          {"mode", RunModeName(plan.mode)},
          {"trajectories", trajectories},
          {"replications", plan.replications},
          {"rounds_per_step", plan.rounds_per_step},
          {"curation", curation},
          {"selection", SelectionPolicyName(plan.selection)},
          {"master_seed", plan.master_seed},
          {"know_all_thetas", plan.know_all_thetas}};
}

}  // namespace

std::string PlanSnapshotJson(const RunPlan& plan) { return PlanJson(plan).dump(); }

std::string PlanHash(const RunPlan& plan) { return Fnv1aHex(PlanSnapshotJson(plan)); }

std::vector<TranscriptRound> FlattenRunLog(const RunLog& log) {
  const std::string hash = PlanHash(log.plan);
  std::vector<TranscriptRound> rounds;
  for (std::size_t t = 0; t < log.trajectories.size(); ++t) {
    const TrajectoryLog& tl = log.trajectories[t];
    for (std::size_t r = 0; r < tl.replications.size(); ++r) {
      const ReplicationLog& rep = tl.replications[r];
      const auto& records = rep.history.records();
      for (std::size_t i = 0; i < records.size(); ++i) {
        TranscriptRound round;
        round.plan_hash = hash;
        round.mode = log.plan.mode;
        round.selection = log.plan.selection;
        round.game = log.plan.game;
        round.trajectory_index = static_cast<int>(t);
        round.trajectory = tl.trajectory.label;
        round.trajectory_kind = tl.trajectory.kind;
        round.replication = static_cast<int>(r);
        round.step = rep.step_of_round.at(i);
        round.record = records[i];
        rounds.push_back(std::move(round));
      }
    }
  }
  return rounds;
}

std::string TranscriptLine(const TranscriptRound& round) {
  const RoundRecord& rec = round.record;
  json moves = json::array();
  int fallbacks = 0;
  int inconsistent = 0;
  for (std::size_t j = 0; j < rec.moves.size(); ++j) {
    const AgentMove& m = rec.moves[j];
    const double theta = round.game.thetas.at(j);
    const bool consistent =
        m.decision == Decide(theta, round.game.beta, m.expected_n, rec.price);
    if (m.IsFallback()) ++fallbacks;
    if (!consistent) ++inconsistent;
    moves.push_back({{"agent", j},
                     {"theta", theta},
                     {"expected_n", m.expected_n},
                     {"decision", DecisionName(m.decision)},
                     {"rationale", m.rationale},
                     {"status", MoveStatusName(m.status)},
                     {"error", m.error},
                     {"consistent", consistent}});
  }
  json line = {{"schema_version", kTranscriptSchema},
               {"plan_hash", round.plan_hash},
               {"mode", RunModeName(round.mode)},
               {"selection", SelectionPolicyName(round.selection)},
               {"game", GameJson(round.game)},
               {"trajectory_index", round.trajectory_index},
               {"trajectory", round.trajectory},
               {"trajectory_kind", TrajectoryKindName(round.trajectory_kind)},
               {"replication", round.replication + 1},
               {"step", round.step + 1},
               {"round", rec.round_index},
               {"price", rec.price},
               {"moves", moves},
               {"realized_n", rec.realized_n},
               {"payoffs", rec.payoffs},
               {"flags", {{"fallback_moves", fallbacks}, {"inconsistent_moves", inconsistent}}}};
  return line.dump();
}

TranscriptRound ParseTranscriptLine(std::string_view line) {
  try {
    json j = json::parse(line);
    if (j.at("schema_version").get<std::string>() != kTranscriptSchema) {
      throw Error(ErrorCode::kMalformedTranscript, "unsupported schema version");
    }
    TranscriptRound round;
    round.plan_hash = j.at("plan_hash").get<std::string>();
    round.mode = ParseRunMode(j.at("mode").get<std::string>());
    round.selection = ParseSelectionPolicy(j.at("selection").get<std::string>());
    round.game = GameFromJson(j.at("game"));
    round.trajectory_index = j.at("trajectory_index").get<int>();
    round.trajectory = j.at("trajectory").get<std::string>();
    round.trajectory_kind = ParseTrajectoryKind(j.at("trajectory_kind").get<std::string>());
    round.replication = j.at("replication").get<int>() - 1;
    round.step = j.at("step").get<int>() - 1;
    RoundRecord& rec = round.record;
    rec.round_index = j.at("round").get<int>();
    rec.price = j.at("price").get<double>();
    rec.realized_n = j.at("realized_n").get<int>();
    rec.payoffs = j.at("payoffs").get<std::vector<double>>();
    for (const auto& m : j.at("moves")) {
      AgentMove move;
      move.expected_n = m.at("expected_n").get<int>();
      move.decision = ParseDecision(m.at("decision").get<std::string>());
      move.rationale = m.at("rationale").get<std::string>();
      move.status = ParseMoveStatus(m.at("status").get<std::string>());
      move.error = m.at("error").get<std::string>();
      rec.moves.push_back(std::move(move));
    }
    if (static_cast<int>(rec.moves.size()) != round.game.n ||
        static_cast<int>(rec.payoffs.size()) != round.game.n) {
      throw Error(ErrorCode::kMalformedTranscript, "move count does not match n");
    }
    return round;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedTranscript, e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kMalformedTranscript) throw;
    throw Error(ErrorCode::kMalformedTranscript, e.what());
  }
}

std::vector<TranscriptRound> ReadTranscript(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open transcript " + path.string());
  std::vector<TranscriptRound> rounds;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      rounds.push_back(ParseTranscriptLine(line));
    } catch (const Error& e) {
      throw Error(ErrorCode::kMalformedTranscript,
                  path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return rounds;
}

std::vector<StepSummary> Summarize(const std::vector<TranscriptRound>& rounds) {
  struct Acc {
    const TranscriptRound* first = nullptr;
    std::vector<double> expectations;
    double realized_sum = 0.0;
    int round_count = 0;
    int fallbacks = 0;
  };
  std::map<std::pair<int, int>, Acc> groups;
  for (const auto& round : rounds) {
    Acc& acc = groups[{round.trajectory_index, round.step}];
    if (acc.first == nullptr) acc.first = &round;
    for (const auto& m : round.record.moves) {
      acc.expectations.push_back(m.expected_n);
      if (m.IsFallback()) ++acc.fallbacks;
    }
    acc.realized_sum += round.record.realized_n;
    ++acc.round_count;
  }
  std::vector<StepSummary> rows;
  for (auto& [key, acc] : groups) {
    const TranscriptRound& r = *acc.first;
    StepSummary row;
    row.beta = r.game.beta;
    row.trajectory = r.trajectory;
    row.step = r.step;
    row.price = r.record.price;
    EquilibriumSet eq = SolveFee(r.game, row.price);
    row.fee_set = eq.Levels();
    row.fee_selected = SelectEquilibrium(eq, r.selection, r.game);
    row.expectations = ComputeBoxStats(acc.expectations);
    row.mean_expected = Mean(acc.expectations);
    row.mean_realized_n = acc.realized_sum / acc.round_count;
    row.optimism_bias = OptimismBias(acc.expectations, row.fee_selected);
    row.parse_failures = acc.fallbacks;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string SummaryCsv(const std::vector<StepSummary>& rows) {
  std::string out(kSummaryHeader);
  out += '\n';
  for (const auto& r : rows) {
    std::string fee_set;
    for (std::size_t i = 0; i < r.fee_set.size(); ++i) {
      if (i > 0) fee_set += ';';
      fee_set += std::to_string(r.fee_set[i]);
    }
    out += FormatReal(r.beta) + ',' + r.trajectory + ',' + std::to_string(r.step + 1) + ',' +
           FormatReal(r.price) + ',' + fee_set + ',' + std::to_string(r.fee_selected) + ',' +
           FormatReal(r.expectations.min) + ',' + FormatReal(r.expectations.q1) + ',' +
           FormatReal(r.expectations.median) + ',' + FormatReal(r.expectations.q3) + ',' +
           FormatReal(r.expectations.max) + ',' + FormatReal(r.mean_expected) + ',' +
           FormatReal(r.mean_realized_n) + ',' + FormatReal(r.optimism_bias) + ',' +
           std::to_string(r.parse_failures) + '\n';
  }
  return out;
}

std::string ExpectationsCsv(const std::vector<TranscriptRound>& rounds) {
  std::string out =
      "beta,trajectory,step,price,replication,round,agent,theta,expected_n,decision,status\n";
  for (const auto& round : rounds) {
    const RoundRecord& rec = round.record;
    for (std::size_t j = 0; j < rec.moves.size(); ++j) {
      const AgentMove& m = rec.moves[j];
      out += FormatReal(round.game.beta) + ',' + round.trajectory + ',' +
             std::to_string(round.step + 1) + ',' + FormatReal(rec.price) + ',' +
             std::to_string(round.replication + 1) + ',' + std::to_string(rec.round_index) +
             ',' + std::to_string(j) + ',' + FormatReal(round.game.thetas.at(j)) + ',' +
             std::to_string(m.expected_n) + ',' + std::string(DecisionName(m.decision)) + ',' +
             std::string(MoveStatusName(m.status)) + '\n';
    }
  }
  return out;
}

std::string ConvergenceCsv(const std::vector<StepSummary>& rows, double eps) {
  std::string out = "beta,trajectory,eps,convergence_step\n";
  std::size_t i = 0;
  while (i < rows.size()) {
    std::size_t end = i;
    std::vector<double> gaps;
    while (end < rows.size() && rows[end].trajectory == rows[i].trajectory) {
      gaps.push_back(rows[end].mean_expected - rows[end].fee_selected);
      ++end;
    }
    auto t = ConvergenceRound(gaps, 0.0, eps);
    out += FormatReal(rows[i].beta) + ',' + rows[i].trajectory + ',' + FormatReal(eps) + ',' +
           (t ? std::to_string(*t) : std::string()) + '\n';
    i = end;
  }
  return out;
}

namespace {

void WriteFile(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << contents;
  if (!out) throw Error(ErrorCode::kIoError, "short write to " + path.string());
}

}  // namespace

ExportPaths Export(const RunLog& log, const std::filesystem::path& out_dir,
                   const RequestLog* requests) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + out_dir.string() + ": " + ec.message());

  const auto rounds = FlattenRunLog(log);
  const auto rows = Summarize(rounds);
  ExportPaths paths{out_dir / "transcript.jsonl", out_dir / "summary.csv",
                    out_dir / "expectations.csv", out_dir / "convergence.csv",
                    out_dir / "run.json", std::nullopt};

  std::string transcript;
  for (const auto& r : rounds) transcript += TranscriptLine(r) + '\n';
  WriteFile(paths.transcript, transcript);
  WriteFile(paths.summary, SummaryCsv(rows));
  WriteFile(paths.expectations, ExpectationsCsv(rounds));
  WriteFile(paths.convergence, ConvergenceCsv(rows, kDefaultConvergenceEps));

  json meta = {{"plan", PlanJson(log.plan)},
               {"plan_hash", PlanHash(log.plan)},
               {"transcript_schema", kTranscriptSchema},
               {"template_version", log.metadata.template_version},
               {"shuffle_algorithm", log.metadata.shuffle_algorithm},
               {"seed_derivation", log.metadata.seed_derivation},
               {"quartiles", "tukey_hinges"},
               {"convergence", {{"criterion", "suffix_band"}, {"eps", kDefaultConvergenceEps}}},
               {"models", log.metadata.models},
               {"started_at", log.metadata.started_at},
               {"finished_at", log.metadata.finished_at}};
  WriteFile(paths.metadata, meta.dump(2) + '\n');

  if (requests != nullptr) {
    paths.requests = out_dir / "requests.jsonl";
    std::string lines;
    for (const auto& l : requests->Lines()) lines += l + '\n';
    WriteFile(*paths.requests, lines);
  }
  return paths;
}

}  // namespace herdsim

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

#ifndef HERDSIM_METRICS_H_
#define HERDSIM_METRICS_H_

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "herdsim/llm_client.h"
#include "herdsim/orchestrator.h"

namespace herdsim {

struct BoxStats {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  int count = 0;
};

// Five-number summary with Tukey hinges: q1/q3 are medians of the lower and
// upper halves, the overall median excluded when the count is odd (a single
// value is its own hinge). Throws Error(kEmptyInput).
BoxStats ComputeBoxStats(std::span<const double> values);

// Smallest 1-based t such that every element from t on lies within eps of
// target; nullopt when even the last element is outside the band.
std::optional<int> ConvergenceRound(std::span<const double> series, double target, double eps);

inline constexpr double kDefaultConvergenceEps = 0.5;

// mean(expectations) - fee_selected. Throws Error(kEmptyInput).
double OptimismBias(std::span<const double> expectations, int fee_selected);

// One (replication, round) of a run, flattened for export and re-ingest.
struct TranscriptRound {
  std::string plan_hash;
  RunMode mode = RunMode::kRepeated;
  SelectionPolicy selection = SelectionPolicy::kIterateFromZero;
  GameConfig game;
  int trajectory_index = 0;
  std::string trajectory;
  TrajectoryKind trajectory_kind = TrajectoryKind::kAscending;
  int replication = 0;
  int step = 0;  // 0-based
  RoundRecord record;

  bool operator==(const TranscriptRound&) const = default;
};

inline constexpr std::string_view kTranscriptSchema = "v1";

// Canonical JSON of the plan and its FNV-1a digest.
std::string PlanSnapshotJson(const RunPlan& plan);
std::string PlanHash(const RunPlan& plan);

std::vector<TranscriptRound> FlattenRunLog(const RunLog& log);
std::string TranscriptLine(const TranscriptRound& round);
// Throws Error(kMalformedTranscript).
TranscriptRound ParseTranscriptLine(std::string_view line);
// Throws Error(kIoError) or Error(kMalformedTranscript) naming the first bad
// line number.
std::vector<TranscriptRound> ReadTranscript(const std::filesystem::path& path);

struct StepSummary {
  double beta = 0.0;
  std::string trajectory;
  int step = 0;  // 0-based; written 1-based
  double price = 0.0;
  std::vector<int> fee_set;
  int fee_selected = 0;
  BoxStats expectations;
  double mean_expected = 0.0;
  double mean_realized_n = 0.0;
  double optimism_bias = 0.0;
  // Fallback moves (parse failures, timeouts, transport errors).
  int parse_failures = 0;
};

// One row per (trajectory, step), in transcript order.
std::vector<StepSummary> Summarize(const std::vector<TranscriptRound>& rounds);

inline constexpr std::string_view kSummaryHeader =
    "beta,trajectory,step,price,fee_set,fee_selected,exp_min,exp_q1,exp_median,exp_q3,"
    "exp_max,mean_expected,mean_realized_n,optimism_bias,parse_failures";

std::string SummaryCsv(const std::vector<StepSummary>& rows);
// Long format, one row per individual expectation.
std::string ExpectationsCsv(const std::vector<TranscriptRound>& rounds);
// Per trajectory: first step from which mean_expected stays within eps of
// fee_selected.
std::string ConvergenceCsv(const std::vector<StepSummary>& rows, double eps);

struct ExportPaths {
  std::filesystem::path transcript;
  std::filesystem::path summary;
  std::filesystem::path expectations;
  std::filesystem::path convergence;
  std::filesystem::path metadata;
  std::optional<std::filesystem::path> requests;
};

// Writes transcript.jsonl, summary.csv, expectations.csv, convergence.csv
// and run.json (plus requests.jsonl when a request log is given). All but
// run.json are byte-identical across re-exports. Throws Error(kIoError).
ExportPaths Export(const RunLog& log, const std::filesystem::path& out_dir,
                   const RequestLog* requests = nullptr);

}  // namespace herdsim

#endif  // HERDSIM_METRICS_H_

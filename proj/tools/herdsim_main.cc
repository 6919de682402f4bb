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

// herdsim: equilibria, price schedules, experiment runs and the session
// server from the command line.
//
// Exit codes: 0 success, 1 runtime error, 2 domain signal (no equilibrium,
// bad schedule override), 3 configuration error.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "herdsim/agents.h"
#include "herdsim/equilibrium.h"
#include "herdsim/error.h"
#include "herdsim/experiment_config.h"
#include "herdsim/llm_client.h"
#include "herdsim/metrics.h"
#include "herdsim/numfmt.h"
#include "herdsim/orchestrator.h"
#include "herdsim/service.h"

namespace {

using namespace herdsim;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitDomain = 2;
constexpr int kExitConfig = 3;

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidConfig:
    case ErrorCode::kInvalidSpec:
    case ErrorCode::kInvalidPlan:
      return kExitConfig;
    case ErrorCode::kNoEquilibrium:
    case ErrorCode::kOverrideOutOfInterval:
    case ErrorCode::kEmptyInterval:
      return kExitDomain;
    default:
      return kExitRuntime;
  }
}

GameConfig GameFromFlags(double beta, const std::vector<double>& thetas) {
  GameConfig game = GameConfig::Default(beta);
  if (!thetas.empty()) {
    game.thetas = thetas;
    game.n = static_cast<int>(thetas.size());
  }
  RequireValidConfig(game);
  return game;
}

std::string JoinLevels(const std::vector<int>& levels) {
  std::string out = "[";
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (i > 0) out += ",";
    out += std::to_string(levels[i]);
  }
  return out + "]";
}

std::shared_ptr<ChatCompleter> MakeCompleter(const std::string& mock_path,
                                             std::shared_ptr<RequestLog> log) {
  if (!mock_path.empty()) {
    return std::make_shared<ScriptedCompleter>(ScriptedCompleter::LoadScript(mock_path),
                                               std::move(log));
  }
  return std::make_shared<HttpChatClient>(std::move(log));
}

int CmdSolve(double beta, double price, const std::vector<double>& thetas,
             const std::string& selection_name) {
  GameConfig game = GameFromFlags(beta, thetas);
  SelectionPolicy selection = ParseSelectionPolicy(selection_name);
  EquilibriumSet eq = SolveFee(game, price);
  std::cout << "price: " << FormatReal(price) << "\n";
  std::cout << "fixed points: " << JoinLevels(eq.Levels()) << "\n";
  for (const auto& fp : eq.fixed_points) {
    std::cout << "  N*=" << fp.n_star << " " << StabilityName(fp.stability) << "\n";
  }
  int selected = SelectEquilibrium(eq, selection, game);
  std::cout << "selected (" << SelectionPolicyName(selection) << "): " << selected << "\n";
  return kExitOk;
}

int CmdSchedule(double beta, const std::vector<double>& thetas, std::string strategy_name,
                const std::vector<std::string>& override_flags) {
  GameConfig game = GameFromFlags(beta, thetas);
  std::map<int, double> overrides;
  for (const auto& flag : override_flags) {
    auto eq = flag.find('=');
    auto price = eq == std::string::npos ? std::nullopt : ParseReal(flag.substr(eq + 1));
    if (!price) throw Error(ErrorCode::kInvalidSpec, "override must look like k=price: " + flag);
    overrides[std::stoi(flag.substr(0, eq))] = *price;
  }
  if (strategy_name.empty()) strategy_name = overrides.empty() ? "midpoint" : "explicit";
  PriceSchedule schedule =
      BuildPriceSchedule(game, ParseScheduleStrategy(strategy_name), overrides);
  std::cout << "k,interval_low,interval_high,chosen_price,fee_set\n";
  for (const auto& e : schedule.entries) {
    std::string fee_set;
    for (std::size_t i = 0; i < e.fee_set_at_price.size(); ++i) {
      if (i > 0) fee_set += ";";
      fee_set += std::to_string(e.fee_set_at_price[i]);
    }
    std::cout << e.target_k << "," << FormatReal(e.interval_low) << ","
              << FormatReal(e.interval_high) << "," << FormatReal(e.chosen_price) << ","
              << fee_set << "\n";
  }
  for (const auto& e : schedule.entries) {
    if (e.fee_set_at_price.size() > 1) {
      std::cerr << "warning: target " << e.target_k << " at price " << FormatReal(e.chosen_price)
                << " has multiple equilibria " << JoinLevels(e.fee_set_at_price) << "\n";
    }
  }
  return kExitOk;
}

int CmdRun(const std::string& config_path, const std::string& mock_path,
           const std::string& out_dir) {
  ExperimentConfig config = LoadExperimentConfig(config_path);
  RunPlan plan = BuildRunPlan(config);
  auto requests = std::make_shared<RequestLog>();
  RunOptions options;
  options.completer = MakeCompleter(mock_path, requests);
  RunLog log = Run(plan, options);
  const std::string dir = out_dir.empty() ? config.output_dir : out_dir;
  const bool uses_llm = !log.metadata.models.empty();
  ExportPaths paths = Export(log, dir, uses_llm ? requests.get() : nullptr);
  std::cout << paths.summary.string() << "\n";
  return kExitOk;
}

int CmdReport(const std::string& transcript_path, const std::string& out_path) {
  std::string csv = SummaryCsv(Summarize(ReadTranscript(transcript_path)));
  if (out_path.empty()) {
    std::cout << csv;
  } else {
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + out_path);
    out << csv;
  }
  return kExitOk;
}

// Asks the model for a move in a handful of one-shot situations and checks
// that its decision follows the utility rule given its own expectation.
int CmdProbe(const std::string& config_path, const std::string& mock_path) {
  ExperimentConfig config = LoadExperimentConfig(config_path);
  if (!config.model) throw Error(ErrorCode::kInvalidConfig, "probe needs a model section");
  CompletionParams params = *config.model;
  if (const char* key = std::getenv(std::string(kApiKeyEnvVar).c_str())) params.api_key = key;
  auto completer = MakeCompleter(mock_path, nullptr);
  PriceSchedule schedule = BuildPriceSchedule(config.game, ScheduleStrategy::kMidpoint);

  int consistent = 0;
  int answered = 0;
  int probes = 0;
  for (const auto& entry : schedule.entries) {
    for (int seat : {0, config.game.n - 1}) {
      DecisionContext ctx;
      ctx.agent = ProfileFor(config.game, seat);
      ctx.game = config.game;
      ctx.current_price = entry.chosen_price;
      ctx.rendered_history = std::string(kNoHistoryLine);
      ctx.know_all_thetas = config.know_all_thetas;
      ++probes;
      std::cout << "probe theta=" << FormatReal(ctx.agent.theta)
                << " price=" << FormatFixed2(ctx.current_price) << ": ";
      try {
        ParsedMove move = ParseMove(completer->Complete(BuildPrompt(ctx), params), config.game.n);
        ++answered;
        const bool ok = move.decision == Decide(ctx.agent.theta, config.game.beta,
                                                move.expected_n, ctx.current_price);
        if (ok) ++consistent;
        std::cout << "expected=" << move.expected_n << " decision=" << DecisionName(move.decision)
                  << (ok ? " consistent" : " INCONSISTENT") << "\n";
      } catch (const Error& e) {
        std::cout << "FAILED " << ErrorCodeName(e.code()) << ": " << e.what() << "\n";
      }
    }
  }
  std::cout << "answered " << answered << "/" << probes << ", consistent " << consistent << "/"
            << probes << "\n";
  return answered == probes ? kExitOk : kExitRuntime;
}

int CmdServe(const std::string& host, int port, int deadline_ms, const std::string& mock_path) {
  SessionManager::Options options;
  options.round_deadline = std::chrono::milliseconds(deadline_ms);
  options.completer = MakeCompleter(mock_path, nullptr);
  SessionServer server(std::move(options));
  int bound = server.Start(host, port);
  std::cout << "listening on " << host << ":" << bound << std::endl;
  server.Wait();
  return kExitOk;
}

int CmdPlay(const std::string& host, int port, const std::string& session, int seat,
            const std::string& policy_name, int prior_n) {
  PolicySpec spec;
  spec.kind = ParsePolicyKind(policy_name);
  if (prior_n >= 0) spec.prior_n = prior_n;
  SessionClient client(host, port);
  PlayRemoteSeat(client, session, seat, spec, std::chrono::milliseconds(50));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"herdsim: network-effect participation games with scripted and LLM agents"};
  app.require_subcommand(1);

  double beta = 0.25;
  double price = 0.0;
  std::vector<double> thetas;
  std::string selection = "iterate_from_zero";
  auto* solve = app.add_subcommand("solve", "Fulfilled-expectation equilibria at one price");
  solve->add_option("--beta", beta, "Network effect strength")->required();
  solve->add_option("--price", price, "Price")->required();
  solve->add_option("--thetas", thetas, "Standalone values (default 1..6)")->delimiter(',');
  solve->add_option("--selection", selection, "min|max|iterate_from_zero|iterate_from_n");

  std::string strategy;
  std::vector<std::string> overrides;
  auto* schedule = app.add_subcommand("schedule", "Threshold-derived price schedule");
  schedule->add_option("--beta", beta, "Network effect strength")->required();
  schedule->add_option("--thetas", thetas, "Standalone values (default 1..6)")->delimiter(',');
  schedule->add_option("--strategy", strategy, "midpoint|explicit");
  schedule->add_option("--override", overrides, "Explicit price for a target, k=price");

  std::string config_path;
  std::string mock_path;
  std::string out_dir;
  auto* run = app.add_subcommand("run", "Run an experiment config and export results");
  run->add_option("config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--mock", mock_path, "Scripted LLM replies (JSON lines)");
  run->add_option("--out", out_dir, "Output directory (overrides output.dir)");

  std::string transcript_path;
  std::string report_out;
  auto* report = app.add_subcommand("report", "Rebuild the summary table from a transcript");
  report->add_option("transcript", transcript_path, "transcript.jsonl")->required();
  report->add_option("--out", report_out, "Write the CSV here instead of stdout");

  auto* probe = app.add_subcommand("probe", "Check that a model follows the attendance rule");
  probe->add_option("config", config_path, "Experiment config with a model section")->required();
  probe->add_option("--mock", mock_path, "Scripted LLM replies (JSON lines)");

  std::string host = "127.0.0.1";
  int port = 8080;
  int deadline_ms = 60000;
  auto* serve = app.add_subcommand("serve", "Start the session server");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port (0 picks a free one)");
  serve->add_option("--deadline-ms", deadline_ms, "Per-round move deadline");
  serve->add_option("--mock", mock_path, "Scripted LLM replies for in-process llm seats");

  std::string session;
  int seat = 0;
  std::string policy = "myopic";
  int prior_n = -1;
  auto* play = app.add_subcommand("play", "Play one external seat with a built-in policy");
  play->add_option("--host", host, "Server address");
  play->add_option("--port", port, "Server port");
  play->add_option("--session", session, "Session id")->required();
  play->add_option("--seat", seat, "Seat index")->required();
  play->add_option("--policy", policy, "Policy kind");
  play->add_option("--prior-n", prior_n, "Round-1 expectation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*solve) return CmdSolve(beta, price, thetas, selection);
    if (*schedule) return CmdSchedule(beta, thetas, strategy, overrides);
    if (*run) return CmdRun(config_path, mock_path, out_dir);
    if (*report) return CmdReport(transcript_path, report_out);
    if (*probe) return CmdProbe(config_path, mock_path);
    if (*serve) return CmdServe(host, port, deadline_ms, mock_path);
    if (*play) return CmdPlay(host, port, session, seat, policy, prior_n);
  } catch (const Error& e) {
    std::cerr << "herdsim: " << ErrorCodeName(e.code()) << ": " << e.what() << "\n";
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    std::cerr << "herdsim: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitRuntime;
}

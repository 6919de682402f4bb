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

#ifndef HERDSIM_EXPERIMENT_CONFIG_H_
#define HERDSIM_EXPERIMENT_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "herdsim/agents.h"
#include "herdsim/orchestrator.h"

namespace herdsim {

// One entry of experiment.trajectories. A fixed entry with neither target
// nor price expands to the targets 6, 4 and 2 (those <= n).
struct TrajectoryConfig {
  TrajectoryKind kind = TrajectoryKind::kAscending;
  std::optional<int> target;
  std::optional<double> price;
  std::optional<int> rounds;  // fixed only, default 6
  std::optional<std::uint64_t> seed;  // random only, derived when absent

  bool operator==(const TrajectoryConfig&) const = default;
};

// JSON experiment file. Unknown keys are rejected.
struct ExperimentConfig {
  GameConfig game = GameConfig::Default(0.25);
  std::vector<PolicySpec> policies;
  bool know_all_thetas = true;
  std::optional<CompletionParams> model;
  RunMode mode = RunMode::kRepeated;
  std::vector<TrajectoryConfig> trajectories;
  int replications = 10;
  int rounds_per_step = 1;
  std::uint64_t master_seed = 0;
  ScheduleStrategy schedule_strategy = ScheduleStrategy::kMidpoint;
  std::map<int, double> schedule_overrides;
  CurationSpec curation;
  SelectionPolicy selection = SelectionPolicy::kIterateFromZero;
  std::string output_dir = "out";

  bool operator==(const ExperimentConfig&) const = default;
};

inline constexpr int kDefaultFixedRounds = 6;

// Throws Error(kInvalidConfig) with the offending key path.
ExperimentConfig ParseExperimentConfig(std::string_view json_text);
ExperimentConfig LoadExperimentConfig(const std::filesystem::path& path);

// Pretty JSON with every default written out.
std::string ExperimentConfigToJson(const ExperimentConfig& config);

// Expands trajectories against the price schedule. The API key is read from
// HERDSIM_API_KEY. Throws Error(kInvalidConfig).
RunPlan BuildRunPlan(const ExperimentConfig& config);

}  // namespace herdsim

#endif  // HERDSIM_EXPERIMENT_CONFIG_H_

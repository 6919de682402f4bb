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

#include "herdsim/experiment_config.h"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "herdsim/error.h"
#include "herdsim/seeding.h"
#include "json.hpp"

namespace herdsim {

using nlohmann::json;

namespace {

[[noreturn]] void Fail(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::kInvalidConfig, where + ": " + what);
}

void CheckKeys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) Fail(where, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) Fail(where, "unknown key '" + key + "'");
  }
}

template <typename T>
T Get(const json& obj, const std::string& key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    Fail(where + "." + key, e.what());
  }
}

template <typename T>
std::optional<T> GetOpt(const json& obj, const std::string& key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  return Get<T>(obj, key, where);
}

template <typename Fn>
auto Enum(Fn parse, const std::string& text, const std::string& where) {
  try {
    return parse(text);
  } catch (const Error& e) {
    Fail(where, e.what());
  }
}

CompletionParams ParseModel(const json& j, const std::string& where,
                            const std::optional<CompletionParams>& base) {
  CheckKeys(j, {"endpoint", "name", "temperature", "max_retries", "timeout_ms",
                "backoff_ms", "auth_header"},
            where);
  CompletionParams p = base.value_or(CompletionParams{});
  if (auto v = GetOpt<std::string>(j, "endpoint", where)) p.endpoint = *v;
  if (auto v = GetOpt<std::string>(j, "name", where)) p.model_name = *v;
  if (auto v = GetOpt<double>(j, "temperature", where)) p.temperature = *v;
  if (auto v = GetOpt<int>(j, "max_retries", where)) p.max_retries = *v;
  if (auto v = GetOpt<long long>(j, "timeout_ms", where)) p.timeout = std::chrono::milliseconds(*v);
  if (auto v = GetOpt<long long>(j, "backoff_ms", where)) {
    p.initial_backoff = std::chrono::milliseconds(*v);
  }
  if (auto v = GetOpt<std::string>(j, "auth_header", where)) p.auth_header = *v;
  for (const auto& problem : ValidateCompletionParams(p)) Fail(where, problem);
  return p;
}

json ModelJson(const CompletionParams& p) {
  return {{"endpoint", p.endpoint},
          {"name", p.model_name},
          {"temperature", p.temperature},
          {"max_retries", p.max_retries},
          {"timeout_ms", p.timeout.count()},
          {"backoff_ms", p.initial_backoff.count()},
          {"auth_header", p.auth_header}};
}

PolicySpec ParsePolicy(const json& j, const std::string& where,
                       const std::optional<CompletionParams>& model) {
  CheckKeys(j, {"kind", "prior_n", "selection", "llm"}, where);
  PolicySpec spec;
  spec.kind = Enum(ParsePolicyKind, Get<std::string>(j, "kind", where), where + ".kind");
  spec.prior_n = GetOpt<int>(j, "prior_n", where);
  if (auto s = GetOpt<std::string>(j, "selection", where)) {
    spec.selection = Enum(ParseSelectionPolicy, *s, where + ".selection");
  }
  if (spec.kind == PolicyKind::kLlm) {
    if (j.contains("llm")) {
      spec.llm_params = ParseModel(j.at("llm"), where + ".llm", model);
    } else if (model) {
      spec.llm_params = model;
    } else {
      Fail(where, "llm policy needs a model section or an llm object");
    }
  } else if (j.contains("llm")) {
    Fail(where + ".llm", "only llm policies take model parameters");
  }
  return spec;
}

json PolicyJson(const PolicySpec& spec) {
  json j = {{"kind", PolicyKindName(spec.kind)},
            {"selection", SelectionPolicyName(spec.selection)}};
  j["prior_n"] = spec.prior_n ? json(*spec.prior_n) : json(nullptr);
  if (spec.llm_params) j["llm"] = ModelJson(*spec.llm_params);
  return j;
}

TrajectoryConfig ParseTrajectory(const json& j, const std::string& where) {
  CheckKeys(j, {"kind", "target", "price", "rounds", "seed"}, where);
  TrajectoryConfig t;
  t.kind = Enum(ParseTrajectoryKind, Get<std::string>(j, "kind", where), where + ".kind");
  t.target = GetOpt<int>(j, "target", where);
  t.price = GetOpt<double>(j, "price", where);
  t.rounds = GetOpt<int>(j, "rounds", where);
  t.seed = GetOpt<std::uint64_t>(j, "seed", where);
  const bool fixed = t.kind == TrajectoryKind::kFixed;
  if (!fixed && (t.target || t.price || t.rounds)) {
    Fail(where, "target/price/rounds apply to fixed trajectories only");
  }
  if (t.seed && t.kind != TrajectoryKind::kRandom) {
    Fail(where, "seed applies to random trajectories only");
  }
  if (t.target && t.price) Fail(where, "give either target or price, not both");
  if (fixed && !t.rounds) t.rounds = kDefaultFixedRounds;
  if (t.rounds && *t.rounds < 1) Fail(where + ".rounds", "must be >= 1");
  return t;
}

json TrajectoryJson(const TrajectoryConfig& t) {
  json j = {{"kind", TrajectoryKindName(t.kind)}};
  if (t.target) j["target"] = *t.target;
  if (t.price) j["price"] = *t.price;
  if (t.rounds) j["rounds"] = *t.rounds;
  if (t.seed) j["seed"] = *t.seed;
  return j;
}

}  // namespace

ExperimentConfig ParseExperimentConfig(std::string_view json_text) {
  json root = json::parse(json_text, nullptr, false);
  if (root.is_discarded()) Fail("config", "not valid JSON");
  CheckKeys(root, {"game", "agents", "model", "experiment", "schedule", "curation",
                   "selection", "output"},
            "config");
  ExperimentConfig cfg;

  if (root.contains("game")) {
    const json& g = root.at("game");
    CheckKeys(g, {"n", "beta", "thetas", "price_floor"}, "game");
    if (auto v = GetOpt<double>(g, "beta", "game")) cfg.game.beta = *v;
    if (auto v = GetOpt<std::vector<double>>(g, "thetas", "game")) {
      cfg.game.thetas = *v;
      cfg.game.n = static_cast<int>(v->size());
    }
    if (auto v = GetOpt<int>(g, "n", "game")) cfg.game.n = *v;
    if (auto v = GetOpt<double>(g, "price_floor", "game")) cfg.game.price_floor = *v;
  }
  for (const auto& v : ValidateConfig(cfg.game)) Fail("game." + v.field, v.message);

  if (root.contains("model")) cfg.model = ParseModel(root.at("model"), "model", std::nullopt);

  if (root.contains("agents")) {
    const json& a = root.at("agents");
    CheckKeys(a, {"policies", "know_all_thetas"}, "agents");
    if (auto v = GetOpt<bool>(a, "know_all_thetas", "agents")) cfg.know_all_thetas = *v;
    if (a.contains("policies")) {
      const json& list = a.at("policies");
      if (!list.is_array()) Fail("agents.policies", "expected a list");
      for (std::size_t i = 0; i < list.size(); ++i) {
        cfg.policies.push_back(
            ParsePolicy(list[i], "agents.policies[" + std::to_string(i) + "]", cfg.model));
      }
    }
  }
  if (cfg.policies.empty()) cfg.policies.push_back(PolicySpec{});
  if (cfg.policies.size() == 1 && cfg.game.n > 1) {
    cfg.policies.assign(cfg.game.n, cfg.policies.front());
  }
  if (static_cast<int>(cfg.policies.size()) != cfg.game.n) {
    Fail("agents.policies", "expected 1 or " + std::to_string(cfg.game.n) + " entries, got " +
                                std::to_string(cfg.policies.size()));
  }
  for (std::size_t i = 0; i < cfg.policies.size(); ++i) {
    for (const auto& p : ValidatePolicySpec(cfg.policies[i], cfg.game)) {
      Fail("agents.policies[" + std::to_string(i) + "]", p);
    }
  }

  if (root.contains("experiment")) {
    const json& e = root.at("experiment");
    CheckKeys(e, {"mode", "trajectories", "replications", "rounds_per_step", "master_seed"},
              "experiment");
    if (auto v = GetOpt<std::string>(e, "mode", "experiment")) {
      cfg.mode = Enum(ParseRunMode, *v, "experiment.mode");
    }
    if (auto v = GetOpt<int>(e, "replications", "experiment")) cfg.replications = *v;
    if (auto v = GetOpt<int>(e, "rounds_per_step", "experiment")) cfg.rounds_per_step = *v;
    if (auto v = GetOpt<std::uint64_t>(e, "master_seed", "experiment")) cfg.master_seed = *v;
    if (e.contains("trajectories")) {
      const json& list = e.at("trajectories");
      if (!list.is_array()) Fail("experiment.trajectories", "expected a list");
      for (std::size_t i = 0; i < list.size(); ++i) {
        cfg.trajectories.push_back(
            ParseTrajectory(list[i], "experiment.trajectories[" + std::to_string(i) + "]"));
      }
    }
  }
  if (cfg.trajectories.empty()) cfg.trajectories.push_back(TrajectoryConfig{});
  for (std::size_t i = 0; i < cfg.trajectories.size(); ++i) {
    auto& t = cfg.trajectories[i];
    if (t.kind == TrajectoryKind::kRandom && !t.seed) {
      t.seed = DeriveSeed(cfg.master_seed, {kTrajectoryStream, i});
    }
  }
  if (cfg.replications < 1) Fail("experiment.replications", "must be >= 1");
  if (cfg.rounds_per_step < 1) Fail("experiment.rounds_per_step", "must be >= 1");

  if (root.contains("schedule")) {
    const json& s = root.at("schedule");
    CheckKeys(s, {"strategy", "overrides"}, "schedule");
    if (auto v = GetOpt<std::string>(s, "strategy", "schedule")) {
      cfg.schedule_strategy = Enum(ParseScheduleStrategy, *v, "schedule.strategy");
    }
    if (s.contains("overrides")) {
      const json& o = s.at("overrides");
      if (!o.is_object()) Fail("schedule.overrides", "expected an object of target -> price");
      for (const auto& [key, value] : o.items()) {
        int k = 0;
        try {
          std::size_t used = 0;
          k = std::stoi(key, &used);
          if (used != key.size()) throw std::invalid_argument(key);
        } catch (const std::exception&) {
          Fail("schedule.overrides", "target '" + key + "' is not an integer");
        }
        if (!value.is_number()) Fail("schedule.overrides." + key, "price must be a number");
        cfg.schedule_overrides[k] = value.get<double>();
      }
    }
  }

  if (root.contains("curation")) {
    const json& c = root.at("curation");
    CheckKeys(c, {"order", "seed", "last_k", "price_range", "detail", "include_expectation"},
              "curation");
    if (auto v = GetOpt<std::string>(c, "order", "curation")) {
      cfg.curation.order = Enum(ParseHistoryOrder, *v, "curation.order");
    }
    cfg.curation.shuffle_seed = GetOpt<std::uint64_t>(c, "seed", "curation");
    cfg.curation.last_k = GetOpt<int>(c, "last_k", "curation");
    if (auto v = GetOpt<std::vector<double>>(c, "price_range", "curation")) {
      if (v->size() != 2) Fail("curation.price_range", "expected [low, high]");
      cfg.curation.price_range = std::make_pair((*v)[0], (*v)[1]);
    }
    if (auto v = GetOpt<std::string>(c, "detail", "curation")) {
      cfg.curation.detail = Enum(ParseDetailLevel, *v, "curation.detail");
    }
    if (auto v = GetOpt<bool>(c, "include_expectation", "curation")) {
      cfg.curation.include_expectation = *v;
    }
  }
  for (const auto& p : ValidateCurationSpec(cfg.curation)) Fail("curation", p);

  if (root.contains("selection")) {
    const json& s = root.at("selection");
    CheckKeys(s, {"policy"}, "selection");
    if (auto v = GetOpt<std::string>(s, "policy", "selection")) {
      cfg.selection = Enum(ParseSelectionPolicy, *v, "selection.policy");
    }
  }
  if (root.contains("output")) {
    const json& o = root.at("output");
    CheckKeys(o, {"dir"}, "output");
    if (auto v = GetOpt<std::string>(o, "dir", "output")) cfg.output_dir = *v;
  }
  return cfg;
}

ExperimentConfig LoadExperimentConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kInvalidConfig, "cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return ParseExperimentConfig(buf.str());
}

std::string ExperimentConfigToJson(const ExperimentConfig& cfg) {
  json policies = json::array();
  for (const auto& p : cfg.policies) policies.push_back(PolicyJson(p));
  json trajectories = json::array();
  for (const auto& t : cfg.trajectories) trajectories.push_back(TrajectoryJson(t));
  json overrides = json::object();
  for (const auto& [k, price] : cfg.schedule_overrides) overrides[std::to_string(k)] = price;
  const CurationSpec& c = cfg.curation;
  json root = {
      {"game",
       {{"n", cfg.game.n},
        {"beta", cfg.game.beta},
        {"thetas", cfg.game.thetas},
        {"price_floor", cfg.game.price_floor}}},
      {"agents", {{"policies", policies}, {"know_all_thetas", cfg.know_all_thetas}}},
      {"experiment",
       {{"mode", RunModeName(cfg.mode)},
        {"trajectories", trajectories},
        {"replications", cfg.replications},
        {"rounds_per_step", cfg.rounds_per_step},
        {"master_seed", cfg.master_seed}}},
      {"schedule",
       {{"strategy", ScheduleStrategyName(cfg.schedule_strategy)}, {"overrides", overrides}}},
      {"curation",
       {{"order", HistoryOrderName(c.order)},
        {"seed", c.shuffle_seed ? json(*c.shuffle_seed) : json(nullptr)},
        {"last_k", c.last_k ? json(*c.last_k) : json(nullptr)},
        {"price_range", c.price_range
                            ? json::array({c.price_range->first, c.price_range->second})
                            : json(nullptr)},
        {"detail", DetailLevelName(c.detail)},
        {"include_expectation", c.include_expectation}}},
      {"selection", {{"policy", SelectionPolicyName(cfg.selection)}}},
      {"output", {{"dir", cfg.output_dir}}},
  };
  if (cfg.model) root["model"] = ModelJson(*cfg.model);
  return root.dump(2);
}

RunPlan BuildRunPlan(const ExperimentConfig& cfg) {
  RunPlan plan;
  plan.game = cfg.game;
  plan.agents = cfg.policies;
  plan.mode = cfg.mode;
  plan.replications = cfg.replications;
  plan.rounds_per_step = cfg.rounds_per_step;
  plan.curation = cfg.curation;
  plan.selection = cfg.selection;
  plan.master_seed = cfg.master_seed;
  plan.know_all_thetas = cfg.know_all_thetas;

  if (const char* key = std::getenv(std::string(kApiKeyEnvVar).c_str())) {
    for (auto& spec : plan.agents) {
      if (spec.llm_params) spec.llm_params->api_key = key;
    }
  }

  PriceSchedule schedule;
  try {
    schedule = BuildPriceSchedule(cfg.game, cfg.schedule_strategy, cfg.schedule_overrides);
  } catch (const Error& e) {
    Fail("schedule", e.what());
  }

  std::set<std::string> labels;
  auto add = [&](Trajectory t) {
    std::string base = t.label;
    for (int suffix = 2; !labels.insert(t.label).second; ++suffix) {
      t.label = base + "_" + std::to_string(suffix);
    }
    plan.trajectories.push_back(std::move(t));
  };
  try {
    for (const auto& tc : cfg.trajectories) {
      if (tc.kind != TrajectoryKind::kFixed) {
        add(MakeTrajectory(schedule, tc.kind, tc.seed.value_or(0)));
        continue;
      }
      const int rounds = tc.rounds.value_or(kDefaultFixedRounds);
      if (tc.price) {
        add(MakeFixedTrajectory(schedule, *tc.price, rounds));
        continue;
      }
      std::vector<int> targets;
      if (tc.target) {
        targets.push_back(*tc.target);
      } else {
        for (int k : {6, 4, 2}) {
          if (k <= cfg.game.n) targets.push_back(k);
        }
      }
      for (int k : targets) {
        if (k < 1 || k > cfg.game.n) Fail("experiment.trajectories", "fixed target out of range");
        Trajectory t = MakeFixedTrajectory(
            schedule, DefaultFixedPrice(cfg.game, schedule, k, cfg.selection), rounds);
        t.label = "fixed_k" + std::to_string(k);
        add(std::move(t));
      }
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInvalidConfig) throw;
    Fail("experiment.trajectories", e.what());
  }

  if (auto problems = ValidatePlan(plan); !problems.empty()) Fail("plan", problems.front());
  return plan;
}

}  // namespace herdsim

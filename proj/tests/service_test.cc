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

#include "herdsim/service.h"

#include <gtest/gtest.h>

#include <thread>

#include "httplib.h"
#include "herdsim/error.h"
#include "herdsim/experiment_config.h"
#include "herdsim/metrics.h"
#include "json.hpp"
#include "plan_helpers.h"
#include "test_util.h"

namespace herdsim {
namespace {

using testing::ErrorOf;
using testing::Kind;
using testing::MidpointSchedule;
using testing::UniformPlan;

RunPlan ExternalPlan(int external_seats, int rounds = 2) {
  RunPlan plan = UniformPlan(0.25, Kind(PolicyKind::kOptimist),
                             {MakeFixedTrajectory(MidpointSchedule(0.25), 2.24, rounds)}, 1);
  for (int j = 0; j < external_seats; ++j) plan.agents[j] = Kind(PolicyKind::kExternal);
  return plan;
}

AgentMove Attend(int expected = 6) {
  AgentMove m;
  m.expected_n = expected;
  m.decision = Decision::kAttend;
  return m;
}

struct Seats {
  CreatedSession session;
  std::vector<SeatGrant> grants;
};

Seats JoinAll(SessionManager& manager, RunPlan plan) {
  Seats s;
  s.session = manager.Create(std::move(plan));
  for (int seat : s.session.external_seats) s.grants.push_back(manager.Join(s.session.session_id, seat));
  return s;
}

TEST(SessionManagerTest, CreateStartsWaiting) {
  SessionManager manager;
  CreatedSession a = manager.Create(ExternalPlan(6));
  CreatedSession b = manager.Create(ExternalPlan(6));
  EXPECT_NE(a.session_id, b.session_id);
  EXPECT_EQ(manager.Results(a.session_id).state, SessionState::kWaitingForAgents);
  EXPECT_EQ(a.external_seats.size(), 6u);
  EXPECT_EQ(a.total_rounds, 2);
}

TEST(SessionManagerTest, InvalidPlanRejected) {
  SessionManager manager;
  RunPlan plan = ExternalPlan(6);
  plan.replications = 0;
  EXPECT_EQ(ErrorOf([&] { manager.Create(plan); }), ErrorCode::kInvalidPlan);
}

TEST(SessionManagerTest, JoinBindsSeatOnce) {
  SessionManager manager;
  CreatedSession s = manager.Create(ExternalPlan(6));
  SeatGrant g = manager.Join(s.session_id, 0);
  EXPECT_EQ(g.agent_id, 0);
  EXPECT_EQ(g.theta, 1.0);
  EXPECT_EQ(ErrorOf([&] { manager.Join(s.session_id, 0); }), ErrorCode::kSeatTaken);
  EXPECT_EQ(ErrorOf([&] { manager.Join(s.session_id, 6); }), ErrorCode::kOutOfRange);
  EXPECT_EQ(ErrorOf([&] { manager.Join("ffff", 1); }), ErrorCode::kUnknownSession);
}

TEST(SessionManagerTest, InternalSeatsCannotBeJoined) {
  SessionManager manager;
  CreatedSession s = manager.Create(ExternalPlan(2));
  EXPECT_EQ(ErrorOf([&] { manager.Join(s.session_id, 4); }), ErrorCode::kSeatTaken);
}

TEST(SessionManagerTest, JoinOnFinishedSession) {
  SessionManager manager;
  CreatedSession s = manager.Create(ExternalPlan(0));
  EXPECT_EQ(manager.Results(s.session_id).state, SessionState::kFinished);
  EXPECT_EQ(ErrorOf([&] { manager.Join(s.session_id, 0); }), ErrorCode::kSessionFinished);
}

TEST(SessionManagerTest, ContextBeforeAllJoinedIsWrongState) {
  SessionManager manager;
  CreatedSession s = manager.Create(ExternalPlan(2));
  SeatGrant g = manager.Join(s.session_id, 0);
  EXPECT_EQ(ErrorOf([&] { manager.Context(s.session_id, g.token); }), ErrorCode::kWrongState);
}

TEST(SessionManagerTest, RoundLifecycle) {
  SessionManager manager;
  Seats s = JoinAll(manager, ExternalPlan(6));
  const std::string& id = s.session.session_id;
  SeatContext first = manager.Context(id, s.grants[1].token);
  EXPECT_EQ(first.rendered_history, kNoHistoryLine);
  EXPECT_EQ(first.price, 2.24);
  EXPECT_EQ(first.round_index, 1);
  EXPECT_TRUE(first.reset);
  EXPECT_EQ(ErrorOf([&] { manager.Context(id, "bogus"); }), ErrorCode::kUnauthorized);
  EXPECT_EQ(ErrorOf([&] { manager.Submit(id, s.grants[0].token, Attend(9)); }),
            ErrorCode::kOutOfRange);

  MoveAck ack;
  for (int j = 0; j < 6; ++j) {
    ack = manager.Submit(id, s.grants[j].token, Attend());
    EXPECT_EQ(ack.round_advanced, j == 5);
    if (j == 0) {
      EXPECT_EQ(ErrorOf([&] { manager.Submit(id, s.grants[0].token, Attend()); }),
                ErrorCode::kDuplicateMove);
    }
  }
  SeatContext second = manager.Context(id, s.grants[1].token);
  EXPECT_EQ(second.round_index, 2);
  EXPECT_EQ(second.rendered_history.rfind("Round 1: price=2.24, total_attendance=6, ", 0), 0u)
      << second.rendered_history;
  ASSERT_TRUE(second.previous.has_value());
  EXPECT_EQ(second.previous->realized_n, 6);
  EXPECT_FALSE(second.reset);

  for (int j = 0; j < 6; ++j) {
    AgentMove m = Attend(2);
    if (j < 2) m.decision = Decision::kNotAttend;
    manager.Submit(id, s.grants[j].token, m);
  }
  SessionResults r = manager.Results(id);
  EXPECT_EQ(r.state, SessionState::kFinished);
  EXPECT_EQ(r.rounds_completed, 2);
  RunLog log = manager.FinishedLog(id);
  EXPECT_EQ(log.trajectories[0].replications[0].history.records()[1].realized_n, 4);
  EXPECT_EQ(r.transcript.size(), 2u);
  EXPECT_EQ(r.summary_csv, SummaryCsv(Summarize(FlattenRunLog(log))));
}

TEST(SessionManagerTest, DeadlineAppliesTimeoutFallback) {
  auto now = std::make_shared<Clock::time_point>(Clock::now());
  SessionManager::Options options;
  options.round_deadline = std::chrono::milliseconds(1000);
  options.clock = [now] { return *now; };
  SessionManager manager(options);
  Seats s = JoinAll(manager, ExternalPlan(3, 1));
  manager.Submit(s.session.session_id, s.grants[0].token, Attend());
  manager.Tick();
  EXPECT_EQ(manager.Results(s.session.session_id).state, SessionState::kCollectingMoves);
  *now += std::chrono::milliseconds(1001);
  manager.Tick();
  EXPECT_EQ(manager.Results(s.session.session_id).state, SessionState::kFinished);
  const RoundRecord& r =
      manager.FinishedLog(s.session.session_id).trajectories[0].replications[0].history.records()[0];
  EXPECT_EQ(r.moves[0].status, MoveStatus::kOk);
  EXPECT_EQ(r.moves[1].status, MoveStatus::kTimeout);
  EXPECT_EQ(r.moves[2].decision, Decision::kNotAttend);
  EXPECT_EQ(r.moves[3].status, MoveStatus::kOk);
}

class ServerFixture : public ::testing::Test {
 protected:
  void SetUp() override { port_ = server_.Start("127.0.0.1", 0); }
  void TearDown() override { server_.Stop(); }
  SessionServer server_;
  int port_ = 0;
};

TEST_F(ServerFixture, ErrorsCarryCodeAndProtocolHeader) {
  httplib::Client raw("127.0.0.1", port_);
  auto bad = raw.Post("/sessions", R"({"gmae": 1})", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
  EXPECT_EQ(bad->get_header_value("herdsim-proto"), "v1");
  EXPECT_EQ(nlohmann::json::parse(bad->body).at("error_code"), "invalid_plan");

  auto missing = raw.Get("/sessions/abc123/results");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);
  EXPECT_EQ(nlohmann::json::parse(missing->body).at("error_code"), "unknown_session");

  SessionClient client("127.0.0.1", port_);
  CreatedSession s = client.Create(
      R"({"agents": {"policies": [{"kind": "external"}]}, "experiment": {"replications": 1}})");
  EXPECT_EQ(s.external_seats.size(), 6u);
  auto unauth = raw.Get("/sessions/" + s.session_id + "/context");
  ASSERT_TRUE(unauth);
  EXPECT_EQ(unauth->status, 401);
  client.Join(s.session_id, 2);
  EXPECT_EQ(ErrorOf([&] { client.Join(s.session_id, 2); }), ErrorCode::kSeatTaken);
  auto taken = raw.Post("/sessions/" + s.session_id + "/seats/2", "", "application/json");
  EXPECT_EQ(taken->status, 409);
}

TEST_F(ServerFixture, RemoteSeatsMatchInProcessRun) {
  const std::string config = R"({
    "game": {"beta": 0.75},
    "agents": {"policies": [
      {"kind": "external"}, {"kind": "external"}, {"kind": "optimist"},
      {"kind": "fictitious_play"}, {"kind": "external"}, {"kind": "equilibrium_oracle"}]},
    "experiment": {"trajectories": [{"kind": "random"}, {"kind": "fixed", "target": 4}],
                   "replications": 2, "master_seed": 3},
    "curation": {"order": "shuffled", "seed": 8}
  })";
  std::vector<PolicySpec> remote{Kind(PolicyKind::kMyopic, 6), Kind(PolicyKind::kFictitiousPlay),
                                 Kind(PolicyKind::kEquilibriumOracle)};
  SessionClient client("127.0.0.1", port_);
  CreatedSession s = client.Create(config);
  ASSERT_EQ(s.external_seats, (std::vector<int>{0, 1, 4}));
  std::vector<std::thread> players;
  for (int i = 0; i < 3; ++i) {
    players.emplace_back([&, i] {
      SessionClient own("127.0.0.1", port_);
      PlayRemoteSeat(own, s.session_id, s.external_seats[i], remote[i]);
    });
  }
  for (auto& t : players) t.join();
  SessionResults r = client.Results(s.session_id);
  ASSERT_EQ(r.state, SessionState::kFinished);

  ExperimentConfig local = ParseExperimentConfig(config);
  local.policies[0] = remote[0];
  local.policies[1] = remote[1];
  local.policies[4] = remote[2];
  EXPECT_EQ(r.summary_csv, SummaryCsv(Summarize(FlattenRunLog(herdsim::Run(BuildRunPlan(local))))));
}

}  // namespace
}  // namespace herdsim

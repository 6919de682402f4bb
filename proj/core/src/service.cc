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

#include <algorithm>
#include <condition_variable>

#include "herdsim/error.h"
#include "herdsim/experiment_config.h"
#include "herdsim/metrics.h"
#include "httplib.h"
#include "json.hpp"

namespace herdsim {

using nlohmann::json;

std::string_view SessionStateName(SessionState state) {
  switch (state) {
    case SessionState::kWaitingForAgents: return "waiting_for_agents";
    case SessionState::kCollectingMoves: return "collecting_moves";
    case SessionState::kAdvancing: return "advancing";
    case SessionState::kFinished: return "finished";
  }
  return "finished";
}

namespace {

SessionState ParseSessionState(std::string_view text) {
  for (auto s : {SessionState::kWaitingForAgents, SessionState::kCollectingMoves,
                 SessionState::kAdvancing, SessionState::kFinished}) {
    if (SessionStateName(s) == text) return s;
  }
  throw Error(ErrorCode::kServiceError, "unknown session state '" + std::string(text) + "'");
}

}  // namespace

struct SessionManager::Session {
  Session(std::string session_id, RunPlan plan) : id(std::move(session_id)), cursor(std::move(plan)) {}

  std::mutex mu;
  std::string id;
  ExperimentCursor cursor;
  SessionState state = SessionState::kWaitingForAgents;
  std::vector<bool> external;
  std::map<int, std::string> tokens;
  std::vector<std::optional<AgentMove>> pending;
  std::vector<std::unique_ptr<Agent>> agents;
  std::vector<std::optional<OwnOutcome>> previous;
  bool reset = true;
  std::optional<Clock::time_point> deadline;

  int SeatForToken(const std::string& token) const {
    for (const auto& [seat, t] : tokens) {
      if (t == token) return seat;
    }
    throw Error(ErrorCode::kUnauthorized, "unknown or missing bearer token");
  }
};

SessionManager::SessionManager() : SessionManager(Options{}) {}

SessionManager::SessionManager(Options options)
    : options_(std::move(options)), rng_(std::random_device{}()) {}

SessionManager::~SessionManager() = default;

std::string SessionManager::NewToken() {
  std::lock_guard lock(rng_mu_);
  char buf[33];
  std::snprintf(buf, sizeof(buf), "%016llx%016llx", static_cast<unsigned long long>(rng_()),
                static_cast<unsigned long long>(rng_()));
  return buf;
}

std::shared_ptr<SessionManager::Session> SessionManager::Find(const std::string& session_id) {
  std::shared_lock lock(sessions_mu_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) {
    throw Error(ErrorCode::kUnknownSession, "no session '" + session_id + "'");
  }
  return it->second;
}

namespace {

// Caller holds the session lock.
template <typename SessionT, typename Options>
void OpenRound(SessionT& s, const Options& options) {
  while (true) {
    if (s.cursor.finished()) {
      s.state = SessionState::kFinished;
      s.deadline.reset();
      return;
    }
    const GameConfig& game = s.cursor.plan().game;
    if (s.cursor.slot().fresh_agents) {
      s.reset = true;
      for (int j = 0; j < game.n; ++j) {
        s.previous[j].reset();
        if (!s.external[j]) {
          s.agents[j] = MakeAgent(s.cursor.plan().agents[j], game, ProfileFor(game, j),
                                  options.completer);
        }
      }
    } else {
      s.reset = false;
    }
    std::fill(s.pending.begin(), s.pending.end(), std::nullopt);
    for (int j = 0; j < game.n; ++j) {
      if (!s.external[j]) s.pending[j] = ActOrFallback(*s.agents[j], s.cursor.ContextFor(j));
    }
    s.state = SessionState::kCollectingMoves;
    s.deadline = options.clock() + options.round_deadline;
    const bool complete = std::all_of(s.pending.begin(), s.pending.end(),
                                      [](const auto& m) { return m.has_value(); });
    if (!complete) return;

    // Every seat is in-process; resolve straight away.
    s.state = SessionState::kAdvancing;
    std::vector<AgentMove> moves;
    for (auto& m : s.pending) moves.push_back(*m);
    RoundRecord record = s.cursor.Submit(std::move(moves));
    for (int j = 0; j < game.n; ++j) {
      OwnOutcome outcome{record.price, record.realized_n, record.moves[j]};
      if (s.external[j]) s.previous[j] = outcome;
      else s.agents[j]->Observe(outcome);
    }
  }
}

template <typename SessionT, typename Options>
bool ResolveIfComplete(SessionT& s, const Options& options) {
  if (!std::all_of(s.pending.begin(), s.pending.end(),
                   [](const auto& m) { return m.has_value(); })) {
    return false;
  }
  s.state = SessionState::kAdvancing;
  const GameConfig& game = s.cursor.plan().game;
  std::vector<AgentMove> moves;
  for (auto& m : s.pending) moves.push_back(*m);
  RoundRecord record = s.cursor.Submit(std::move(moves));
  for (int j = 0; j < game.n; ++j) {
    OwnOutcome outcome{record.price, record.realized_n, record.moves[j]};
    if (s.external[j]) s.previous[j] = outcome;
    else s.agents[j]->Observe(outcome);
  }
  OpenRound(s, options);
  return true;
}

}  // namespace

CreatedSession SessionManager::Create(RunPlan plan) {
  std::string id = NewToken();
  std::shared_ptr<Session> session;
  try {
    session = std::make_shared<Session>(id, std::move(plan));
  } catch (const Error& e) {
    throw Error(ErrorCode::kInvalidPlan, e.what());
  }
  const int n = session->cursor.plan().game.n;
  session->pending.resize(n);
  session->agents.resize(n);
  session->previous.resize(n);
  CreatedSession created{id, {}, session->cursor.total_rounds()};
  for (int j = 0; j < n; ++j) {
    const bool ext = session->cursor.plan().agents[j].kind == PolicyKind::kExternal;
    session->external.push_back(ext);
    if (ext) created.external_seats.push_back(j);
  }
  if (created.external_seats.empty()) {
    std::lock_guard lock(session->mu);
    OpenRound(*session, options_);
  }
  std::unique_lock lock(sessions_mu_);
  sessions_.emplace(id, std::move(session));
  return created;
}

SeatGrant SessionManager::Join(const std::string& session_id, int seat) {
  auto s = Find(session_id);
  std::lock_guard lock(s->mu);
  if (s->state == SessionState::kFinished) {
    throw Error(ErrorCode::kSessionFinished, "session '" + session_id + "' has finished");
  }
  const GameConfig& game = s->cursor.plan().game;
  if (seat < 0 || seat >= game.n) {
    throw Error(ErrorCode::kOutOfRange, "seat " + std::to_string(seat) + " outside [0, n)");
  }
  if (!s->external[seat] || s->tokens.count(seat)) {
    throw Error(ErrorCode::kSeatTaken, "seat " + std::to_string(seat) + " is taken");
  }
  SeatGrant grant{seat, NewToken(), game.thetas[seat], game, s->cursor.plan().know_all_thetas};
  s->tokens[seat] = grant.token;
  const auto external_count = std::count(s->external.begin(), s->external.end(), true);
  if (static_cast<long>(s->tokens.size()) == external_count) OpenRound(*s, options_);
  return grant;
}

SeatContext SessionManager::Context(const std::string& session_id, const std::string& token) {
  auto s = Find(session_id);
  std::lock_guard lock(s->mu);
  const int seat = s->SeatForToken(token);
  if (s->state == SessionState::kCollectingMoves && s->deadline &&
      options_.clock() >= *s->deadline) {
    for (auto& m : s->pending) {
      if (!m) m = FallbackMove(MoveStatus::kTimeout, "round deadline expired");
    }
    ResolveIfComplete(*s, options_);
  }
  if (s->state != SessionState::kCollectingMoves) {
    throw Error(ErrorCode::kWrongState,
                "session is " + std::string(SessionStateName(s->state)));
  }
  const RoundSlot& slot = s->cursor.slot();
  SeatContext ctx;
  ctx.agent_id = seat;
  ctx.theta = s->cursor.plan().game.thetas[seat];
  ctx.round_serial = s->cursor.rounds_completed();
  ctx.trajectory = slot.trajectory;
  ctx.replication = slot.replication;
  ctx.step = slot.step;
  ctx.round_index = s->cursor.DisclosedRoundIndex();
  ctx.price = slot.price;
  ctx.rendered_history = s->cursor.RenderedHistoryFor(seat);
  ctx.reset = s->reset;
  ctx.previous = s->previous[seat];
  return ctx;
}

MoveAck SessionManager::Submit(const std::string& session_id, const std::string& token,
                               AgentMove move) {
  auto s = Find(session_id);
  std::lock_guard lock(s->mu);
  const int seat = s->SeatForToken(token);
  if (s->state != SessionState::kCollectingMoves) {
    throw Error(ErrorCode::kWrongState,
                "session is " + std::string(SessionStateName(s->state)));
  }
  if (s->pending[seat]) {
    throw Error(ErrorCode::kDuplicateMove,
                "seat " + std::to_string(seat) + " already moved this round");
  }
  const int n = s->cursor.plan().game.n;
  if (move.expected_n < 0 || move.expected_n > n) {
    throw Error(ErrorCode::kOutOfRange, "expected attendance " +
                                            std::to_string(move.expected_n) + " outside [0, " +
                                            std::to_string(n) + "]");
  }
  MoveAck ack;
  ack.round_serial = s->cursor.rounds_completed();
  s->pending[seat] = std::move(move);
  ack.round_advanced = ResolveIfComplete(*s, options_);
  ack.state = s->state;
  return ack;
}

SessionResults SessionManager::Results(const std::string& session_id) {
  auto s = Find(session_id);
  std::lock_guard lock(s->mu);
  SessionResults r;
  r.state = s->state;
  r.rounds_completed = s->cursor.rounds_completed();
  r.total_rounds = s->cursor.total_rounds();
  if (s->state == SessionState::kFinished) {
    auto rounds = FlattenRunLog(s->cursor.log());
    r.summary_csv = SummaryCsv(Summarize(rounds));
    for (const auto& round : rounds) r.transcript.push_back(TranscriptLine(round));
  }
  return r;
}

RunLog SessionManager::FinishedLog(const std::string& session_id) {
  auto s = Find(session_id);
  std::lock_guard lock(s->mu);
  if (s->state != SessionState::kFinished) {
    throw Error(ErrorCode::kWrongState, "session has not finished");
  }
  return s->cursor.log();
}

void SessionManager::Tick() {
  std::vector<std::shared_ptr<Session>> all;
  {
    std::shared_lock lock(sessions_mu_);
    for (auto& [id, s] : sessions_) all.push_back(s);
  }
  const auto now = options_.clock();
  for (auto& s : all) {
    std::lock_guard lock(s->mu);
    if (s->state != SessionState::kCollectingMoves || !s->deadline || now < *s->deadline) {
      continue;
    }
    for (auto& m : s->pending) {
      if (!m) m = FallbackMove(MoveStatus::kTimeout, "round deadline expired");
    }
    ResolveIfComplete(*s, options_);
  }
}

namespace {

int HttpStatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidPlan:
    case ErrorCode::kInvalidConfig:
    case ErrorCode::kInvalidSpec:
      return 400;
    case ErrorCode::kUnauthorized: return 401;
    case ErrorCode::kUnknownSession: return 404;
    case ErrorCode::kSeatTaken:
    case ErrorCode::kWrongState:
    case ErrorCode::kDuplicateMove:
      return 409;
    case ErrorCode::kSessionFinished: return 410;
    case ErrorCode::kOutOfRange: return 422;
    default: return 500;
  }
}

void Reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_header(std::string(kProtoHeader), std::string(kProtoVersion));
  res.set_content(body.dump(), "application/json");
}

void ReplyError(httplib::Response& res, const Error& e) {
  Reply(res, HttpStatusFor(e.code()),
        {{"error_code", ErrorCodeName(e.code())}, {"message", e.what()}});
}

std::string BearerToken(const httplib::Request& req) {
  const std::string header = req.get_header_value("Authorization");
  constexpr std::string_view kPrefix = "Bearer ";
  if (header.compare(0, kPrefix.size(), kPrefix) != 0) return {};
  return header.substr(kPrefix.size());
}

json GameJson(const GameConfig& game, bool all_thetas, int seat) {
  json j = {{"n", game.n}, {"beta", game.beta}};
  if (all_thetas) j["thetas"] = game.thetas;
  else j["thetas"] = json::array({game.thetas[seat]});
  return j;
}

json MoveJson(const AgentMove& m) {
  return {{"expected_attendance", m.expected_n},
          {"decision", DecisionName(m.decision)},
          {"rationale", m.rationale},
          {"status", MoveStatusName(m.status)},
          {"error", m.error}};
}

AgentMove MoveFromJson(const json& j) {
  AgentMove m;
  m.expected_n = j.at("expected_attendance").get<int>();
  m.decision = ParseDecision(j.at("decision").get<std::string>());
  m.rationale = j.value("rationale", "");
  if (j.contains("status")) m.status = ParseMoveStatus(j.at("status").get<std::string>());
  m.error = j.value("error", "");
  return m;
}

template <typename Fn>
void Guarded(httplib::Response& res, Fn fn) {
  try {
    fn();
  } catch (const Error& e) {
    ReplyError(res, e);
  } catch (const json::exception& e) {
    ReplyError(res, Error(ErrorCode::kInvalidSpec, std::string("bad request body: ") + e.what()));
  } catch (const std::exception& e) {
    ReplyError(res, Error(ErrorCode::kServiceError, e.what()));
  }
}

}  // namespace

SessionServer::SessionServer(SessionManager::Options options)
    : manager_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
  Routes();
}

SessionServer::~SessionServer() { Stop(); }

void SessionServer::Routes() {
  server_->Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
    Guarded(res, [&] {
      RunPlan plan;
      try {
        plan = BuildRunPlan(ParseExperimentConfig(req.body));
      } catch (const Error& e) {
        throw Error(ErrorCode::kInvalidPlan, e.what());
      }
      CreatedSession created = manager_.Create(std::move(plan));
      Reply(res, 201,
            {{"session_id", created.session_id},
             {"external_seats", created.external_seats},
             {"total_rounds", created.total_rounds}});
    });
  });
  server_->Post(R"(/sessions/([0-9a-f]+)/seats/(\d+))",
                [this](const httplib::Request& req, httplib::Response& res) {
                  Guarded(res, [&] {
                    SeatGrant g = manager_.Join(req.matches[1], std::stoi(req.matches[2]));
                    Reply(res, 200,
                          {{"agent_id", g.agent_id},
                           {"token", g.token},
                           {"theta", g.theta},
                           {"know_all_thetas", g.know_all_thetas},
                           {"game", GameJson(g.game, g.know_all_thetas, g.agent_id)}});
                  });
                });
  server_->Get(R"(/sessions/([0-9a-f]+)/context)",
               [this](const httplib::Request& req, httplib::Response& res) {
                 Guarded(res, [&] {
                   SeatContext c = manager_.Context(req.matches[1], BearerToken(req));
                   json body = {{"agent_id", c.agent_id},
                                {"theta", c.theta},
                                {"round_serial", c.round_serial},
                                {"trajectory", c.trajectory},
                                {"replication", c.replication},
                                {"step", c.step},
                                {"round_index", c.round_index},
                                {"price", c.price},
                                {"rendered_history", c.rendered_history},
                                {"reset", c.reset},
                                {"previous", nullptr}};
                   if (c.previous) {
                     body["previous"] = {{"price", c.previous->price},
                                         {"realized_n", c.previous->realized_n},
                                         {"move", MoveJson(c.previous->own_move)}};
                   }
                   Reply(res, 200, body);
                 });
               });
  server_->Post(R"(/sessions/([0-9a-f]+)/moves)",
                [this](const httplib::Request& req, httplib::Response& res) {
                  Guarded(res, [&] {
                    const std::string token = BearerToken(req);
                    AgentMove move = MoveFromJson(json::parse(req.body));
                    MoveAck ack = manager_.Submit(req.matches[1], token, std::move(move));
                    Reply(res, 200,
                          {{"accepted", true},
                           {"round_serial", ack.round_serial},
                           {"round_advanced", ack.round_advanced},
                           {"state", SessionStateName(ack.state)}});
                  });
                });
  server_->Get(R"(/sessions/([0-9a-f]+)/results)",
               [this](const httplib::Request& req, httplib::Response& res) {
                 Guarded(res, [&] {
                   SessionResults r = manager_.Results(req.matches[1]);
                   Reply(res, 200,
                         {{"state", SessionStateName(r.state)},
                          {"rounds_completed", r.rounds_completed},
                          {"total_rounds", r.total_rounds},
                          {"summary_csv", r.summary_csv},
                          {"transcript", r.transcript}});
                 });
               });
}

int SessionServer::Start(const std::string& host, int port) {
  int bound = port == 0 ? server_->bind_to_any_port(host) : port;
  if (port != 0 && !server_->bind_to_port(host, port)) bound = -1;
  if (bound < 0) {
    throw Error(ErrorCode::kIoError, "cannot bind " + host + ":" + std::to_string(port));
  }
  listener_ = std::thread([this] { server_->listen_after_bind(); });
  ticker_ = std::thread([this] {
    while (true) {
      {
        std::lock_guard lock(stop_mu_);
        if (stopping_) return;
      }
      manager_.Tick();
      std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
  });
  server_->wait_until_ready();
  return bound;
}

void SessionServer::Wait() {
  if (listener_.joinable()) listener_.join();
}

void SessionServer::Stop() {
  {
    std::lock_guard lock(stop_mu_);
    if (stopping_) return;
    stopping_ = true;
  }
  server_->stop();
  if (listener_.joinable()) listener_.join();
  if (ticker_.joinable()) ticker_.join();
}

SessionClient::SessionClient(std::string host, int port) : host_(std::move(host)), port_(port) {}

namespace {

json Call(const std::string& host, int port, const std::string& method, const std::string& path,
          const std::string& token, const std::string& body) {
  httplib::Client client(host, port);
  client.set_connection_timeout(5, 0);
  client.set_read_timeout(60, 0);
  httplib::Headers headers;
  if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);
  auto result = method == "GET" ? client.Get(path, headers)
                                : client.Post(path, headers, body, "application/json");
  if (!result) {
    throw Error(ErrorCode::kTransportError,
                method + " " + path + " failed: " + httplib::to_string(result.error()));
  }
  json reply = json::parse(result->body, nullptr, false);
  if (result->status < 200 || result->status >= 300) {
    if (!reply.is_discarded() && reply.contains("error_code")) {
      throw Error(ErrorCodeFromName(reply.at("error_code").get<std::string>()),
                  reply.value("message", ""));
    }
    throw Error(ErrorCode::kServiceError, "HTTP " + std::to_string(result->status));
  }
  if (reply.is_discarded()) throw Error(ErrorCode::kServiceError, "non-JSON reply");
  return reply;
}

}  // namespace

CreatedSession SessionClient::Create(const std::string& config_json) {
  json r = Call(host_, port_, "POST", "/sessions", "", config_json);
  return {r.at("session_id").get<std::string>(), r.at("external_seats").get<std::vector<int>>(),
          r.at("total_rounds").get<int>()};
}

SeatGrant SessionClient::Join(const std::string& session_id, int seat) {
  json r = Call(host_, port_, "POST", "/sessions/" + session_id + "/seats/" + std::to_string(seat),
                "", "");
  SeatGrant g;
  g.agent_id = r.at("agent_id").get<int>();
  g.token = r.at("token").get<std::string>();
  g.theta = r.at("theta").get<double>();
  g.know_all_thetas = r.at("know_all_thetas").get<bool>();
  g.game.n = r.at("game").at("n").get<int>();
  g.game.beta = r.at("game").at("beta").get<double>();
  g.game.thetas = r.at("game").at("thetas").get<std::vector<double>>();
  return g;
}

SeatContext SessionClient::Context(const std::string& session_id, const std::string& token) {
  json r = Call(host_, port_, "GET", "/sessions/" + session_id + "/context", token, "");
  SeatContext c;
  c.agent_id = r.at("agent_id").get<int>();
  c.theta = r.at("theta").get<double>();
  c.round_serial = r.at("round_serial").get<int>();
  c.trajectory = r.at("trajectory").get<int>();
  c.replication = r.at("replication").get<int>();
  c.step = r.at("step").get<int>();
  c.round_index = r.at("round_index").get<int>();
  c.price = r.at("price").get<double>();
  c.rendered_history = r.at("rendered_history").get<std::string>();
  c.reset = r.at("reset").get<bool>();
  if (!r.at("previous").is_null()) {
    const json& p = r.at("previous");
    c.previous = OwnOutcome{p.at("price").get<double>(), p.at("realized_n").get<int>(),
                            MoveFromJson(p.at("move"))};
  }
  return c;
}

MoveAck SessionClient::Submit(const std::string& session_id, const std::string& token,
                              const AgentMove& move) {
  json body = {{"expected_attendance", move.expected_n},
               {"decision", DecisionName(move.decision)},
               {"rationale", move.rationale},
               {"status", MoveStatusName(move.status)},
               {"error", move.error}};
  json r = Call(host_, port_, "POST", "/sessions/" + session_id + "/moves", token, body.dump());
  return {r.at("round_serial").get<int>(), r.at("round_advanced").get<bool>(),
          ParseSessionState(r.at("state").get<std::string>())};
}

SessionResults SessionClient::Results(const std::string& session_id) {
  json r = Call(host_, port_, "GET", "/sessions/" + session_id + "/results", "", "");
  SessionResults out;
  out.state = ParseSessionState(r.at("state").get<std::string>());
  out.rounds_completed = r.at("rounds_completed").get<int>();
  out.total_rounds = r.at("total_rounds").get<int>();
  out.summary_csv = r.at("summary_csv").get<std::string>();
  out.transcript = r.at("transcript").get<std::vector<std::string>>();
  return out;
}

void PlayRemoteSeat(SessionClient& client, const std::string& session_id, int seat,
                    const PolicySpec& policy, std::chrono::milliseconds poll,
                    std::shared_ptr<ChatCompleter> completer) {
  SeatGrant grant = client.Join(session_id, seat);
  const AgentProfile profile{grant.agent_id, grant.theta};
  std::unique_ptr<Agent> agent;
  int last_serial = -1;
  while (true) {
    SeatContext ctx;
    try {
      ctx = client.Context(session_id, grant.token);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kWrongState) throw;
      if (client.Results(session_id).state == SessionState::kFinished) return;
      std::this_thread::sleep_for(poll);
      continue;
    }
    if (ctx.round_serial == last_serial) {
      std::this_thread::sleep_for(poll);
      continue;
    }
    if (ctx.reset || !agent) agent = MakeAgent(policy, grant.game, profile, completer);
    if (ctx.previous) agent->Observe(*ctx.previous);

    DecisionContext dc;
    dc.agent = profile;
    dc.game = grant.game;
    dc.current_price = ctx.price;
    dc.rendered_history = ctx.rendered_history;
    dc.round_index = ctx.round_index;
    dc.know_all_thetas = grant.know_all_thetas;
    AgentMove move = ActOrFallback(*agent, dc);
    client.Submit(session_id, grant.token, move);
    last_serial = ctx.round_serial;
  }
}

}  // namespace herdsim

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

#ifndef HERDSIM_SERVICE_H_
#define HERDSIM_SERVICE_H_

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "herdsim/agents.h"
#include "herdsim/orchestrator.h"

namespace httplib {
class Server;
}

namespace herdsim {

inline constexpr std::string_view kProtoHeader = "herdsim-proto";
inline constexpr std::string_view kProtoVersion = "v1";

enum class SessionState { kWaitingForAgents, kCollectingMoves, kAdvancing, kFinished };
std::string_view SessionStateName(SessionState state);

struct SeatGrant {
  int agent_id = 0;
  std::string token;
  double theta = 0.0;
  GameConfig game;
  bool know_all_thetas = true;
};

// What a remote seat sees for the open round.
struct SeatContext {
  int agent_id = 0;
  double theta = 0.0;
  // Rounds resolved so far in the whole session; identifies the open round.
  int round_serial = 0;
  int trajectory = 0;
  int replication = 0;
  int step = 0;
  int round_index = 1;
  double price = 0.0;
  std::string rendered_history;
  // The seat must drop its belief state before acting.
  bool reset = false;
  // Own outcome of the previous round in this replication.
  std::optional<OwnOutcome> previous;
};

struct MoveAck {
  int round_serial = 0;
  bool round_advanced = false;
  SessionState state = SessionState::kCollectingMoves;
};

struct SessionResults {
  SessionState state = SessionState::kWaitingForAgents;
  int rounds_completed = 0;
  int total_rounds = 0;
  // Filled once the session is finished.
  std::string summary_csv;
  std::vector<std::string> transcript;
};

struct CreatedSession {
  std::string session_id;
  std::vector<int> external_seats;
  int total_rounds = 0;
};

using Clock = std::chrono::steady_clock;

// Sessions keyed by id. Each session is mutated under its own lock; seats
// whose policy is not kExternal are played in-process with the same code
// path as Run().
class SessionManager {
 public:
  struct Options {
    std::chrono::milliseconds round_deadline{60000};
    std::function<Clock::time_point()> clock = [] { return Clock::now(); };
    std::shared_ptr<ChatCompleter> completer;
  };

  SessionManager();
  explicit SessionManager(Options options);
  ~SessionManager();

  // Throws Error(kInvalidPlan).
  CreatedSession Create(RunPlan plan);
  // Throws kUnknownSession, kSessionFinished, kSeatTaken, kOutOfRange.
  SeatGrant Join(const std::string& session_id, int seat);
  // Throws kUnknownSession, kUnauthorized, kWrongState.
  SeatContext Context(const std::string& session_id, const std::string& token);
  // Throws kUnknownSession, kUnauthorized, kWrongState, kDuplicateMove,
  // kOutOfRange.
  MoveAck Submit(const std::string& session_id, const std::string& token, AgentMove move);
  SessionResults Results(const std::string& session_id);
  // The finished run; throws kWrongState before then.
  RunLog FinishedLog(const std::string& session_id);

  // Applies the timeout fallback to every session whose deadline passed.
  void Tick();

 private:
  struct Session;
  std::shared_ptr<Session> Find(const std::string& session_id);
  std::string NewToken();

  Options options_;
  std::shared_mutex sessions_mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::mutex rng_mu_;
  std::mt19937_64 rng_;
};

// JSON-over-HTTP front end:
//   POST /sessions                      body: experiment config
//   POST /sessions/{id}/seats/{k}
//   GET  /sessions/{id}/context         Authorization: Bearer <token>
//   POST /sessions/{id}/moves           Authorization: Bearer <token>
//   GET  /sessions/{id}/results
// Errors are {"error_code", "message"}; every response carries
// "herdsim-proto: v1".
class SessionServer {
 public:
  explicit SessionServer(SessionManager::Options options = {});
  ~SessionServer();

  SessionServer(const SessionServer&) = delete;
  SessionServer& operator=(const SessionServer&) = delete;

  // Port 0 picks a free port. Returns the bound port; throws kIoError.
  int Start(const std::string& host, int port);
  // Blocks until Stop().
  void Wait();
  void Stop();

  SessionManager& manager() { return manager_; }

 private:
  void Routes();

  SessionManager manager_;
  std::unique_ptr<httplib::Server> server_;
  std::thread listener_;
  std::thread ticker_;
  std::mutex stop_mu_;
  bool stopping_ = false;
};

// Thin client for the endpoints above. Service errors come back as Error
// with the server's error code.
class SessionClient {
 public:
  SessionClient(std::string host, int port);

  CreatedSession Create(const std::string& config_json);
  SeatGrant Join(const std::string& session_id, int seat);
  SeatContext Context(const std::string& session_id, const std::string& token);
  MoveAck Submit(const std::string& session_id, const std::string& token,
                 const AgentMove& move);
  SessionResults Results(const std::string& session_id);

 private:
  std::string host_;
  int port_;
};

// Joins `seat` and plays it with an in-process policy until the session
// finishes, polling every `poll`.
void PlayRemoteSeat(SessionClient& client, const std::string& session_id, int seat,
                    const PolicySpec& policy,
                    std::chrono::milliseconds poll = std::chrono::milliseconds(2),
                    std::shared_ptr<ChatCompleter> completer = nullptr);

}  // namespace herdsim

#endif  // HERDSIM_SERVICE_H_

#pragma once

#include <chrono>
#include <memory>
#include <string>

#include "ttx/service/exercise_service.hpp"

namespace httplib {
class Server;
}

namespace ttx::service {

// JSON-over-HTTP binding of ExerciseService plus the push channel
// (long-poll and server-sent events). Routes are documented in docs/http-api.md.
class HttpServer {
 public:
  explicit HttpServer(ExerciseService& service);
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds to `port` (0 picks a free port). Returns the bound port or -1.
  int Bind(const std::string& host, int port);
  // Serves until Stop(); blocks the caller.
  bool Listen();
  void Stop();

  // Upper bound for `timeout_ms` on long-poll requests and the SSE heartbeat.
  static constexpr std::chrono::milliseconds kMaxPollWait{25000};

 private:
  void Routes();

  ExerciseService& service_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace ttx::service

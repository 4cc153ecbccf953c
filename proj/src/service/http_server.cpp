#include "ttx/service/http_server.hpp"

#include <httplib.h>

#include <algorithm>

namespace ttx::service {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr const char* kJson = "application/json";

std::string Dump(const ordered_json& value) {
  return value.dump(-1, ' ', false, json::error_handler_t::replace);
}

void SendJson(httplib::Response& res, const ordered_json& body, int status = 200) {
  res.status = status;
  res.set_content(Dump(body), kJson);
}

void SendError(httplib::Response& res, ErrorCode code, const std::string& message) {
  SendJson(res, {{"error", ToString(code)}, {"message", message}}, HttpStatus(code));
}

std::string BearerToken(const httplib::Request& req) {
  const std::string header = req.get_header_value("Authorization");
  constexpr std::string_view kPrefix = "Bearer ";
  if (header.rfind(kPrefix, 0) == 0) return header.substr(kPrefix.size());
  // EventSource cannot set headers.
  return req.get_param_value("token");
}

json Body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json body = json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) {
    throw Error(ErrorCode::kInvalidArgument, "request body must be a JSON object");
  }
  return body;
}

std::string StringField(const json& body, const char* key, bool required = true) {
  const auto it = body.find(key);
  if (it == body.end() || it->is_null()) {
    if (required) throw Error(ErrorCode::kInvalidArgument, std::string("missing field '") + key + "'");
    return {};
  }
  if (!it->is_string()) {
    throw Error(ErrorCode::kInvalidArgument, std::string("field '") + key + "' must be a string");
  }
  return it->get<std::string>();
}

std::uint64_t CursorParam(const httplib::Request& req) {
  std::string text = req.get_param_value("cursor");
  if (text.empty()) text = req.get_header_value("Last-Event-ID");
  if (text.empty()) return 0;
  try {
    std::size_t used = 0;
    const auto value = std::stoull(text, &used);
    if (used == text.size()) return value;
  } catch (const std::exception&) {
  }
  // Unparseable cursors force a resync rather than silently restarting.
  return std::numeric_limits<std::uint64_t>::max();
}

std::chrono::milliseconds WaitParam(const httplib::Request& req) {
  const std::string text = req.get_param_value("timeout_ms");
  if (text.empty()) return std::chrono::milliseconds(0);
  try {
    return std::clamp(std::chrono::milliseconds(std::stoll(text)), std::chrono::milliseconds(0),
                      HttpServer::kMaxPollWait);
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidArgument, "timeout_ms must be an integer");
  }
}

ordered_json PollJson(const PollResult& poll) {
  ordered_json out;
  out["exercise_id"] = poll.exercise_id;
  out["cursor"] = poll.cursor;
  out["resync"] = poll.resync;
  out["events"] = ordered_json::array();
  for (const auto& event : poll.events) {
    out["events"].push_back({{"seq", event.seq},
                             {"team_id", event.team_id},
                             {"effect", ordered_json::parse(event.payload)}});
  }
  return out;
}

// Wraps a handler so library errors become JSON error responses.
template <typename F>
httplib::Server::Handler Guard(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const Error& e) {
      SendError(res, e.code(), e.what());
    } catch (const std::exception& e) {
      SendJson(res, {{"error", "internal"}, {"message", e.what()}}, 500);
    }
  };
}

}  // namespace

HttpServer::HttpServer(ExerciseService& service)
    : service_(service), server_(std::make_unique<httplib::Server>()) {
  Routes();
}

HttpServer::~HttpServer() { Stop(); }

int HttpServer::Bind(const std::string& host, int port) {
  if (port == 0) return server_->bind_to_any_port(host);
  return server_->bind_to_port(host, port) ? port : -1;
}

bool HttpServer::Listen() { return server_->listen_after_bind(); }

void HttpServer::Stop() {
  service_.Shutdown();
  server_->stop();
}

void HttpServer::Routes() {
  httplib::Server& s = *server_;
  ExerciseService& svc = service_;

  s.Post("/api/login", Guard([&svc](const httplib::Request& req, httplib::Response& res) {
    const json body = Body(req);
    SendJson(res, svc.Login(StringField(body, "code"), StringField(body, "name", false)));
  }));

  s.Post("/api/exercise", Guard([&svc](const httplib::Request& req, httplib::Response& res) {
    const json body = Body(req);
    std::vector<TeamAccess> teams;
    const auto it = body.find("teams");
    if (it == body.end() || !it->is_array() || it->empty()) {
      throw Error(ErrorCode::kInvalidArgument, "field 'teams' must be a non-empty array");
    }
    for (const auto& team : *it) {
      if (team.is_string()) {
        teams.push_back({team.get<std::string>(), {}});
      } else if (team.is_object()) {
        teams.push_back({StringField(team, "team_id"), StringField(team, "code", false)});
      } else {
        throw Error(ErrorCode::kInvalidArgument, "team entries must be strings or objects");
      }
    }
    SendJson(res, svc.Deploy(BearerToken(req), StringField(body, "definition"), teams), 201);
  }));

  s.Get("/api/exercise", Guard([&svc](const httplib::Request& req, httplib::Response& res) {
    SendJson(res, svc.ExerciseStatus(BearerToken(req)));
  }));
  s.Post("/api/exercise/start", Guard([&svc](const httplib::Request& req, httplib::Response& res) {
    SendJson(res, svc.StartExercise(BearerToken(req)));
  }));
  s.Post("/api/exercise/end", Guard([&svc](const httplib::Request& req, httplib::Response& res) {
    SendJson(res, svc.EndExercise(BearerToken(req)));
  }));

  s.Get("/api/overview", Guard([&svc](const httplib::Request& req, httplib::Response& res) {
    SendJson(res, svc.Overview(BearerToken(req)));
  }));

  s.Get("/api/teams/:team/view", Guard([&svc](const httplib::Request& req, httplib::Response& res) {
    SendJson(res, svc.TeamView(BearerToken(req), req.path_params.at("team")));
  }));

  s.Post("/api/teams/:team/token/claim", Guard([&svc](const httplib::Request& req, httplib::Response& res) {
    const ordered_json out = svc.ClaimToken(BearerToken(req), req.path_params.at("team"));
    SendJson(res, out, out["granted"].get<bool>() ? 200 : 409);
  }));
  s.Post("/api/teams/:team/token/release", Guard([&svc](const httplib::Request& req, httplib::Response& res) {
    SendJson(res, svc.ReleaseToken(BearerToken(req), req.path_params.at("team")));
  }));

  s.Post("/api/teams/:team/tools/:tool", Guard([&svc](const httplib::Request& req, httplib::Response& res) {
    const json body = Body(req);
    toolkit::Arguments args;
    if (const auto it = body.find("args"); it != body.end()) {
      if (!it->is_object()) throw Error(ErrorCode::kInvalidArgument, "'args' must be an object");
      for (const auto& [name, value] : it->items()) {
        if (!value.is_string()) {
          throw Error(ErrorCode::kInvalidArgument, "argument '" + name + "' must be a string");
        }
        args[name] = value.get<std::string>();
      }
    }
    const ordered_json out = svc.InvokeTool(BearerToken(req), req.path_params.at("team"),
                                            req.path_params.at("tool"), args);
    SendJson(res, out, out["accepted"].get<bool>() ? 200 : 409);
  }));

  s.Post("/api/teams/:team/emails", Guard([&svc](const httplib::Request& req, httplib::Response& res) {
    const json body = Body(req);
    engine::SendEmail email;
    email.thread_id = StringField(body, "thread_id", false);
    email.subject = StringField(body, "subject", false);
    email.body = StringField(body, "body");
    if (const auto it = body.find("to"); it != body.end()) {
      if (it->is_string()) {
        email.to.push_back(it->get<std::string>());
      } else if (it->is_array()) {
        for (const auto& to : *it) {
          if (!to.is_string()) throw Error(ErrorCode::kInvalidArgument, "'to' must hold strings");
          email.to.push_back(to.get<std::string>());
        }
      } else {
        throw Error(ErrorCode::kInvalidArgument, "'to' must be a string or an array");
      }
    }
    const ordered_json out = svc.SendEmail(BearerToken(req), req.path_params.at("team"), email);
    SendJson(res, out, out["accepted"].get<bool>() ? 200 : 409);
  }));

  s.Post("/api/teams/:team/injects", Guard([&svc](const httplib::Request& req, httplib::Response& res) {
    const json body = Body(req);
    SendJson(res, svc.DeliverInject(BearerToken(req), req.path_params.at("team"),
                                    StringField(body, "inject_id")));
  }));

  s.Post("/api/teams/:team/threads/:thread/reply", Guard([&svc](const httplib::Request& req, httplib::Response& res) {
    const json body = Body(req);
    engine::ReplyInThread reply{req.path_params.at("thread"), StringField(body, "body"),
                                StringField(body, "as_actor", false)};
    SendJson(res, svc.ReplyInThread(BearerToken(req), req.path_params.at("team"), reply));
  }));

  s.Get("/api/teams/:team/logs/:category", Guard([&svc](const httplib::Request& req, httplib::Response& res) {
    std::string category = req.path_params.at("category");
    if (category.size() > 6 && category.ends_with(".jsonl")) category.resize(category.size() - 6);
    res.set_content(svc.TeamLogText(BearerToken(req), req.path_params.at("team"), category),
                    "application/x-ndjson");
  }));

  s.Post("/api/logs/export", Guard([&svc](const httplib::Request& req, httplib::Response& res) {
    SendJson(res, svc.ExportLogs(BearerToken(req)));
  }));

  s.Get("/api/report", Guard([&svc](const httplib::Request& req, httplib::Response& res) {
    if (req.get_param_value("format") == "text") {
      res.set_content(svc.ReportText(BearerToken(req)), "text/plain; charset=utf-8");
    } else {
      SendJson(res, svc.Report(BearerToken(req)));
    }
  }));

  s.Get("/api/events", Guard([&svc](const httplib::Request& req, httplib::Response& res) {
    const PollResult poll = svc.Events(BearerToken(req), CursorParam(req),
                                       req.get_param_value("exercise_id"), WaitParam(req));
    SendJson(res, PollJson(poll));
  }));

  s.Get("/api/events/stream", Guard([&svc](const httplib::Request& req, httplib::Response& res) {
    const std::string token = BearerToken(req);
    const std::string exercise_id = req.get_param_value("exercise_id");
    // Authenticate before committing to a streaming response.
    PollResult first = svc.Events(token, CursorParam(req), exercise_id, std::chrono::milliseconds(0));
    auto state = std::make_shared<PollResult>(std::move(first));
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider(
        "text/event-stream", [&svc, token, state](std::size_t, httplib::DataSink& sink) {
          PollResult& poll = *state;
          std::string chunk;
          if (poll.resync) {
            chunk += "event: resync\ndata: " +
                     Dump({{"exercise_id", poll.exercise_id}, {"cursor", poll.cursor}}) + "\n\n";
          }
          for (const auto& event : poll.events) {
            chunk += "id: " + std::to_string(event.seq) + "\nevent: effect\ndata: " +
                     Dump({{"seq", event.seq},
                           {"team_id", event.team_id},
                           {"effect", ordered_json::parse(event.payload)}}) +
                     "\n\n";
          }
          if (chunk.empty()) chunk = ": keep-alive\n\n";
          if (!sink.is_writable() || !sink.write(chunk.data(), chunk.size())) return false;
          if (poll.closed) {
            sink.done();
            return true;
          }
          try {
            poll = svc.Events(token, poll.cursor, poll.exercise_id, HttpServer::kMaxPollWait);
          } catch (const Error&) {
            sink.done();
            return false;
          }
          return true;
        });
  }));
}

}  // namespace ttx::service

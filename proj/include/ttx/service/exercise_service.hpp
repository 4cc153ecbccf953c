#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "ttx/common/error.hpp"
#include "ttx/engine/clock.hpp"
#include "ttx/engine/instance.hpp"
#include "ttx/service/event_hub.hpp"
#include "ttx/service/sessions.hpp"

namespace ttx::service {

struct ServiceConfig {
  std::string instructor_code;               // required to log in as instructor
  std::optional<std::filesystem::path> data_directory;  // live log mirror and exports
};

struct TeamAccess {
  std::string team_id;
  std::string code;  // generated when empty
};

// Transport-independent service: every public call authenticates the session
// token, checks the role/team matrix and then forwards to the engine. Errors
// surface as ttx::Error (kUnauthorized, kForbidden, engine codes).
//
// Operations reading or mutating the deployed exercise hold a shared lock;
// deploy holds it exclusively. Team serialization is the engine's.
class ExerciseService {
 public:
  ExerciseService(ServiceConfig config, const engine::Clock& clock);
  ~ExerciseService();

  ExerciseService(const ExerciseService&) = delete;
  ExerciseService& operator=(const ExerciseService&) = delete;

  // Instructor code -> instructor session; team code + name -> trainee session.
  nlohmann::ordered_json Login(const std::string& code, const std::string& name);

  // Instructor only. Replaces a created or ended exercise; invalidates trainee
  // sessions. Throws Error(kInvalidDefinition) with all diagnostics in the
  // message when the text does not parse.
  nlohmann::ordered_json Deploy(const std::string& token, const std::string& definition_text,
                                const std::vector<TeamAccess>& teams);
  nlohmann::ordered_json StartExercise(const std::string& token);
  nlohmann::ordered_json EndExercise(const std::string& token);
  nlohmann::ordered_json ExerciseStatus(const std::string& token) const;

  nlohmann::ordered_json TeamView(const std::string& token, const std::string& team_id) const;
  nlohmann::ordered_json Overview(const std::string& token) const;

  nlohmann::ordered_json ClaimToken(const std::string& token, const std::string& team_id);
  nlohmann::ordered_json ReleaseToken(const std::string& token, const std::string& team_id);

  // Trainee commands. A token-less attempt returns {"accepted": false, ...}.
  nlohmann::ordered_json InvokeTool(const std::string& token, const std::string& team_id,
                                    const std::string& tool_id, const toolkit::Arguments& args);
  nlohmann::ordered_json SendEmail(const std::string& token, const std::string& team_id,
                                   const engine::SendEmail& email);

  nlohmann::ordered_json DeliverInject(const std::string& token, const std::string& team_id,
                                       const std::string& inject_id);
  nlohmann::ordered_json ReplyInThread(const std::string& token, const std::string& team_id,
                                       const engine::ReplyInThread& reply);

  // One stream as JSONL text (instructor).
  std::string TeamLogText(const std::string& token, const std::string& team_id,
                          const std::string& category) const;
  // Writes every team's four files under the data directory (instructor).
  nlohmann::ordered_json ExportLogs(const std::string& token);
  nlohmann::ordered_json Report(const std::string& token) const;
  std::string ReportText(const std::string& token) const;

  // Trainees read their team stream; instructors read the all-teams stream.
  PollResult Events(const std::string& token, std::uint64_t cursor,
                    const std::string& exercise_id, std::chrono::milliseconds wait);

  // Advances the running exercise to the clock's reading.
  void Tick();
  // Calls Tick() every `period` on a background thread until destruction.
  void StartTicker(std::chrono::milliseconds period);
  void Shutdown();

 private:
  Session Authenticate(const std::string& token) const;
  static void RequireInstructor(const Session& session);
  void RequireTeamAccess(const Session& session, const std::string& team_id) const;
  Session RequireTrainee(const std::string& token, const std::string& team_id) const;
  engine::ExerciseInstance& Instance() const;
  std::vector<eventlog::TeamLogData> CollectLogs() const;

  ServiceConfig config_;
  const engine::Clock& clock_;
  SessionStore sessions_;
  EventHub hub_;

  mutable std::shared_mutex mu_;
  std::unique_ptr<engine::ExerciseInstance> instance_;
  std::string exercise_id_;
  std::map<std::string, std::string> team_codes_;  // code -> team id

  std::atomic<bool> stopping_{false};
  std::thread ticker_;
};

// HTTP status for an error code.
int HttpStatus(ErrorCode code);

}  // namespace ttx::service

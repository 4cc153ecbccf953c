#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ttx/definition/model.hpp"
#include "ttx/engine/clock.hpp"
#include "ttx/engine/effects.hpp"
#include "ttx/engine/team_state.hpp"
#include "ttx/eventlog/stream.hpp"

namespace ttx::engine {

enum class Status { kCreated, kRunning, kEnded };

std::string_view ToString(Status status);

// --- Team commands (require the operator token) ----------------------------

struct InvokeTool {
  std::string tool_id;
  toolkit::Arguments args;
};

// Empty `thread_id` starts a new thread with `subject`. Entries of `to` are
// actor ids or addresses; when replying, an empty `to` addresses every other
// participant of the thread.
struct SendEmail {
  std::string thread_id;
  std::vector<std::string> to;
  std::string subject;
  std::string body;
};

using Command = std::variant<InvokeTool, SendEmail>;

// --- Instructor actions ------------------------------------------------------

struct DeliverManualInject {
  std::string inject_id;
};

// Appends an instructor-origin message. With `as_actor` set the message is
// sent from that actor's address, otherwise from "instructor".
struct ReplyInThread {
  std::string thread_id;
  std::string body;
  std::string as_actor;
};

using InstructorAction = std::variant<DeliverManualInject, ReplyInThread>;

struct CommandResult {
  bool accepted = false;
  std::string message;  // rejection reason
  std::optional<toolkit::Classification> classification;
  std::string output;
  std::string invocation_id;
  std::string thread_id;
  Effects effects;
};

struct TokenClaim {
  bool granted = false;
  std::optional<std::string> holder;
};

inline constexpr std::string_view kInstructorSender = "instructor";

// One deployed exercise: independent per-team state machines sharing a
// definition and a clock. Calls for different teams may run concurrently;
// calls for one team are serialized on that team's mutex.
class ExerciseInstance {
 public:
  // Throws Error(kInvalidDefinition) if the definition has validation errors,
  // Error(kInvalidArgument) for an empty or malformed team list and
  // Error(kDuplicateTeam) for repeated ids.
  ExerciseInstance(definition::ExerciseDefinition def, std::vector<std::string> team_ids,
                   const Clock& clock);
  ~ExerciseInstance();

  ExerciseInstance(const ExerciseInstance&) = delete;
  ExerciseInstance& operator=(const ExerciseInstance&) = delete;

  // Called for every effect, in engine order, while the team's lock is held.
  // Must not call back into the instance. Set before Start().
  void SetObserver(std::function<void(const Effect&)> observer);

  // Mirror every team's streams into `<directory>/<team id>/`. Set before Start().
  void SetLogDirectory(const std::filesystem::path& directory);

  // created -> running at clock.Now(); seeds time triggers and delivers
  // everything due at the start.
  Effects Start();

  // Fires every pending event due at or before `to` (capped at the exercise
  // end). Reaching the end discards what is left and ends the exercise.
  Effects AdvanceTime(Timestamp to);

  // Ends the exercise early at the current clock reading.
  Effects EndNow();

  // Runs `command` for `trainee` at clock.Now(). A trainee without the token
  // gets accepted=false and a rejected-attempt log record; contract
  // violations (unknown tool/thread, ended exercise) throw Error.
  CommandResult HandleCommand(const std::string& team_id, const std::string& trainee,
                              const Command& command);

  Effects Instruct(const std::string& team_id, const InstructorAction& action);

  // Granted iff the token is free or already held by `trainee`.
  TokenClaim ClaimToken(const std::string& team_id, const std::string& trainee);
  // Returns true if `trainee` held the token and released it.
  bool ReleaseToken(const std::string& team_id, const std::string& trainee);

  TeamState Snapshot(const std::string& team_id) const;
  std::vector<eventlog::LogRecord> Records(const std::string& team_id,
                                           eventlog::Category category) const;
  void ExportTeamLogs(const std::string& team_id, const std::filesystem::path& directory) const;

  bool HasTeam(const std::string& team_id) const { return slots_.count(team_id) != 0; }
  const std::vector<std::string>& team_ids() const { return team_ids_; }
  const definition::ExerciseDefinition& definition() const { return def_; }
  Status status() const { return status_.load(); }
  Timestamp start_time() const { return start_; }
  Timestamp end_time() const { return start_ + Minutes(def_.duration_minutes); }
  const Clock& clock() const { return clock_; }

 private:
  struct TeamSlot;

  TeamSlot& Slot(const std::string& team_id) const;
  void Emit(TeamSlot& slot, Effect effect, Effects& out);
  void Schedule(TeamSlot& slot, std::size_t inject_index, Timestamp due, DeliveryCause cause,
                std::string context_thread = {});
  void Drain(TeamSlot& slot, Timestamp limit, Effects& out);
  void Fire(TeamSlot& slot, const PendingEvent& event, Effects& out);
  void Deliver(TeamSlot& slot, std::size_t inject_index, Timestamp at, DeliveryCause cause,
               const std::string& context_thread, Effects& out);
  void Reevaluate(TeamSlot& slot, Timestamp at, Effects& out);
  void EndTeam(TeamSlot& slot, Timestamp at, Effects& out);
  Timestamp CommandTime(const TeamSlot& slot) const;
  void RequireRunning(const TeamSlot& slot) const;

  void RunInvoke(TeamSlot& slot, const std::string& trainee, const InvokeTool& command,
                 Timestamp at, CommandResult& result);
  void RunSendEmail(TeamSlot& slot, const SendEmail& command, Timestamp at,
                    CommandResult& result);

  definition::ExerciseDefinition def_;
  std::vector<std::string> team_ids_;
  const Clock& clock_;
  std::map<std::string, std::unique_ptr<TeamSlot>> slots_;
  std::function<void(const Effect&)> observer_;
  std::optional<std::filesystem::path> log_directory_;

  std::atomic<Status> status_{Status::kCreated};
  Timestamp start_{};
  std::mutex lifecycle_mu_;  // Start / AdvanceTime / EndNow
  Timestamp advanced_to_{};
};

// Convenience: construct and start.
std::unique_ptr<ExerciseInstance> StartInstance(definition::ExerciseDefinition def,
                                                std::vector<std::string> team_ids,
                                                const Clock& clock,
                                                Effects* initial_effects = nullptr);

}  // namespace ttx::engine

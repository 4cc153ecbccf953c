#include "ttx/service/exercise_service.hpp"

#include <algorithm>
#include <set>

#include "ttx/analytics/metrics.hpp"
#include "ttx/analytics/render.hpp"
#include "ttx/definition/parser.hpp"

namespace ttx::service {

using engine::ExerciseInstance;
using nlohmann::ordered_json;

namespace {

bool IsParticipantName(const std::string& name) {
  return !name.empty() && name.size() <= 64 &&
         std::all_of(name.begin(), name.end(), [](unsigned char c) {
           return std::isalnum(c) || c == '_' || c == '-' || c == '.';
         });
}

std::string Dump(const ordered_json& value) {
  return value.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

ordered_json ArgsJson(const toolkit::Arguments& args) {
  ordered_json out = ordered_json::object();
  for (const auto& [name, value] : args) out[name] = value;
  return out;
}

}  // namespace

int HttpStatus(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnauthorized: return 401;
    case ErrorCode::kForbidden: return 403;
    case ErrorCode::kUnknownTeam:
    case ErrorCode::kUnknownTool:
    case ErrorCode::kUnknownThread:
    case ErrorCode::kUnknownInject:
    case ErrorCode::kUnknownMilestone: return 404;
    case ErrorCode::kNotRunning:
    case ErrorCode::kExerciseEnded:
    case ErrorCode::kTimeBackwards:
    case ErrorCode::kToolLocked:
    case ErrorCode::kNotManualInject:
    case ErrorCode::kAlreadyDelivered:
    case ErrorCode::kDuplicateTeam: return 409;
    case ErrorCode::kInvalidDefinition: return 422;
    case ErrorCode::kIo:
    case ErrorCode::kOutOfOrder:
    case ErrorCode::kCategoryMismatch: return 500;
    case ErrorCode::kInvalidArgument: return 400;
  }
  return 500;
}

ExerciseService::ExerciseService(ServiceConfig config, const engine::Clock& clock)
    : config_(std::move(config)), clock_(clock) {
  if (config_.instructor_code.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "instructor access code must not be empty");
  }
}

ExerciseService::~ExerciseService() { Shutdown(); }

Session ExerciseService::Authenticate(const std::string& token) const {
  auto session = sessions_.Find(token);
  if (!session) throw Error(ErrorCode::kUnauthorized, "missing or invalid session token");
  return *session;
}

void ExerciseService::RequireInstructor(const Session& session) {
  if (session.role != Role::kInstructor) {
    throw Error(ErrorCode::kForbidden, "instructor role required");
  }
}

void ExerciseService::RequireTeamAccess(const Session& session, const std::string& team_id) const {
  if (session.role == Role::kTrainee && session.team_id != team_id) {
    throw Error(ErrorCode::kForbidden, "trainees may only access their own team");
  }
  if (!Instance().HasTeam(team_id)) {
    throw Error(ErrorCode::kUnknownTeam, "unknown team '" + team_id + "'");
  }
}

Session ExerciseService::RequireTrainee(const std::string& token,
                                        const std::string& team_id) const {
  Session session = Authenticate(token);
  if (session.role != Role::kTrainee) {
    throw Error(ErrorCode::kForbidden, "only trainees operate team tools");
  }
  RequireTeamAccess(session, team_id);
  return session;
}

ExerciseInstance& ExerciseService::Instance() const {
  if (!instance_) throw Error(ErrorCode::kNotRunning, "no exercise deployed");
  return *instance_;
}

ordered_json ExerciseService::Login(const std::string& code, const std::string& name) {
  ordered_json out;
  if (code == config_.instructor_code) {
    const std::string participant = name.empty() ? "instructor" : name;
    if (!IsParticipantName(participant)) {
      throw Error(ErrorCode::kInvalidArgument, "name must be 1-64 characters of [A-Za-z0-9_.-]");
    }
    const Session session = sessions_.Create(participant, Role::kInstructor, "");
    out["token"] = session.token;
    out["role"] = ToString(session.role);
    out["participant_id"] = session.participant_id;
    return out;
  }
  std::shared_lock lock(mu_);
  const auto it = team_codes_.find(code);
  if (it == team_codes_.end()) throw Error(ErrorCode::kUnauthorized, "invalid access code");
  if (!IsParticipantName(name)) {
    throw Error(ErrorCode::kInvalidArgument, "name must be 1-64 characters of [A-Za-z0-9_.-]");
  }
  const Session session = sessions_.Create(name, Role::kTrainee, it->second);
  out["token"] = session.token;
  out["role"] = ToString(session.role);
  out["participant_id"] = session.participant_id;
  out["team_id"] = session.team_id;
  out["exercise_id"] = exercise_id_;
  return out;
}

ordered_json ExerciseService::Deploy(const std::string& token, const std::string& definition_text,
                                     const std::vector<TeamAccess>& teams) {
  RequireInstructor(Authenticate(token));
  definition::ParseResult parsed = definition::ParseDefinition(definition_text);
  if (!parsed.ok()) {
    std::string message = "definition rejected:";
    for (const auto& error : parsed.errors) message += "\n" + error.ToString();
    throw Error(ErrorCode::kInvalidDefinition, message);
  }
  std::vector<std::string> team_ids;
  std::map<std::string, std::string> codes;
  for (const auto& team : teams) {
    std::string code = team.code.empty() ? RandomHex(8) : team.code;
    if (code == config_.instructor_code || !codes.emplace(code, team.team_id).second) {
      throw Error(ErrorCode::kInvalidArgument, "access code for team '" + team.team_id +
                                                   "' is not unique");
    }
    team_ids.push_back(team.team_id);
  }

  std::unique_lock lock(mu_);
  if (instance_ && instance_->status() == engine::Status::kRunning) {
    throw Error(ErrorCode::kInvalidArgument, "an exercise is running; end it before redeploying");
  }
  auto instance = std::make_unique<ExerciseInstance>(*parsed.definition, team_ids, clock_);
  const std::string exercise_id = "ex-" + RandomHex(8);
  ExerciseInstance* raw = instance.get();
  instance->SetObserver([this, raw](const engine::Effect& effect) {
    // Trainees never learn milestone progress, matching the team view.
    const bool team_visible = !std::holds_alternative<engine::MilestoneReached>(effect.detail);
    hub_.Publish(effect.team_id, Dump(engine::ToJson(effect, raw->start_time())), team_visible);
  });
  if (config_.data_directory) instance->SetLogDirectory(*config_.data_directory / exercise_id / "live");

  instance_ = std::move(instance);
  exercise_id_ = exercise_id;
  team_codes_ = std::move(codes);
  hub_.Reset(exercise_id_);
  sessions_.ClearTrainees();

  ordered_json out;
  out["exercise_id"] = exercise_id_;
  out["name"] = instance_->definition().name;
  out["teams"] = ordered_json::array();
  for (const auto& [code, team] : team_codes_) {
    out["teams"].push_back({{"team_id", team}, {"code", code}});
  }
  std::sort(out["teams"].begin(), out["teams"].end(),
            [](const auto& a, const auto& b) { return a["team_id"] < b["team_id"]; });
  out["warnings"] = ordered_json::array();
  for (const auto& warning : parsed.warnings) out["warnings"].push_back(warning.ToString());
  return out;
}

ordered_json ExerciseService::StartExercise(const std::string& token) {
  RequireInstructor(Authenticate(token));
  {
    std::shared_lock lock(mu_);
    Instance().Start();
  }
  return ExerciseStatus(token);
}

ordered_json ExerciseService::EndExercise(const std::string& token) {
  RequireInstructor(Authenticate(token));
  {
    std::shared_lock lock(mu_);
    Instance().EndNow();
  }
  return ExerciseStatus(token);
}

ordered_json ExerciseService::ExerciseStatus(const std::string& token) const {
  const Session session = Authenticate(token);
  std::shared_lock lock(mu_);
  ordered_json out;
  if (!instance_) {
    out["status"] = "none";
    return out;
  }
  const ExerciseInstance& instance = *instance_;
  out["exercise_id"] = exercise_id_;
  out["name"] = instance.definition().name;
  out["status"] = engine::ToString(instance.status());
  out["duration_minutes"] = instance.definition().duration_minutes;
  out["now"] = FormatTimestamp(clock_.Now());
  if (instance.status() != engine::Status::kCreated) {
    out["start_time"] = FormatTimestamp(instance.start_time());
    out["end_time"] = FormatTimestamp(instance.end_time());
  }
  if (session.role == Role::kInstructor) {
    out["teams"] = instance.team_ids();
  } else {
    out["teams"] = ordered_json::array({session.team_id});
  }
  return out;
}

ordered_json ExerciseService::TeamView(const std::string& token, const std::string& team_id) const {
  const Session session = Authenticate(token);
  std::shared_lock lock(mu_);
  RequireTeamAccess(session, team_id);
  const ExerciseInstance& instance = *instance_;
  const auto& def = instance.definition();
  const engine::TeamState state = instance.Snapshot(team_id);
  const bool instructor = session.role == Role::kInstructor;

  ordered_json out;
  out["team_id"] = team_id;
  out["exercise"] = {{"exercise_id", exercise_id_},
                     {"name", def.name},
                     {"status", engine::ToString(instance.status())},
                     {"now", FormatTimestamp(clock_.Now())}};
  if (instance.status() != engine::Status::kCreated) {
    out["exercise"]["start_time"] = FormatTimestamp(instance.start_time());
    out["exercise"]["end_time"] = FormatTimestamp(instance.end_time());
  }

  out["injects"] = ordered_json::array();
  for (const auto& delivered : state.delivered) {
    const auto* inject = def.FindInject(delivered.inject_id);
    const auto* actor = def.FindActor(inject->sender);
    out["injects"].push_back({{"inject_id", inject->id},
                              {"sender", actor ? actor->email : inject->sender},
                              {"sender_name", actor ? actor->name : inject->sender},
                              {"subject", inject->subject},
                              {"body", inject->body},
                              {"delivered_at", FormatTimestamp(delivered.at)}});
  }

  out["threads"] = ordered_json::array();
  for (const auto& thread : state.threads) {
    ordered_json t{{"thread_id", thread.id},
                   {"subject", thread.subject},
                   {"participants", thread.participants},
                   {"messages", ordered_json::array()}};
    for (const auto& message : thread.messages) {
      t["messages"].push_back({{"sender", message.sender},
                               {"recipients", message.recipients},
                               {"timestamp", FormatTimestamp(message.at)},
                               {"body", message.body},
                               {"origin", engine::ToString(message.origin)}});
    }
    out["threads"].push_back(std::move(t));
  }

  out["tools"] = ordered_json::array();
  for (const auto& tool : def.tools) {
    const bool available = tool.unlocked_by.empty() || state.IsDelivered(tool.unlocked_by);
    if (!available && !instructor) continue;
    ordered_json t{{"tool_id", tool.id},
                   {"name", tool.name},
                   {"description", tool.description},
                   {"arguments", ordered_json::array()}};
    for (const auto& arg : tool.arguments) {
      t["arguments"].push_back(
          {{"name", arg.name}, {"pattern", arg.pattern}, {"required", arg.required}});
    }
    if (instructor) t["available"] = available;
    out["tools"].push_back(std::move(t));
  }

  out["invocations"] = ordered_json::array();
  for (const auto& inv : state.invocations) {
    out["invocations"].push_back({{"invocation_id", inv.id},
                                  {"tool_id", inv.tool_id},
                                  {"args", ArgsJson(inv.args)},
                                  {"classification", inv.classification.correct ? "correct" : "incorrect"},
                                  {"reason", inv.classification.reason},
                                  {"output", inv.output},
                                  {"timestamp", FormatTimestamp(inv.at)},
                                  {"acting_trainee", inv.trainee}});
  }

  out["actors"] = ordered_json::array();
  for (const auto& actor : def.actors) {
    out["actors"].push_back({{"actor_id", actor.id}, {"email", actor.email}, {"name", actor.name}});
  }

  out["token"] = ordered_json::object();
  out["token"]["holder"] = state.token_holder ? ordered_json(*state.token_holder) : ordered_json();
  if (state.token_acquired_at) out["token"]["acquired_at"] = FormatTimestamp(*state.token_acquired_at);

  if (instructor) {
    out["milestones"] = ordered_json::array();
    for (const auto& milestone : def.milestones) {
      const auto& status = state.milestones.at(milestone.id);
      out["milestones"].push_back(
          {{"milestone_id", milestone.id},
           {"description", milestone.description},
           {"reached", status.reached},
           {"reached_at", status.reached_at ? ordered_json(FormatTimestamp(*status.reached_at))
                                            : ordered_json()}});
    }
    out["pending_injects"] = state.pending.size();
  }
  return out;
}

ordered_json ExerciseService::Overview(const std::string& token) const {
  RequireInstructor(Authenticate(token));
  std::shared_lock lock(mu_);
  const ExerciseInstance& instance = Instance();
  const auto& def = instance.definition();
  ordered_json out;
  out["exercise_id"] = exercise_id_;
  out["status"] = engine::ToString(instance.status());
  out["milestones"] = ordered_json::array();
  for (const auto& milestone : def.milestones) {
    out["milestones"].push_back({{"milestone_id", milestone.id}, {"description", milestone.description}});
  }
  out["teams"] = ordered_json::array();
  for (const auto& team_id : instance.team_ids()) {
    const engine::TeamState state = instance.Snapshot(team_id);
    ordered_json t;
    t["team_id"] = team_id;
    t["milestones"] = ordered_json::object();
    std::int64_t reached = 0;
    for (const auto& milestone : def.milestones) {
      const auto& status = state.milestones.at(milestone.id);
      t["milestones"][milestone.id] = status.reached_at
                                          ? ordered_json(FormatTimestamp(*status.reached_at))
                                          : ordered_json();
      reached += status.reached ? 1 : 0;
    }
    t["milestones_reached"] = reached;
    t["injects"] = ordered_json::array();
    for (const auto& delivered : state.delivered) t["injects"].push_back(delivered.inject_id);
    t["tool_uses"] = state.invocations.size();
    t["threads"] = state.threads.size();
    t["token_holder"] = state.token_holder ? ordered_json(*state.token_holder) : ordered_json();
    out["teams"].push_back(std::move(t));
  }
  return out;
}

ordered_json ExerciseService::ClaimToken(const std::string& token, const std::string& team_id) {
  std::shared_lock lock(mu_);
  const Session session = RequireTrainee(token, team_id);
  const engine::TokenClaim claim = Instance().ClaimToken(team_id, session.participant_id);
  return {{"granted", claim.granted},
          {"holder", claim.holder ? ordered_json(*claim.holder) : ordered_json()}};
}

ordered_json ExerciseService::ReleaseToken(const std::string& token, const std::string& team_id) {
  std::shared_lock lock(mu_);
  const Session session = RequireTrainee(token, team_id);
  const bool released = Instance().ReleaseToken(team_id, session.participant_id);
  return {{"released", released}};
}

ordered_json ExerciseService::InvokeTool(const std::string& token, const std::string& team_id,
                                         const std::string& tool_id,
                                         const toolkit::Arguments& args) {
  std::shared_lock lock(mu_);
  const Session session = RequireTrainee(token, team_id);
  const engine::CommandResult result = Instance().HandleCommand(
      team_id, session.participant_id, engine::InvokeTool{tool_id, args});
  ordered_json out;
  out["accepted"] = result.accepted;
  if (!result.accepted) {
    out["message"] = result.message;
    return out;
  }
  out["invocation_id"] = result.invocation_id;
  out["classification"] = result.classification->correct ? "correct" : "incorrect";
  out["reason"] = result.classification->reason;
  out["output"] = result.output;
  return out;
}

ordered_json ExerciseService::SendEmail(const std::string& token, const std::string& team_id,
                                        const engine::SendEmail& email) {
  std::shared_lock lock(mu_);
  const Session session = RequireTrainee(token, team_id);
  const engine::CommandResult result =
      Instance().HandleCommand(team_id, session.participant_id, email);
  ordered_json out;
  out["accepted"] = result.accepted;
  if (!result.accepted) {
    out["message"] = result.message;
    return out;
  }
  out["thread_id"] = result.thread_id;
  return out;
}

ordered_json ExerciseService::DeliverInject(const std::string& token, const std::string& team_id,
                                            const std::string& inject_id) {
  const Session session = Authenticate(token);
  RequireInstructor(session);
  std::shared_lock lock(mu_);
  RequireTeamAccess(session, team_id);
  const engine::Effects effects =
      Instance().Instruct(team_id, engine::DeliverManualInject{inject_id});
  return {{"delivered", inject_id}, {"effects", effects.size()}};
}

ordered_json ExerciseService::ReplyInThread(const std::string& token, const std::string& team_id,
                                            const engine::ReplyInThread& reply) {
  const Session session = Authenticate(token);
  RequireInstructor(session);
  std::shared_lock lock(mu_);
  RequireTeamAccess(session, team_id);
  const engine::Effects effects = Instance().Instruct(team_id, reply);
  return {{"thread_id", reply.thread_id}, {"effects", effects.size()}};
}

std::string ExerciseService::TeamLogText(const std::string& token, const std::string& team_id,
                                         const std::string& category) const {
  const Session session = Authenticate(token);
  RequireInstructor(session);
  const auto parsed = eventlog::CategoryFromString(category);
  if (!parsed) throw Error(ErrorCode::kInvalidArgument, "unknown log category '" + category + "'");
  std::shared_lock lock(mu_);
  RequireTeamAccess(session, team_id);
  std::string out;
  for (const auto& record : Instance().Records(team_id, *parsed)) {
    out += eventlog::ToLine(record);
    out += '\n';
  }
  return out;
}

ordered_json ExerciseService::ExportLogs(const std::string& token) {
  RequireInstructor(Authenticate(token));
  if (!config_.data_directory) {
    throw Error(ErrorCode::kInvalidArgument, "no data directory configured");
  }
  std::shared_lock lock(mu_);
  const ExerciseInstance& instance = Instance();
  const auto directory = *config_.data_directory / exercise_id_ / "export";
  for (const auto& team_id : instance.team_ids()) instance.ExportTeamLogs(team_id, directory / team_id);
  return {{"directory", directory.string()}, {"teams", instance.team_ids()}};
}

std::vector<eventlog::TeamLogData> ExerciseService::CollectLogs() const {
  const ExerciseInstance& instance = Instance();
  std::vector<eventlog::TeamLogData> logs;
  for (const auto& team_id : instance.team_ids()) {
    eventlog::TeamLogData data;
    data.team_id = team_id;
    data.directory = team_id;
    for (const auto category : eventlog::kAllCategories) {
      data.streams[static_cast<std::size_t>(category)] = instance.Records(team_id, category);
    }
    logs.push_back(std::move(data));
  }
  return logs;
}

ordered_json ExerciseService::Report(const std::string& token) const {
  RequireInstructor(Authenticate(token));
  std::shared_lock lock(mu_);
  return analytics::ToJson(analytics::BuildReport(Instance().definition(), CollectLogs()));
}

std::string ExerciseService::ReportText(const std::string& token) const {
  RequireInstructor(Authenticate(token));
  std::shared_lock lock(mu_);
  return analytics::RenderText(analytics::BuildReport(Instance().definition(), CollectLogs()));
}

PollResult ExerciseService::Events(const std::string& token, std::uint64_t cursor,
                                   const std::string& exercise_id, std::chrono::milliseconds wait) {
  const Session session = Authenticate(token);
  std::optional<std::string> scope;
  if (session.role == Role::kTrainee) scope = session.team_id;
  return hub_.Fetch(scope, cursor, exercise_id, wait);
}

void ExerciseService::Tick() {
  std::shared_lock lock(mu_);
  if (!instance_ || instance_->status() != engine::Status::kRunning) return;
  try {
    instance_->AdvanceTime(clock_.Now());
  } catch (const Error&) {
    // Lost a race with EndNow or a non-monotonic clock reading; next tick retries.
  }
}

void ExerciseService::StartTicker(std::chrono::milliseconds period) {
  if (ticker_.joinable()) return;
  ticker_ = std::thread([this, period] {
    while (!stopping_.load()) {
      Tick();
      const auto until = std::chrono::steady_clock::now() + period;
      while (!stopping_.load() && std::chrono::steady_clock::now() < until) {
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
      }
    }
  });
}

void ExerciseService::Shutdown() {
  stopping_.store(true);
  hub_.Close();
  if (ticker_.joinable()) ticker_.join();
}

}  // namespace ttx::service

#include "ttx/engine/instance.hpp"

#include <algorithm>
#include <set>

#include "ttx/common/error.hpp"
#include "ttx/common/strings.hpp"
#include "ttx/definition/validate.hpp"
#include "ttx/engine/milestones.hpp"

namespace ttx::engine {

using namespace ttx::definition;

struct ExerciseInstance::TeamSlot {
  mutable std::mutex mu;
  TeamState state;
  eventlog::TeamLog log;
  std::uint64_t rejected = 0;  // attempt ids live outside TeamState
};

std::string_view ToString(Status status) {
  switch (status) {
    case Status::kCreated: return "created";
    case Status::kRunning: return "running";
    case Status::kEnded: return "ended";
  }
  return "created";
}

namespace {

bool IsTeamId(const std::string& id) {
  return !id.empty() && std::all_of(id.begin(), id.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '-';
  });
}

std::string JoinRecipients(const std::vector<std::string>& to) {
  std::string out;
  for (const auto& item : to) {
    if (!out.empty()) out += ",";
    out += item;
  }
  return out;
}

}  // namespace

ExerciseInstance::ExerciseInstance(ExerciseDefinition def, std::vector<std::string> team_ids,
                                   const Clock& clock)
    : def_(std::move(def)), team_ids_(std::move(team_ids)), clock_(clock) {
  const ValidationReport report = Validate(def_);
  if (!report.ok()) {
    throw Error(ErrorCode::kInvalidDefinition,
                "definition has " + std::to_string(report.errors.size()) +
                    " error(s); first: " + report.errors.front().ToString());
  }
  if (team_ids_.empty()) throw Error(ErrorCode::kInvalidArgument, "team list is empty");
  for (const auto& id : team_ids_) {
    if (!IsTeamId(id)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "team id '" + id + "' must be non-empty and use only [A-Za-z0-9_-]");
    }
    auto slot = std::make_unique<TeamSlot>();
    slot->state.team_id = id;
    for (const auto& milestone : def_.milestones) slot->state.milestones[milestone.id] = {};
    if (!slots_.emplace(id, std::move(slot)).second) {
      throw Error(ErrorCode::kDuplicateTeam, "duplicate team id '" + id + "'");
    }
  }
}

ExerciseInstance::~ExerciseInstance() = default;

void ExerciseInstance::SetObserver(std::function<void(const Effect&)> observer) {
  observer_ = std::move(observer);
}

void ExerciseInstance::SetLogDirectory(const std::filesystem::path& directory) {
  log_directory_ = directory;
}

ExerciseInstance::TeamSlot& ExerciseInstance::Slot(const std::string& team_id) const {
  const auto it = slots_.find(team_id);
  if (it == slots_.end()) throw Error(ErrorCode::kUnknownTeam, "unknown team '" + team_id + "'");
  return *it->second;
}

void ExerciseInstance::Emit(TeamSlot& slot, Effect effect, Effects& out) {
  slot.log.Append(ToLogRecord(effect, start_));
  out.push_back(std::move(effect));
  if (observer_) observer_(out.back());
}

void ExerciseInstance::Schedule(TeamSlot& slot, std::size_t inject_index, Timestamp due,
                                DeliveryCause cause, std::string context_thread) {
  TeamState& state = slot.state;
  if (state.IsDelivered(def_.injects[inject_index].id)) return;
  const bool pending = std::any_of(state.pending.begin(), state.pending.end(),
                                   [&](const PendingEvent& e) {
                                     return e.inject_index == inject_index;
                                   });
  if (pending) return;
  state.pending.insert(
      PendingEvent{due, inject_index, state.next_seq++, cause, std::move(context_thread)});
}

void ExerciseInstance::Drain(TeamSlot& slot, Timestamp limit, Effects& out) {
  TeamState& state = slot.state;
  while (!state.pending.empty() && state.pending.begin()->due <= limit) {
    const PendingEvent event = *state.pending.begin();
    state.pending.erase(state.pending.begin());
    Fire(slot, event, out);
  }
  state.processed_until = std::max(state.processed_until, limit);
}

void ExerciseInstance::Fire(TeamSlot& slot, const PendingEvent& event, Effects& out) {
  const InjectSpec& inject = def_.injects[event.inject_index];
  if (slot.state.IsDelivered(inject.id)) return;
  if (event.cause == DeliveryCause::kIfMilestoneMissing) {
    const auto& trigger = std::get<IfMilestoneMissing>(inject.trigger);
    if (slot.state.IsReached(trigger.milestone)) return;
  }
  Deliver(slot, event.inject_index, event.due, event.cause, event.context_thread, out);
}

void ExerciseInstance::Deliver(TeamSlot& slot, std::size_t inject_index, Timestamp at,
                               DeliveryCause cause, const std::string& context_thread,
                               Effects& out) {
  TeamState& state = slot.state;
  const InjectSpec& inject = def_.injects[inject_index];
  state.delivered.push_back({inject.id, at});
  Emit(slot, {state.team_id, at, InjectDelivered{inject.id, cause}}, out);

  // An actor's reply also lands in the thread that provoked it.
  const ActorSpec* actor = def_.FindActor(inject.sender);
  EmailThread* thread = context_thread.empty() ? nullptr : state.FindThread(context_thread);
  if (actor != nullptr && thread != nullptr) {
    EmailMessage message{actor->email, {state.team_id}, at, inject.body, Origin::kActor};
    thread->Append(message);
    Emit(slot, {state.team_id, at, EmailAppended{thread->id, thread->subject, std::move(message)}},
         out);
  }
  Reevaluate(slot, at, out);
}

void ExerciseInstance::Reevaluate(TeamSlot& slot, Timestamp at, Effects& out) {
  TeamState& state = slot.state;
  for (const auto& milestone_id : EvaluateMilestones(def_, state)) {
    state.milestones[milestone_id] = MilestoneStatus{true, at};
    Emit(slot, {state.team_id, at, MilestoneReached{milestone_id}}, out);
    for (std::size_t i = 0; i < def_.injects.size(); ++i) {
      const auto* trigger = std::get_if<AfterMilestone>(&def_.injects[i].trigger);
      if (trigger != nullptr && trigger->milestone == milestone_id) {
        Schedule(slot, i, at + Minutes(trigger->delay_minutes), DeliveryCause::kAfterMilestone);
      }
    }
  }
}

void ExerciseInstance::EndTeam(TeamSlot& slot, Timestamp at, Effects& out) {
  TeamState& state = slot.state;
  Drain(slot, at, out);
  while (!state.pending.empty()) {
    const PendingEvent event = *state.pending.begin();
    state.pending.erase(state.pending.begin());
    Emit(slot, {state.team_id, at, InjectDiscarded{def_.injects[event.inject_index].id, event.cause}},
         out);
  }
  state.ended = true;
}

Timestamp ExerciseInstance::CommandTime(const TeamSlot& slot) const {
  return std::max(clock_.Now(), slot.state.processed_until);
}

void ExerciseInstance::RequireRunning(const TeamSlot& slot) const {
  const Status status = status_.load();
  if (status == Status::kCreated) throw Error(ErrorCode::kNotRunning, "exercise not started");
  if (status == Status::kEnded || slot.state.ended) {
    throw Error(ErrorCode::kExerciseEnded, "exercise has ended");
  }
}

Effects ExerciseInstance::Start() {
  std::lock_guard lifecycle(lifecycle_mu_);
  if (status_.load() != Status::kCreated) {
    throw Error(ErrorCode::kInvalidArgument, "exercise already started");
  }
  start_ = clock_.Now();
  advanced_to_ = start_;
  if (log_directory_) {
    for (auto& [id, slot] : slots_) slot->log.MirrorTo(*log_directory_ / id);
  }
  status_.store(Status::kRunning);

  Effects out;
  for (const auto& id : team_ids_) {
    TeamSlot& slot = *slots_.at(id);
    std::lock_guard lock(slot.mu);
    slot.state.processed_until = start_;
    for (std::size_t i = 0; i < def_.injects.size(); ++i) {
      const auto& trigger = def_.injects[i].trigger;
      if (const auto* t = std::get_if<AtTime>(&trigger)) {
        Schedule(slot, i, start_ + Minutes(t->minute), DeliveryCause::kAtTime);
      } else if (const auto* t = std::get_if<IfMilestoneMissing>(&trigger)) {
        Schedule(slot, i, start_ + Minutes(t->deadline_minute), DeliveryCause::kIfMilestoneMissing);
      }
    }
    Drain(slot, start_, out);
  }
  return out;
}

Effects ExerciseInstance::AdvanceTime(Timestamp to) {
  std::lock_guard lifecycle(lifecycle_mu_);
  const Status status = status_.load();
  if (status == Status::kCreated) throw Error(ErrorCode::kNotRunning, "exercise not started");
  if (status == Status::kEnded) throw Error(ErrorCode::kExerciseEnded, "exercise has ended");
  if (to < advanced_to_) {
    throw Error(ErrorCode::kTimeBackwards, "cannot advance to " + FormatTimestamp(to) +
                                               ", already at " + FormatTimestamp(advanced_to_));
  }
  advanced_to_ = to;
  const Timestamp end = end_time();
  Effects out;
  for (const auto& id : team_ids_) {
    TeamSlot& slot = *slots_.at(id);
    std::lock_guard lock(slot.mu);
    if (slot.state.ended) continue;
    if (to >= end) {
      EndTeam(slot, end, out);
    } else {
      Drain(slot, to, out);
    }
  }
  if (to >= end) status_.store(Status::kEnded);
  return out;
}

Effects ExerciseInstance::EndNow() {
  std::lock_guard lifecycle(lifecycle_mu_);
  const Status status = status_.load();
  if (status == Status::kCreated) throw Error(ErrorCode::kNotRunning, "exercise not started");
  if (status == Status::kEnded) throw Error(ErrorCode::kExerciseEnded, "exercise has ended");
  const Timestamp now = std::min(clock_.Now(), end_time());
  Effects out;
  for (const auto& id : team_ids_) {
    TeamSlot& slot = *slots_.at(id);
    std::lock_guard lock(slot.mu);
    if (!slot.state.ended) EndTeam(slot, std::max(now, slot.state.processed_until), out);
  }
  status_.store(Status::kEnded);
  return out;
}

CommandResult ExerciseInstance::HandleCommand(const std::string& team_id,
                                              const std::string& trainee,
                                              const Command& command) {
  TeamSlot& slot = Slot(team_id);
  std::lock_guard lock(slot.mu);
  RequireRunning(slot);
  const Timestamp at = CommandTime(slot);
  if (at >= end_time()) throw Error(ErrorCode::kExerciseEnded, "exercise time is over");

  CommandResult result;
  Drain(slot, at, result.effects);

  TeamState& state = slot.state;
  if (state.token_holder != trainee) {
    CommandRejected rejected;
    rejected.attempt_id = "rej-" + std::to_string(++slot.rejected);
    rejected.trainee = trainee;
    rejected.reason = state.token_holder ? "operator token held by " + *state.token_holder
                                         : std::string("operator token not held");
    if (const auto* invoke = std::get_if<InvokeTool>(&command)) {
      rejected.tool_id = invoke->tool_id;
      rejected.args = invoke->args;
    } else {
      const auto& email = std::get<SendEmail>(command);
      rejected.tool_id = "email";
      if (!email.thread_id.empty()) rejected.args["thread_id"] = email.thread_id;
      rejected.args["to"] = JoinRecipients(email.to);
      rejected.args["subject"] = email.subject;
    }
    result.message = rejected.reason;
    Emit(slot, {team_id, at, std::move(rejected)}, result.effects);
    return result;
  }

  if (const auto* invoke = std::get_if<InvokeTool>(&command)) {
    RunInvoke(slot, trainee, *invoke, at, result);
  } else {
    RunSendEmail(slot, std::get<SendEmail>(command), at, result);
  }
  result.accepted = true;
  Drain(slot, at, result.effects);
  return result;
}

void ExerciseInstance::RunInvoke(TeamSlot& slot, const std::string& trainee,
                                 const InvokeTool& command, Timestamp at, CommandResult& result) {
  TeamState& state = slot.state;
  const ToolSpec* tool = def_.FindTool(command.tool_id);
  if (tool == nullptr) {
    throw Error(ErrorCode::kUnknownTool, "unknown tool '" + command.tool_id + "'");
  }
  if (!tool->unlocked_by.empty() && !state.IsDelivered(tool->unlocked_by)) {
    throw Error(ErrorCode::kToolLocked, "tool '" + tool->id + "' is not available yet");
  }
  toolkit::ToolResult tool_result = toolkit::Invoke(*tool, command.args, def_.pages, state.tool_state);

  ToolInvocation invocation;
  invocation.id = "inv-" + std::to_string(state.invocations.size() + 1);
  invocation.tool_id = tool->id;
  invocation.args = command.args;
  invocation.classification = tool_result.classification;
  invocation.output = tool_result.output;
  invocation.at = at;
  invocation.trainee = trainee;
  state.invocations.push_back(invocation);

  result.classification = tool_result.classification;
  result.output = tool_result.output;
  result.invocation_id = invocation.id;
  Emit(slot, {state.team_id, at, ToolInvoked{std::move(invocation)}}, result.effects);
  Reevaluate(slot, at, result.effects);
}

void ExerciseInstance::RunSendEmail(TeamSlot& slot, const SendEmail& command, Timestamp at,
                                    CommandResult& result) {
  TeamState& state = slot.state;
  std::optional<std::size_t> thread_index;
  if (!command.thread_id.empty()) {
    for (std::size_t i = 0; i < state.threads.size(); ++i) {
      if (state.threads[i].id == command.thread_id) thread_index = i;
    }
    if (!thread_index) {
      throw Error(ErrorCode::kUnknownThread, "unknown thread '" + command.thread_id + "'");
    }
  }

  std::vector<std::string> recipients;
  auto add_recipient = [&](const std::string& address) {
    const bool seen = std::any_of(recipients.begin(), recipients.end(), [&](const auto& r) {
      return EqualsIgnoreCase(r, address);
    });
    if (!seen) recipients.push_back(address);
  };
  for (const auto& entry : command.to) {
    if (const ActorSpec* actor = def_.ResolveActor(entry)) {
      add_recipient(actor->email);
    } else if (entry.find('@') != std::string::npos) {
      add_recipient(entry);
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown recipient '" + entry + "'");
    }
  }
  if (command.to.empty() && thread_index) {
    for (const auto& participant : state.threads[*thread_index].participants) {
      if (participant != state.team_id && participant != kInstructorSender) {
        add_recipient(participant);
      }
    }
  }
  if (recipients.empty()) throw Error(ErrorCode::kInvalidArgument, "email has no recipients");

  if (!thread_index) {
    EmailThread thread;
    thread.id = "thread-" + std::to_string(state.threads.size() + 1);
    thread.subject = command.subject.empty() ? "(no subject)" : command.subject;
    state.threads.push_back(std::move(thread));
    thread_index = state.threads.size() - 1;
  }
  EmailThread& thread = state.threads[*thread_index];
  EmailMessage message{state.team_id, recipients, at, command.body, Origin::kTeam};
  thread.Append(message);
  result.thread_id = thread.id;
  Emit(slot, {state.team_id, at, EmailAppended{thread.id, thread.subject, std::move(message)}},
       result.effects);

  for (const auto& recipient : recipients) {
    const ActorSpec* actor = def_.ResolveActor(recipient);
    if (actor == nullptr) continue;
    for (const auto& rule : actor->auto_replies) {
      if (!MatchesAnyKeyword(command.body, rule.keywords)) continue;
      if (const auto index = def_.InjectIndex(rule.reply_inject)) {
        Schedule(slot, *index, at + Minutes(rule.delay_minutes), DeliveryCause::kAutoReply,
                 result.thread_id);
      }
      break;  // first matching rule wins
    }
    for (std::size_t i = 0; i < def_.injects.size(); ++i) {
      const auto* trigger = std::get_if<OnEmailTo>(&def_.injects[i].trigger);
      if (trigger != nullptr && trigger->actor == actor->id) {
        Schedule(slot, i, at + Minutes(trigger->delay_minutes), DeliveryCause::kOnEmailTo,
                 result.thread_id);
      }
    }
  }
  Reevaluate(slot, at, result.effects);
}

Effects ExerciseInstance::Instruct(const std::string& team_id, const InstructorAction& action) {
  TeamSlot& slot = Slot(team_id);
  std::lock_guard lock(slot.mu);
  RequireRunning(slot);
  const Timestamp at = CommandTime(slot);
  if (at >= end_time()) throw Error(ErrorCode::kExerciseEnded, "exercise time is over");

  Effects out;
  Drain(slot, at, out);
  TeamState& state = slot.state;
  if (const auto* deliver = std::get_if<DeliverManualInject>(&action)) {
    const auto index = def_.InjectIndex(deliver->inject_id);
    if (!index) {
      throw Error(ErrorCode::kUnknownInject, "unknown inject '" + deliver->inject_id + "'");
    }
    if (!std::holds_alternative<Manual>(def_.injects[*index].trigger)) {
      throw Error(ErrorCode::kNotManualInject,
                  "inject '" + deliver->inject_id + "' is not manually triggered");
    }
    if (state.IsDelivered(deliver->inject_id)) {
      throw Error(ErrorCode::kAlreadyDelivered,
                  "inject '" + deliver->inject_id + "' was already delivered");
    }
    std::erase_if(state.pending, [&](const PendingEvent& e) { return e.inject_index == *index; });
    Deliver(slot, *index, at, DeliveryCause::kInstructor, {}, out);
  } else {
    const auto& reply = std::get<ReplyInThread>(action);
    EmailThread* thread = state.FindThread(reply.thread_id);
    if (thread == nullptr) {
      throw Error(ErrorCode::kUnknownThread, "unknown thread '" + reply.thread_id + "'");
    }
    std::string sender(kInstructorSender);
    if (!reply.as_actor.empty()) {
      const ActorSpec* actor = def_.ResolveActor(reply.as_actor);
      if (actor == nullptr) {
        throw Error(ErrorCode::kInvalidArgument, "unknown actor '" + reply.as_actor + "'");
      }
      sender = actor->email;
    }
    if (reply.body.empty()) throw Error(ErrorCode::kInvalidArgument, "reply body is empty");
    EmailMessage message{sender, {state.team_id}, at, reply.body, Origin::kInstructor};
    thread->Append(message);
    Emit(slot, {state.team_id, at, EmailAppended{thread->id, thread->subject, std::move(message)}},
         out);
    Reevaluate(slot, at, out);
  }
  Drain(slot, at, out);
  return out;
}

TokenClaim ExerciseInstance::ClaimToken(const std::string& team_id, const std::string& trainee) {
  if (trainee.empty()) throw Error(ErrorCode::kInvalidArgument, "trainee id is empty");
  TeamSlot& slot = Slot(team_id);
  std::lock_guard lock(slot.mu);
  TeamState& state = slot.state;
  if (!state.token_holder) {
    state.token_holder = trainee;
    state.token_acquired_at = clock_.Now();
  }
  return {state.token_holder == trainee, state.token_holder};
}

bool ExerciseInstance::ReleaseToken(const std::string& team_id, const std::string& trainee) {
  TeamSlot& slot = Slot(team_id);
  std::lock_guard lock(slot.mu);
  TeamState& state = slot.state;
  if (state.token_holder != trainee) return false;
  state.token_holder.reset();
  state.token_acquired_at.reset();
  return true;
}

TeamState ExerciseInstance::Snapshot(const std::string& team_id) const {
  const TeamSlot& slot = Slot(team_id);
  std::lock_guard lock(slot.mu);
  return slot.state;
}

std::vector<eventlog::LogRecord> ExerciseInstance::Records(const std::string& team_id,
                                                           eventlog::Category category) const {
  const TeamSlot& slot = Slot(team_id);
  std::lock_guard lock(slot.mu);
  return slot.log.stream(category).records();
}

void ExerciseInstance::ExportTeamLogs(const std::string& team_id,
                                      const std::filesystem::path& directory) const {
  const TeamSlot& slot = Slot(team_id);
  std::lock_guard lock(slot.mu);
  eventlog::ExportTeamLogs(slot.log, directory);
}

std::unique_ptr<ExerciseInstance> StartInstance(ExerciseDefinition def,
                                                std::vector<std::string> team_ids,
                                                const Clock& clock, Effects* initial_effects) {
  auto instance = std::make_unique<ExerciseInstance>(std::move(def), std::move(team_ids), clock);
  Effects effects = instance->Start();
  if (initial_effects != nullptr) *initial_effects = std::move(effects);
  return instance;
}

}  // namespace ttx::engine

#include "ttx/engine/replay.hpp"

#include <sstream>

namespace ttx::engine {

using namespace ttx::definition;
using eventlog::Category;

TeamState ReplayFromLogs(const ExerciseDefinition& def, const eventlog::TeamLogData& logs) {
  TeamState state;
  state.team_id = logs.team_id;
  for (const auto& milestone : def.milestones) state.milestones[milestone.id] = {};

  for (const auto& record : logs.stream(Category::kInjectCategories)) {
    const auto& payload = std::get<eventlog::InjectPayload>(record.payload);
    if (payload.status == "delivered") state.delivered.push_back({payload.inject_id, record.timestamp});
  }

  for (const auto& record : logs.stream(Category::kEmails)) {
    const auto& payload = std::get<eventlog::EmailPayload>(record.payload);
    EmailThread* thread = state.FindThread(payload.thread_id);
    if (thread == nullptr) {
      state.threads.push_back({payload.thread_id, payload.subject, {}, {}});
      thread = &state.threads.back();
    }
    thread->Append({payload.sender, payload.recipients, record.timestamp, payload.body,
                    OriginFromString(payload.origin).value_or(Origin::kTeam)});
  }

  for (const auto& record : logs.stream(Category::kActionLogs)) {
    const auto& payload = std::get<eventlog::ActionPayload>(record.payload);
    if (payload.rejected) continue;
    ToolInvocation invocation;
    invocation.id = payload.invocation_id;
    invocation.tool_id = payload.tool_id;
    invocation.args = payload.args;
    invocation.classification = payload.classification == "correct"
                                    ? toolkit::Classification::Correct()
                                    : toolkit::Classification::Incorrect(payload.reason);
    invocation.output = payload.output;
    invocation.at = record.timestamp;
    invocation.trainee = payload.acting_trainee;

    // Only correct invocations apply side effects; blocks are the only
    // persistent ones.
    const ToolSpec* tool = def.FindTool(payload.tool_id);
    if (tool != nullptr && invocation.classification.correct &&
        tool->effect.kind == EffectKind::kRecordBlock) {
      const auto it = payload.args.find(tool->effect.argument);
      if (it != payload.args.end()) state.tool_state.blocked.insert({tool->id, it->second});
    }
    state.invocations.push_back(std::move(invocation));
  }

  for (const auto& record : logs.stream(Category::kMilestones)) {
    const auto& payload = std::get<eventlog::MilestonePayload>(record.payload);
    state.milestones[payload.milestone_id] = MilestoneStatus{true, payload.reached_at};
  }
  return state;
}

namespace {

template <typename T>
bool Check(const T& a, const T& b, const char* what, std::string* diff) {
  if (a == b) return true;
  if (diff != nullptr) *diff = std::string(what) + " differ";
  return false;
}

}  // namespace

bool SameHistory(const TeamState& a, const TeamState& b, std::string* diff) {
  if (a.team_id != b.team_id) {
    if (diff != nullptr) *diff = "team ids differ: " + a.team_id + " vs " + b.team_id;
    return false;
  }
  if (a.delivered.size() != b.delivered.size()) {
    if (diff != nullptr) {
      std::ostringstream out;
      out << "delivered inject count differs: " << a.delivered.size() << " vs "
          << b.delivered.size();
      *diff = out.str();
    }
    return false;
  }
  for (const auto& [id, status] : a.milestones) {
    const auto it = b.milestones.find(id);
    if (it == b.milestones.end() || it->second != status) {
      if (diff != nullptr) *diff = "milestone '" + id + "' differs";
      return false;
    }
  }
  return Check(a.milestones.size(), b.milestones.size(), "milestone sets", diff) &&
         Check(a.delivered, b.delivered, "delivered injects", diff) &&
         Check(a.threads, b.threads, "email threads", diff) &&
         Check(a.invocations, b.invocations, "tool invocations", diff) &&
         Check(a.tool_state, b.tool_state, "tool states", diff);
}

}  // namespace ttx::engine

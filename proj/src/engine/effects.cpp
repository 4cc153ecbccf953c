#include "ttx/engine/effects.hpp"

namespace ttx::engine {

using eventlog::ActionPayload;
using eventlog::EmailPayload;
using eventlog::InjectPayload;
using eventlog::LogRecord;
using eventlog::MilestonePayload;

LogRecord ToLogRecord(const Effect& effect, Timestamp exercise_start) {
  LogRecord record;
  record.timestamp = effect.at;
  record.team_id = effect.team_id;
  std::visit(
      [&](const auto& detail) {
        using T = std::decay_t<decltype(detail)>;
        if constexpr (std::is_same_v<T, InjectDelivered>) {
          record.payload = InjectPayload{detail.inject_id, std::string(ToString(detail.cause)),
                                         "delivered"};
        } else if constexpr (std::is_same_v<T, InjectDiscarded>) {
          record.payload = InjectPayload{detail.inject_id, std::string(ToString(detail.cause)),
                                         "discarded"};
        } else if constexpr (std::is_same_v<T, EmailAppended>) {
          record.payload = EmailPayload{detail.thread_id,
                                        detail.message.sender,
                                        detail.message.recipients,
                                        detail.subject,
                                        detail.message.body,
                                        std::string(ToString(detail.message.origin))};
        } else if constexpr (std::is_same_v<T, ToolInvoked>) {
          const auto& inv = detail.invocation;
          record.payload = ActionPayload{inv.id,
                                         inv.tool_id,
                                         inv.args,
                                         inv.classification.correct ? "correct" : "incorrect",
                                         inv.classification.reason,
                                         inv.output,
                                         inv.trainee,
                                         false};
        } else if constexpr (std::is_same_v<T, CommandRejected>) {
          record.payload = ActionPayload{detail.attempt_id, detail.tool_id,   detail.args,
                                         "not_classified",  detail.reason,    "",
                                         detail.trainee,    true};
        } else {
          record.payload = MilestonePayload{detail.milestone_id, effect.at, exercise_start};
        }
      },
      effect.detail);
  return record;
}

namespace {

std::string_view TypeName(const EffectDetail& detail) {
  static constexpr std::string_view kNames[] = {"inject_delivered", "inject_discarded",
                                                "email",            "tool_invoked",
                                                "command_rejected", "milestone_reached"};
  return kNames[detail.index()];
}

}  // namespace

nlohmann::ordered_json ToJson(const Effect& effect, Timestamp exercise_start) {
  nlohmann::ordered_json out;
  out["type"] = TypeName(effect.detail);
  const nlohmann::ordered_json record = eventlog::ToJson(ToLogRecord(effect, exercise_start));
  for (const auto& [key, value] : record.items()) out[key] = value;
  return out;
}

}  // namespace ttx::engine

#pragma once

#include <string>
#include <variant>
#include <vector>

#include "ttx/engine/team_state.hpp"
#include "ttx/eventlog/record.hpp"

namespace ttx::engine {

struct InjectDelivered {
  std::string inject_id;
  DeliveryCause cause;
};

// Pending at exercise end; never delivered.
struct InjectDiscarded {
  std::string inject_id;
  DeliveryCause cause;
};

struct EmailAppended {
  std::string thread_id;
  std::string subject;
  EmailMessage message;
};

struct ToolInvoked {
  ToolInvocation invocation;
};

// A mutating command from a trainee who does not hold the operator token.
struct CommandRejected {
  std::string attempt_id;
  std::string trainee;
  std::string tool_id;  // "email" for SendEmail
  toolkit::Arguments args;
  std::string reason;
};

struct MilestoneReached {
  std::string milestone_id;
};

using EffectDetail = std::variant<InjectDelivered, InjectDiscarded, EmailAppended, ToolInvoked,
                                  CommandRejected, MilestoneReached>;

// Every effect maps to exactly one log record.
struct Effect {
  std::string team_id;
  Timestamp at;
  EffectDetail detail;
};

using Effects = std::vector<Effect>;

eventlog::LogRecord ToLogRecord(const Effect& effect, Timestamp exercise_start);

// Compact JSON for push channels; mirrors the log record shape plus a `type`.
nlohmann::ordered_json ToJson(const Effect& effect, Timestamp exercise_start);

}  // namespace ttx::engine

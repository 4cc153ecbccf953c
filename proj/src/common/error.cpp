#include "ttx/common/error.hpp"

namespace ttx {

std::string_view ToString(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kInvalidDefinition: return "invalid_definition";
    case ErrorCode::kDuplicateTeam: return "duplicate_team";
    case ErrorCode::kUnknownTeam: return "unknown_team";
    case ErrorCode::kNotRunning: return "not_running";
    case ErrorCode::kExerciseEnded: return "exercise_ended";
    case ErrorCode::kTimeBackwards: return "time_backwards";
    case ErrorCode::kUnknownTool: return "unknown_tool";
    case ErrorCode::kToolLocked: return "tool_locked";
    case ErrorCode::kUnknownThread: return "unknown_thread";
    case ErrorCode::kUnknownInject: return "unknown_inject";
    case ErrorCode::kNotManualInject: return "not_manual_inject";
    case ErrorCode::kAlreadyDelivered: return "already_delivered";
    case ErrorCode::kUnknownMilestone: return "unknown_milestone";
    case ErrorCode::kOutOfOrder: return "out_of_order";
    case ErrorCode::kCategoryMismatch: return "category_mismatch";
    case ErrorCode::kUnauthorized: return "unauthorized";
    case ErrorCode::kForbidden: return "forbidden";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

}  // namespace ttx

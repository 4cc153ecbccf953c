#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ttx {

enum class ErrorCode {
  kInvalidArgument,
  kInvalidDefinition,
  kDuplicateTeam,
  kUnknownTeam,
  kNotRunning,
  kExerciseEnded,
  kTimeBackwards,
  kUnknownTool,
  kToolLocked,
  kUnknownThread,
  kUnknownInject,
  kNotManualInject,
  kAlreadyDelivered,
  kUnknownMilestone,
  kOutOfOrder,
  kCategoryMismatch,
  kUnauthorized,
  kForbidden,
  kIo,
};

std::string_view ToString(ErrorCode code);

// Precondition and contract violations across the library. Report-returning
// operations (parsing, validation, stream reading) never throw this.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ttx

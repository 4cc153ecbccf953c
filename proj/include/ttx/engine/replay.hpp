#pragma once

#include <string>

#include "ttx/definition/model.hpp"
#include "ttx/engine/team_state.hpp"
#include "ttx/eventlog/stream.hpp"

namespace ttx::engine {

// Rebuilds a team's history from its four streams: delivered injects,
// milestone statuses, threads, invocations and tool side effects. The operator
// token and the pending queue are not logged and come back empty.
TeamState ReplayFromLogs(const definition::ExerciseDefinition& def,
                         const eventlog::TeamLogData& logs);

// Compares the logged parts of two team states. On mismatch returns false and
// describes the first difference in `diff` (if given).
bool SameHistory(const TeamState& a, const TeamState& b, std::string* diff = nullptr);

}  // namespace ttx::engine

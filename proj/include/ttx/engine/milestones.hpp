#pragma once

#include <string>
#include <vector>

#include "ttx/definition/model.hpp"
#include "ttx/engine/team_state.hpp"

namespace ttx::engine {

// True if `condition` holds over the team's full history (deliveries,
// invocations, team-origin emails). Milestone statuses are not consulted.
bool ConditionHolds(const definition::ExerciseDefinition& def,
                    const definition::MilestoneCondition& condition, const TeamState& state);

// Ids of milestones not yet reached in `state` whose condition now holds, in
// definition order. Pure; the caller records the reach.
std::vector<std::string> EvaluateMilestones(const definition::ExerciseDefinition& def,
                                            const TeamState& state);

}  // namespace ttx::engine

#include "ttx/engine/milestones.hpp"

#include <algorithm>

#include "ttx/common/pattern.hpp"
#include "ttx/common/strings.hpp"

namespace ttx::engine {

using namespace ttx::definition;

namespace {

bool Holds(const ExerciseDefinition&, const ToolUsed& c, const TeamState& state) {
  return std::any_of(state.invocations.begin(), state.invocations.end(),
                     [&](const ToolInvocation& inv) {
                       if (inv.tool_id != c.tool) return false;
                       if (c.correct_only && !inv.classification.correct) return false;
                       for (const auto& [arg, pattern] : c.argument_patterns) {
                         const auto it = inv.args.find(arg);
                         if (it == inv.args.end() || !PatternMatches(pattern, it->second)) {
                           return false;
                         }
                       }
                       return true;
                     });
}

bool RecipientMatches(const ExerciseDefinition& def, const EmailSent& c,
                      const std::string& recipient) {
  if (!c.actor.empty()) {
    const ActorSpec* actor = def.FindActor(c.actor);
    return actor != nullptr && EqualsIgnoreCase(actor->email, recipient);
  }
  return PatternMatches(c.address_pattern, recipient);
}

bool Holds(const ExerciseDefinition& def, const EmailSent& c, const TeamState& state) {
  for (const auto& thread : state.threads) {
    for (const auto& message : thread.messages) {
      if (message.origin != Origin::kTeam) continue;
      if (!MatchesAnyKeyword(message.body, c.keywords)) continue;
      for (const auto& recipient : message.recipients) {
        if (RecipientMatches(def, c, recipient)) return true;
      }
    }
  }
  return false;
}

}  // namespace

bool ConditionHolds(const ExerciseDefinition& def, const MilestoneCondition& condition,
                    const TeamState& state) {
  return std::visit(
      [&](const auto& node) -> bool {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, InjectReceived>) {
          return state.IsDelivered(node.inject);
        } else if constexpr (std::is_same_v<T, AllOf>) {
          return std::all_of(node.conditions.begin(), node.conditions.end(),
                             [&](const auto& child) { return ConditionHolds(def, child, state); });
        } else if constexpr (std::is_same_v<T, AnyOf>) {
          return std::any_of(node.conditions.begin(), node.conditions.end(),
                             [&](const auto& child) { return ConditionHolds(def, child, state); });
        } else {
          return Holds(def, node, state);
        }
      },
      condition.node);
}

std::vector<std::string> EvaluateMilestones(const ExerciseDefinition& def,
                                            const TeamState& state) {
  std::vector<std::string> reached;
  for (const auto& milestone : def.milestones) {
    if (state.IsReached(milestone.id)) continue;
    if (ConditionHolds(def, milestone.condition, state)) reached.push_back(milestone.id);
  }
  return reached;
}

}  // namespace ttx::engine

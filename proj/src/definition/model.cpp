#include "ttx/definition/model.hpp"

#include <algorithm>

#include "ttx/common/strings.hpp"

namespace ttx::definition {

namespace {

template <typename T>
const T* FindById(const std::vector<T>& items, std::string_view id) {
  const auto it =
      std::find_if(items.begin(), items.end(), [&](const T& item) { return item.id == id; });
  return it == items.end() ? nullptr : &*it;
}

std::string_view StripTrailingSlash(std::string_view url) {
  if (!url.empty() && url.back() == '/') url.remove_suffix(1);
  return url;
}

}  // namespace

TriggerKind KindOf(const TriggerRule& rule) {
  return static_cast<TriggerKind>(rule.index());
}

std::string_view ToString(TriggerKind kind) {
  switch (kind) {
    case TriggerKind::kAtTime: return "at_time";
    case TriggerKind::kAfterMilestone: return "after_milestone";
    case TriggerKind::kIfMilestoneMissing: return "if_milestone_missing";
    case TriggerKind::kOnEmailTo: return "on_email_to";
    case TriggerKind::kManual: return "manual";
  }
  return "manual";
}

std::optional<TriggerKind> TriggerKindFromString(std::string_view text) {
  for (auto kind : {TriggerKind::kAtTime, TriggerKind::kAfterMilestone,
                    TriggerKind::kIfMilestoneMissing, TriggerKind::kOnEmailTo,
                    TriggerKind::kManual}) {
    if (ToString(kind) == text) return kind;
  }
  return std::nullopt;
}

std::string_view ToString(EffectKind kind) {
  switch (kind) {
    case EffectKind::kNone: return "none";
    case EffectKind::kRecordBlock: return "record_block";
    case EffectKind::kReturnPage: return "return_page";
    case EffectKind::kReturnLookup: return "return_lookup";
  }
  return "none";
}

std::optional<EffectKind> EffectKindFromString(std::string_view text) {
  for (auto kind : {EffectKind::kNone, EffectKind::kRecordBlock, EffectKind::kReturnPage,
                    EffectKind::kReturnLookup}) {
    if (ToString(kind) == text) return kind;
  }
  return std::nullopt;
}

const ToolArgument* ToolSpec::FindArgument(std::string_view arg_name) const {
  const auto it = std::find_if(arguments.begin(), arguments.end(),
                               [&](const ToolArgument& arg) { return arg.name == arg_name; });
  return it == arguments.end() ? nullptr : &*it;
}

int ConditionDepth(const MilestoneCondition& condition) {
  return std::visit(
      [](const auto& node) -> int {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, AllOf> || std::is_same_v<T, AnyOf>) {
          int deepest = 0;
          for (const auto& child : node.conditions) {
            deepest = std::max(deepest, ConditionDepth(child));
          }
          return 1 + deepest;
        } else {
          return 1;
        }
      },
      condition.node);
}

const InjectSpec* ExerciseDefinition::FindInject(std::string_view id) const {
  return FindById(injects, id);
}

std::optional<std::size_t> ExerciseDefinition::InjectIndex(std::string_view id) const {
  for (std::size_t i = 0; i < injects.size(); ++i) {
    if (injects[i].id == id) return i;
  }
  return std::nullopt;
}

const ToolSpec* ExerciseDefinition::FindTool(std::string_view id) const {
  return FindById(tools, id);
}

const MilestoneSpec* ExerciseDefinition::FindMilestone(std::string_view id) const {
  return FindById(milestones, id);
}

const ActorSpec* ExerciseDefinition::FindActor(std::string_view id) const {
  return FindById(actors, id);
}

const ActorSpec* ExerciseDefinition::ResolveActor(std::string_view id_or_address) const {
  if (const ActorSpec* actor = FindById(actors, id_or_address)) return actor;
  const auto it = std::find_if(actors.begin(), actors.end(), [&](const ActorSpec& actor) {
    return EqualsIgnoreCase(actor.email, id_or_address);
  });
  return it == actors.end() ? nullptr : &*it;
}

const Page* ExerciseDefinition::FindPage(std::string_view url) const {
  const std::string_view wanted = StripTrailingSlash(url);
  const auto it = std::find_if(pages.begin(), pages.end(), [&](const Page& page) {
    return StripTrailingSlash(page.url) == wanted;
  });
  return it == pages.end() ? nullptr : &*it;
}

std::string Diagnostic::ToString() const {
  std::string out;
  if (line) out += "line " + std::to_string(*line) + ": ";
  if (!path.empty()) out += path + ": ";
  out += message;
  return out;
}

}  // namespace ttx::definition

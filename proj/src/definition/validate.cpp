#include "ttx/definition/validate.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <set>

#include "ttx/common/pattern.hpp"
#include "ttx/common/strings.hpp"
#include "ttx/toolkit/toolkit.hpp"

namespace ttx::definition {

namespace {

bool IsIdentifier(std::string_view id) {
  return !id.empty() && std::all_of(id.begin(), id.end(), [](unsigned char c) {
    return std::isalnum(c) != 0 || c == '_' || c == '-';
  });
}

class Checker {
 public:
  Checker(const ExerciseDefinition& def, ValidationReport& report) : def_(def), report_(report) {}

  void Run() {
    CheckExercise();
    CheckUniqueIds();
    for (const auto& inject : def_.injects) CheckInject(inject);
    for (const auto& tool : def_.tools) CheckTool(tool);
    for (const auto& milestone : def_.milestones) CheckMilestone(milestone);
    for (const auto& actor : def_.actors) CheckActor(actor);
    CheckPages();
  }

 private:
  void Fail(std::string path, std::string message) {
    report_.errors.push_back({std::move(path), std::nullopt, std::move(message)});
  }

  void CheckExercise() {
    if (def_.name.empty()) Fail("exercise.name", "must not be empty");
    if (def_.duration_minutes <= 0) Fail("exercise.duration_minutes", "must be a positive integer");
  }

  template <typename T>
  void CheckIds(const std::vector<T>& items, const std::string& section) {
    std::set<std::string> seen;
    for (std::size_t i = 0; i < items.size(); ++i) {
      const std::string& id = items[i].id;
      if (!IsIdentifier(id)) {
        Fail(section + "[" + std::to_string(i) + "].id",
             "invalid identifier '" + id + "' (letters, digits, '_' and '-' only)");
      } else if (!seen.insert(id).second) {
        Fail(section + "." + id, "duplicate id '" + id + "'");
      }
    }
  }

  void CheckUniqueIds() {
    CheckIds(def_.injects, "injects");
    CheckIds(def_.tools, "tools");
    CheckIds(def_.milestones, "milestones");
    CheckIds(def_.actors, "actors");
  }

  void CheckMinute(const std::string& path, std::int64_t minute, const char* what) {
    if (minute < 0) {
      Fail(path, std::string(what) + " must not be negative");
    } else if (minute > def_.duration_minutes) {
      Fail(path, std::string(what) + " exceeds duration (" + std::to_string(minute) + " > " +
                     std::to_string(def_.duration_minutes) + ")");
    }
  }

  void CheckDelay(const std::string& path, std::int64_t delay) {
    if (delay < 0) Fail(path, "delay must not be negative");
  }

  void CheckMilestoneRef(const std::string& path, const std::string& id) {
    if (def_.FindMilestone(id) == nullptr) Fail(path, "unknown milestone '" + id + "'");
  }

  void CheckActorRef(const std::string& path, const std::string& id) {
    if (def_.FindActor(id) == nullptr) Fail(path, "unknown actor '" + id + "'");
  }

  void CheckInjectRef(const std::string& path, const std::string& id) {
    if (def_.FindInject(id) == nullptr) Fail(path, "unknown inject '" + id + "'");
  }

  void CheckInject(const InjectSpec& inject) {
    const std::string path = "injects." + inject.id;
    if (inject.body.empty()) Fail(path + ".body", "must not be empty");
    if (inject.sender != kSystemSender && def_.FindActor(inject.sender) == nullptr) {
      Fail(path + ".sender", "unknown actor '" + inject.sender + "' (use an actor id or 'system')");
    }
    const std::string trigger = path + ".trigger";
    std::visit(
        [&](const auto& rule) {
          using T = std::decay_t<decltype(rule)>;
          if constexpr (std::is_same_v<T, AtTime>) {
            CheckMinute(trigger + ".minute", rule.minute, "offset");
          } else if constexpr (std::is_same_v<T, AfterMilestone>) {
            CheckMilestoneRef(trigger + ".milestone", rule.milestone);
            CheckDelay(trigger + ".delay_minutes", rule.delay_minutes);
          } else if constexpr (std::is_same_v<T, IfMilestoneMissing>) {
            CheckMilestoneRef(trigger + ".milestone", rule.milestone);
            CheckMinute(trigger + ".deadline_minute", rule.deadline_minute, "deadline");
          } else if constexpr (std::is_same_v<T, OnEmailTo>) {
            CheckActorRef(trigger + ".actor", rule.actor);
            CheckDelay(trigger + ".delay_minutes", rule.delay_minutes);
          }
        },
        inject.trigger);
  }

  void CheckTool(const ToolSpec& tool) {
    const std::string path = "tools." + tool.id;
    if (tool.name.empty()) Fail(path + ".name", "must not be empty");
    std::set<std::string> names;
    for (const auto& arg : tool.arguments) {
      const std::string arg_path = path + ".arguments." + arg.name;
      if (!IsIdentifier(arg.name)) {
        Fail(path + ".arguments", "invalid argument name '" + arg.name + "'");
      } else if (!names.insert(arg.name).second) {
        Fail(arg_path, "duplicate argument name '" + arg.name + "'");
      }
      if (arg.name == toolkit::kResultPlaceholder) {
        Fail(arg_path, "argument name 'result' is reserved");
      }
      if (const auto error = PatternError(arg.pattern)) {
        Fail(arg_path + ".pattern", "pattern does not compile: " + *error);
      }
    }
    const bool has_result = tool.effect.kind == EffectKind::kReturnLookup ||
                            tool.effect.kind == EffectKind::kReturnPage;
    for (const auto& name : toolkit::TemplatePlaceholders(tool.response_template)) {
      if (name == toolkit::kResultPlaceholder && has_result) continue;
      if (tool.FindArgument(name) == nullptr) {
        Fail(path + ".response", "placeholder '{{" + name + "}}' is not a declared argument");
      }
    }
    for (const auto& name : toolkit::TemplatePlaceholders(tool.effect.not_found)) {
      if (tool.FindArgument(name) == nullptr) {
        Fail(path + ".effect.not_found",
             "placeholder '{{" + name + "}}' is not a declared argument");
      }
    }
    if (tool.response_template.empty() && !has_result) {
      Fail(path + ".response", "must not be empty for tools without a page or lookup effect");
    }
    if (tool.effect.kind != EffectKind::kNone) {
      const ToolArgument* keyed = tool.FindArgument(tool.effect.argument);
      if (keyed == nullptr) {
        Fail(path + ".effect.argument",
             "effect argument '" + tool.effect.argument + "' is not a declared argument");
      } else if (!keyed->required) {
        Fail(path + ".effect.argument", "effect argument '" + keyed->name + "' must be required");
      }
    }
    if (!tool.unlocked_by.empty()) CheckInjectRef(path + ".unlocked_by", tool.unlocked_by);
  }

  void CheckCondition(const MilestoneCondition& condition, const std::string& path, int depth) {
    if (depth > kMaxConditionDepth) {
      Fail(path, "condition nesting exceeds depth " + std::to_string(kMaxConditionDepth));
      return;
    }
    std::visit(
        [&](const auto& node) {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, ToolUsed>) {
            const ToolSpec* tool = def_.FindTool(node.tool);
            if (tool == nullptr) {
              Fail(path + ".tool_used", "unknown tool '" + node.tool + "'");
              return;
            }
            for (const auto& [arg, pattern] : node.argument_patterns) {
              if (tool->FindArgument(arg) == nullptr) {
                Fail(path + ".arguments",
                     "tool '" + node.tool + "' has no argument '" + arg + "'");
              }
              if (const auto error = PatternError(pattern)) {
                Fail(path + ".arguments." + arg, "pattern does not compile: " + *error);
              }
            }
          } else if constexpr (std::is_same_v<T, EmailSent>) {
            if (node.actor.empty() == node.address_pattern.empty()) {
              Fail(path, "email condition needs exactly one of an actor or an address pattern");
            } else if (!node.actor.empty()) {
              CheckActorRef(path + ".email_sent", node.actor);
            } else if (const auto error = PatternError(node.address_pattern)) {
              Fail(path + ".email_to_pattern", "pattern does not compile: " + *error);
            }
          } else if constexpr (std::is_same_v<T, InjectReceived>) {
            CheckInjectRef(path + ".inject_received", node.inject);
          } else {
            const char* key = std::is_same_v<T, AllOf> ? "all_of" : "any_of";
            if (node.conditions.empty()) Fail(path + "." + key, "list must not be empty");
            for (std::size_t i = 0; i < node.conditions.size(); ++i) {
              CheckCondition(node.conditions[i],
                             path + "." + key + "[" + std::to_string(i) + "]", depth + 1);
            }
          }
        },
        condition.node);
  }

  void CheckMilestone(const MilestoneSpec& milestone) {
    CheckCondition(milestone.condition, "milestones." + milestone.id + ".condition", 1);
  }

  void CheckActor(const ActorSpec& actor) {
    const std::string path = "actors." + actor.id;
    if (actor.email.empty()) {
      Fail(path + ".email", "must not be empty");
    } else if (!emails_.emplace(ToLower(actor.email), actor.id).second) {
      Fail(path + ".email", "email address '" + actor.email + "' already used by actor '" +
                                emails_[ToLower(actor.email)] + "'");
    }
    for (std::size_t i = 0; i < actor.auto_replies.size(); ++i) {
      const auto& rule = actor.auto_replies[i];
      const std::string rule_path = path + ".auto_replies[" + std::to_string(i) + "]";
      CheckDelay(rule_path + ".delay_minutes", rule.delay_minutes);
      const InjectSpec* reply = def_.FindInject(rule.reply_inject);
      if (reply == nullptr) {
        Fail(rule_path + ".reply", "unknown inject '" + rule.reply_inject + "'");
      } else if (const auto kind = KindOf(reply->trigger);
                 kind != TriggerKind::kManual && kind != TriggerKind::kOnEmailTo) {
        Fail(rule_path + ".reply", "reply inject '" + rule.reply_inject +
                                       "' must have a manual or on_email_to trigger");
      }
    }
  }

  void CheckPages() {
    std::set<std::string> seen;
    for (const auto& page : def_.pages) {
      if (page.url.empty()) {
        Fail("pages", "page url must not be empty");
      } else if (!seen.insert(page.url).second) {
        Fail("pages." + page.url, "duplicate page url");
      }
    }
  }

  const ExerciseDefinition& def_;
  ValidationReport& report_;
  std::map<std::string, std::string> emails_;
};

// One fixpoint pass: which injects can be delivered, which tools become
// available, which milestones can be satisfied.
struct Reach {
  std::vector<bool> injects;
  std::vector<bool> tools;
  std::vector<bool> milestones;
};

Reach ComputeReach(const ExerciseDefinition& def, bool with_manual) {
  Reach reach{std::vector<bool>(def.injects.size()), std::vector<bool>(def.tools.size()),
              std::vector<bool>(def.milestones.size())};
  std::set<std::string> reply_targets;
  for (const auto& actor : def.actors) {
    for (const auto& rule : actor.auto_replies) reply_targets.insert(rule.reply_inject);
  }
  for (std::size_t i = 0; i < def.injects.size(); ++i) {
    switch (KindOf(def.injects[i].trigger)) {
      case TriggerKind::kAtTime:
      case TriggerKind::kIfMilestoneMissing:
      case TriggerKind::kOnEmailTo:
        reach.injects[i] = true;
        break;
      case TriggerKind::kManual:
        reach.injects[i] = with_manual || reply_targets.count(def.injects[i].id) > 0;
        break;
      case TriggerKind::kAfterMilestone:
        break;
    }
  }

  auto inject_reached = [&](const std::string& id) {
    const auto index = def.InjectIndex(id);
    return index && reach.injects[*index];
  };
  auto tool_available = [&](const std::string& id) {
    for (std::size_t i = 0; i < def.tools.size(); ++i) {
      if (def.tools[i].id == id) return static_cast<bool>(reach.tools[i]);
    }
    return false;
  };
  std::function<bool(const MilestoneCondition&)> satisfiable =
      [&](const MilestoneCondition& condition) -> bool {
    return std::visit(
        [&](const auto& node) -> bool {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, ToolUsed>) {
            return tool_available(node.tool);
          } else if constexpr (std::is_same_v<T, EmailSent>) {
            return true;
          } else if constexpr (std::is_same_v<T, InjectReceived>) {
            return inject_reached(node.inject);
          } else if constexpr (std::is_same_v<T, AllOf>) {
            return std::all_of(node.conditions.begin(), node.conditions.end(), satisfiable);
          } else {
            return std::any_of(node.conditions.begin(), node.conditions.end(), satisfiable);
          }
        },
        condition.node);
  };

  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < def.tools.size(); ++i) {
      if (!reach.tools[i] &&
          (def.tools[i].unlocked_by.empty() || inject_reached(def.tools[i].unlocked_by))) {
        reach.tools[i] = true;
        changed = true;
      }
    }
    for (std::size_t i = 0; i < def.milestones.size(); ++i) {
      if (!reach.milestones[i] && satisfiable(def.milestones[i].condition)) {
        reach.milestones[i] = true;
        changed = true;
      }
    }
    for (std::size_t i = 0; i < def.injects.size(); ++i) {
      if (reach.injects[i]) continue;
      if (const auto* rule = std::get_if<AfterMilestone>(&def.injects[i].trigger)) {
        for (std::size_t m = 0; m < def.milestones.size(); ++m) {
          if (def.milestones[m].id == rule->milestone && reach.milestones[m]) {
            reach.injects[i] = true;
            changed = true;
          }
        }
      }
    }
  }
  return reach;
}

}  // namespace

ReachabilityReport LintReachability(const ExerciseDefinition& def) {
  const Reach automatic = ComputeReach(def, false);
  const Reach assisted = ComputeReach(def, true);
  ReachabilityReport report;
  for (std::size_t i = 0; i < def.injects.size(); ++i) {
    if (!assisted.injects[i]) {
      report.unreachable_injects.push_back(def.injects[i].id);
    } else if (!automatic.injects[i]) {
      report.manual_only_injects.push_back(def.injects[i].id);
    }
  }
  for (std::size_t i = 0; i < def.milestones.size(); ++i) {
    if (!assisted.milestones[i]) {
      report.unsatisfiable_milestones.push_back(def.milestones[i].id);
    } else if (!automatic.milestones[i]) {
      report.manual_only_milestones.push_back(def.milestones[i].id);
    }
  }
  for (std::size_t i = 0; i < def.tools.size(); ++i) {
    if (!assisted.tools[i]) report.locked_tools.push_back(def.tools[i].id);
  }
  return report;
}

ValidationReport Validate(const ExerciseDefinition& def) {
  ValidationReport report;
  Checker(def, report).Run();
  if (!report.errors.empty()) return report;

  const ReachabilityReport reach = LintReachability(def);
  for (const auto& id : reach.unreachable_injects) {
    report.warnings.push_back({"injects." + id, std::nullopt, "inject unreachable"});
  }
  for (const auto& id : reach.unsatisfiable_milestones) {
    report.warnings.push_back({"milestones." + id, std::nullopt, "milestone unreachable"});
  }
  for (const auto& id : reach.locked_tools) {
    report.warnings.push_back({"tools." + id, std::nullopt, "tool never granted to teams"});
  }
  return report;
}

}  // namespace ttx::definition

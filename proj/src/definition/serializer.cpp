#include <yaml-cpp/yaml.h>

#include "ttx/definition/parser.hpp"

namespace ttx::definition {

namespace {

// Every string is double-quoted so that values such as "true", "~" or
// multi-line bodies come back byte-identical.
void Str(YAML::Emitter& out, const std::string& value) { out << YAML::DoubleQuoted << value; }

void KeyStr(YAML::Emitter& out, const char* key, const std::string& value) {
  out << YAML::Key << key << YAML::Value;
  Str(out, value);
}

void KeyInt(YAML::Emitter& out, const char* key, std::int64_t value) {
  out << YAML::Key << key << YAML::Value << value;
}

void EmitPairs(YAML::Emitter& out, const OrderedPairs& pairs) {
  out << YAML::BeginMap;
  for (const auto& [key, value] : pairs) {
    out << YAML::Key;
    Str(out, key);
    out << YAML::Value;
    Str(out, value);
  }
  out << YAML::EndMap;
}

void EmitStrings(YAML::Emitter& out, const std::vector<std::string>& values) {
  out << YAML::Flow << YAML::BeginSeq;
  for (const auto& value : values) Str(out, value);
  out << YAML::EndSeq;
}

void EmitTrigger(YAML::Emitter& out, const TriggerRule& trigger) {
  out << YAML::BeginMap;
  KeyStr(out, "type", std::string(ToString(KindOf(trigger))));
  std::visit(
      [&](const auto& rule) {
        using T = std::decay_t<decltype(rule)>;
        if constexpr (std::is_same_v<T, AtTime>) {
          KeyInt(out, "minute", rule.minute);
        } else if constexpr (std::is_same_v<T, AfterMilestone>) {
          KeyStr(out, "milestone", rule.milestone);
          KeyInt(out, "delay_minutes", rule.delay_minutes);
        } else if constexpr (std::is_same_v<T, IfMilestoneMissing>) {
          KeyStr(out, "milestone", rule.milestone);
          KeyInt(out, "deadline_minute", rule.deadline_minute);
        } else if constexpr (std::is_same_v<T, OnEmailTo>) {
          KeyStr(out, "actor", rule.actor);
          KeyInt(out, "delay_minutes", rule.delay_minutes);
        }
      },
      trigger);
  out << YAML::EndMap;
}

void EmitCondition(YAML::Emitter& out, const MilestoneCondition& condition) {
  out << YAML::BeginMap;
  std::visit(
      [&](const auto& node) {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, ToolUsed>) {
          KeyStr(out, "tool_used", node.tool);
          if (!node.argument_patterns.empty()) {
            out << YAML::Key << "arguments" << YAML::Value;
            EmitPairs(out, node.argument_patterns);
          }
          out << YAML::Key << "correct_only" << YAML::Value << node.correct_only;
        } else if constexpr (std::is_same_v<T, EmailSent>) {
          if (!node.address_pattern.empty()) {
            KeyStr(out, "email_to_pattern", node.address_pattern);
          } else {
            KeyStr(out, "email_sent", node.actor);
          }
          if (!node.keywords.empty()) {
            out << YAML::Key << "keywords" << YAML::Value;
            EmitStrings(out, node.keywords);
          }
        } else if constexpr (std::is_same_v<T, InjectReceived>) {
          KeyStr(out, "inject_received", node.inject);
        } else {
          out << YAML::Key << (std::is_same_v<T, AllOf> ? "all_of" : "any_of") << YAML::Value
              << YAML::BeginSeq;
          for (const auto& child : node.conditions) EmitCondition(out, child);
          out << YAML::EndSeq;
        }
      },
      condition.node);
  out << YAML::EndMap;
}

void EmitTool(YAML::Emitter& out, const ToolSpec& tool) {
  out << YAML::BeginMap;
  KeyStr(out, "id", tool.id);
  KeyStr(out, "name", tool.name);
  if (!tool.description.empty()) KeyStr(out, "description", tool.description);
  out << YAML::Key << "arguments" << YAML::Value << YAML::BeginSeq;
  for (const auto& arg : tool.arguments) {
    out << YAML::BeginMap;
    KeyStr(out, "name", arg.name);
    KeyStr(out, "pattern", arg.pattern);
    out << YAML::Key << "required" << YAML::Value << arg.required;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  KeyStr(out, "response", tool.response_template);
  if (tool.effect.kind != EffectKind::kNone || !tool.effect.argument.empty() ||
      !tool.effect.table.empty() || !tool.effect.not_found.empty()) {
    out << YAML::Key << "effect" << YAML::Value << YAML::BeginMap;
    KeyStr(out, "type", std::string(ToString(tool.effect.kind)));
    if (!tool.effect.argument.empty()) KeyStr(out, "argument", tool.effect.argument);
    if (!tool.effect.table.empty()) {
      out << YAML::Key << "table" << YAML::Value;
      EmitPairs(out, tool.effect.table);
    }
    if (!tool.effect.not_found.empty()) KeyStr(out, "not_found", tool.effect.not_found);
    out << YAML::EndMap;
  }
  if (!tool.unlocked_by.empty()) KeyStr(out, "unlocked_by", tool.unlocked_by);
  out << YAML::EndMap;
}

}  // namespace

std::string SerializeDefinition(const ExerciseDefinition& def) {
  YAML::Emitter out;
  out << YAML::BeginMap;

  out << YAML::Key << "exercise" << YAML::Value << YAML::BeginMap;
  KeyStr(out, "name", def.name);
  KeyInt(out, "duration_minutes", def.duration_minutes);
  out << YAML::EndMap;

  out << YAML::Key << "injects" << YAML::Value << YAML::BeginSeq;
  for (const auto& inject : def.injects) {
    out << YAML::BeginMap;
    KeyStr(out, "id", inject.id);
    KeyStr(out, "sender", inject.sender);
    KeyStr(out, "subject", inject.subject);
    KeyStr(out, "body", inject.body);
    out << YAML::Key << "trigger" << YAML::Value;
    EmitTrigger(out, inject.trigger);
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  out << YAML::Key << "tools" << YAML::Value << YAML::BeginSeq;
  for (const auto& tool : def.tools) EmitTool(out, tool);
  out << YAML::EndSeq;

  out << YAML::Key << "milestones" << YAML::Value << YAML::BeginSeq;
  for (const auto& milestone : def.milestones) {
    out << YAML::BeginMap;
    KeyStr(out, "id", milestone.id);
    KeyStr(out, "description", milestone.description);
    out << YAML::Key << "condition" << YAML::Value;
    EmitCondition(out, milestone.condition);
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  out << YAML::Key << "actors" << YAML::Value << YAML::BeginSeq;
  for (const auto& actor : def.actors) {
    out << YAML::BeginMap;
    KeyStr(out, "id", actor.id);
    KeyStr(out, "email", actor.email);
    KeyStr(out, "name", actor.name);
    if (!actor.auto_replies.empty()) {
      out << YAML::Key << "auto_replies" << YAML::Value << YAML::BeginSeq;
      for (const auto& rule : actor.auto_replies) {
        out << YAML::BeginMap;
        out << YAML::Key << "keywords" << YAML::Value;
        EmitStrings(out, rule.keywords);
        KeyStr(out, "reply", rule.reply_inject);
        KeyInt(out, "delay_minutes", rule.delay_minutes);
        out << YAML::EndMap;
      }
      out << YAML::EndSeq;
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  if (!def.pages.empty()) {
    out << YAML::Key << "pages" << YAML::Value << YAML::BeginMap;
    for (const auto& page : def.pages) {
      out << YAML::Key;
      Str(out, page.url);
      out << YAML::Value;
      Str(out, page.body);
    }
    out << YAML::EndMap;
  }

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace ttx::definition

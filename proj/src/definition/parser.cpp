#include "ttx/definition/parser.hpp"

#include <yaml-cpp/eventhandler.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "ttx/common/error.hpp"
#include "ttx/definition/validate.hpp"
#include "ttx/toolkit/toolkit.hpp"

namespace ttx::definition {

namespace {

int LineOf(const YAML::Mark& mark) { return mark.line >= 0 ? mark.line + 1 : 0; }

// Rejects the parts of YAML outside the supported subset. yaml-cpp resolves
// aliases and silently keeps one of two duplicate keys, so both have to be
// caught on the raw event stream before building the node tree.
class SubsetChecker : public YAML::EventHandler {
 public:
  explicit SubsetChecker(std::vector<Diagnostic>& errors) : errors_(errors) {}

  void OnDocumentStart(const YAML::Mark& mark) override {
    if (++documents_ > 1) Fail(mark, "multiple documents are not supported");
  }
  void OnDocumentEnd() override {}

  void OnNull(const YAML::Mark& mark, YAML::anchor_t anchor) override {
    BeforeNode(mark, anchor, "~", true);
  }
  void OnAlias(const YAML::Mark& mark, YAML::anchor_t) override {
    Fail(mark, "aliases are not supported");
    BeforeNode(mark, YAML::NullAnchor, "*alias", true);
  }
  void OnScalar(const YAML::Mark& mark, const std::string&, YAML::anchor_t anchor,
                const std::string& value) override {
    BeforeNode(mark, anchor, value, true);
  }
  void OnSequenceStart(const YAML::Mark& mark, const std::string&, YAML::anchor_t anchor,
                       YAML::EmitterStyle::value) override {
    BeforeNode(mark, anchor, {}, false);
    stack_.push_back({false, true, {}});
  }
  void OnSequenceEnd() override { stack_.pop_back(); }
  void OnMapStart(const YAML::Mark& mark, const std::string&, YAML::anchor_t anchor,
                  YAML::EmitterStyle::value) override {
    BeforeNode(mark, anchor, {}, false);
    stack_.push_back({true, true, {}});
  }
  void OnMapEnd() override { stack_.pop_back(); }

 private:
  struct Frame {
    bool is_map;
    bool expecting_key;
    std::set<std::string> keys;
  };

  void Fail(const YAML::Mark& mark, std::string message) {
    errors_.push_back({"", LineOf(mark), std::move(message)});
  }

  void BeforeNode(const YAML::Mark& mark, YAML::anchor_t anchor, const std::string& value,
                  bool is_scalar) {
    if (anchor != YAML::NullAnchor) Fail(mark, "anchors are not supported");
    if (stack_.empty() || !stack_.back().is_map) return;
    Frame& frame = stack_.back();
    if (frame.expecting_key) {
      if (!is_scalar) {
        Fail(mark, "mapping keys must be scalars");
      } else if (!frame.keys.insert(value).second) {
        Fail(mark, "duplicate key '" + value + "'");
      }
    }
    frame.expecting_key = !frame.expecting_key;
  }

  std::vector<Diagnostic>& errors_;
  std::vector<Frame> stack_;
  int documents_ = 0;
};

// Walks the node tree, filling the model and recording the source line of
// every field path so later validation errors can be located.
class Reader {
 public:
  Reader(std::vector<Diagnostic>& errors, std::map<std::string, int>& lines)
      : errors_(errors), lines_(lines) {}

  ExerciseDefinition ReadDocument(const YAML::Node& root) {
    ExerciseDefinition def;
    if (!root.IsMap()) {
      Error("", root, "document must be a mapping");
      return def;
    }
    static const std::set<std::string> kTopLevel = {"exercise", "injects",   "tools",
                                                    "milestones", "actors", "pages"};
    for (const auto& entry : root) {
      const auto key = entry.first.as<std::string>();
      if (kTopLevel.count(key) == 0) {
        Error(key, entry.first, "unknown top-level key '" + key + "'");
      }
    }
    ReadExercise(root, def);
    if (const auto node = root["injects"]) {
      ForEachItem(node, "injects", [&](const YAML::Node& item, const std::string& path) {
        def.injects.push_back(ReadInject(item, path));
      });
    }
    if (const auto node = root["tools"]) {
      ForEachItem(node, "tools", [&](const YAML::Node& item, const std::string& path) {
        if (auto tool = ReadTool(item, path)) def.tools.push_back(std::move(*tool));
      });
    }
    if (const auto node = root["milestones"]) {
      ForEachItem(node, "milestones", [&](const YAML::Node& item, const std::string& path) {
        def.milestones.push_back(ReadMilestone(item, path));
      });
    }
    if (const auto node = root["actors"]) {
      ForEachItem(node, "actors", [&](const YAML::Node& item, const std::string& path) {
        def.actors.push_back(ReadActor(item, path));
      });
    }
    if (const auto node = root["pages"]) ReadPages(node, def);
    return def;
  }

 private:
  void Error(const std::string& path, const YAML::Node& node, std::string message) {
    errors_.push_back({path, LineOf(node.Mark()), std::move(message)});
  }

  void Note(const std::string& path, const YAML::Node& node) {
    lines_.emplace(path, LineOf(node.Mark()));
  }

  bool ExpectMap(const YAML::Node& node, const std::string& path) {
    if (node.IsMap()) return true;
    Error(path, node, "expected a mapping");
    return false;
  }

  void CheckKeys(const YAML::Node& node, const std::string& path,
                 std::initializer_list<std::string_view> allowed) {
    for (const auto& entry : node) {
      const auto key = entry.first.as<std::string>();
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        Error(path, entry.first, "unknown key '" + key + "'");
      }
    }
  }

  std::string ReadString(const YAML::Node& parent, const char* key, const std::string& path,
                         bool required, std::string fallback = {}) {
    const std::string field_path = path + "." + key;
    const YAML::Node node = parent[key];
    if (!node) {
      if (required) Error(field_path, parent, std::string("missing required field '") + key + "'");
      return fallback;
    }
    Note(field_path, node);
    if (!node.IsScalar()) {
      Error(field_path, node, "must be a string");
      return fallback;
    }
    return node.as<std::string>();
  }

  std::int64_t ReadInteger(const YAML::Node& parent, const char* key, const std::string& path,
                           bool required, std::int64_t fallback = 0) {
    const std::string field_path = path + "." + key;
    const YAML::Node node = parent[key];
    if (!node) {
      if (required) Error(field_path, parent, std::string("missing required field '") + key + "'");
      return fallback;
    }
    Note(field_path, node);
    try {
      if (node.IsScalar()) return node.as<std::int64_t>();
    } catch (const YAML::Exception&) {
    }
    Error(field_path, node, "must be an integer");
    return fallback;
  }

  bool ReadBool(const YAML::Node& parent, const char* key, const std::string& path,
                bool fallback) {
    const std::string field_path = path + "." + key;
    const YAML::Node node = parent[key];
    if (!node) return fallback;
    Note(field_path, node);
    try {
      if (node.IsScalar()) return node.as<bool>();
    } catch (const YAML::Exception&) {
    }
    Error(field_path, node, "must be a boolean");
    return fallback;
  }

  std::vector<std::string> ReadStringList(const YAML::Node& parent, const char* key,
                                          const std::string& path) {
    std::vector<std::string> out;
    const std::string field_path = path + "." + key;
    const YAML::Node node = parent[key];
    if (!node) return out;
    Note(field_path, node);
    if (!node.IsSequence()) {
      Error(field_path, node, "must be a list of strings");
      return out;
    }
    for (const auto& item : node) {
      if (!item.IsScalar()) {
        Error(field_path, item, "must be a list of strings");
        continue;
      }
      out.push_back(item.as<std::string>());
    }
    return out;
  }

  OrderedPairs ReadStringMap(const YAML::Node& parent, const char* key, const std::string& path) {
    OrderedPairs out;
    const std::string field_path = path + "." + key;
    const YAML::Node node = parent[key];
    if (!node) return out;
    Note(field_path, node);
    if (!node.IsMap()) {
      Error(field_path, node, "must be a mapping of strings");
      return out;
    }
    for (const auto& entry : node) {
      if (!entry.second.IsScalar()) {
        Error(field_path, entry.second, "must be a mapping of strings");
        continue;
      }
      out.emplace_back(entry.first.as<std::string>(), entry.second.as<std::string>());
    }
    return out;
  }

  template <typename Fn>
  void ForEachItem(const YAML::Node& node, const std::string& section, Fn&& fn) {
    if (!node.IsSequence()) {
      Error(section, node, "must be a list");
      return;
    }
    std::size_t index = 0;
    for (const auto& item : node) {
      std::string path = section + "[" + std::to_string(index++) + "]";
      if (item.IsMap() && item["id"] && item["id"].IsScalar()) {
        path = section + "." + item["id"].as<std::string>();
      } else if (item.IsMap() && item["builtin"] && item["builtin"].IsScalar()) {
        path = section + "." + item["builtin"].as<std::string>();
      }
      Note(path, item);
      if (!ExpectMap(item, path)) continue;
      fn(item, path);
    }
  }

  void ReadExercise(const YAML::Node& root, ExerciseDefinition& def) {
    const YAML::Node node = root["exercise"];
    if (!node) {
      Error("exercise", root, "missing required section 'exercise'");
      return;
    }
    Note("exercise", node);
    if (!ExpectMap(node, "exercise")) return;
    CheckKeys(node, "exercise", {"name", "duration_minutes"});
    def.name = ReadString(node, "name", "exercise", true);
    def.duration_minutes = ReadInteger(node, "duration_minutes", "exercise", true);
  }

  InjectSpec ReadInject(const YAML::Node& node, const std::string& path) {
    CheckKeys(node, path, {"id", "sender", "subject", "body", "trigger"});
    InjectSpec inject;
    inject.id = ReadString(node, "id", path, true);
    inject.sender = ReadString(node, "sender", path, false, std::string(kSystemSender));
    inject.subject = ReadString(node, "subject", path, false);
    inject.body = ReadString(node, "body", path, true);
    const std::string trigger_path = path + ".trigger";
    const YAML::Node trigger = node["trigger"];
    if (!trigger) {
      Error(trigger_path, node, "missing required field 'trigger'");
      return inject;
    }
    Note(trigger_path, trigger);
    if (!ExpectMap(trigger, trigger_path)) return inject;
    const std::string type = ReadString(trigger, "type", trigger_path, true);
    const auto kind = TriggerKindFromString(type);
    if (!kind) {
      if (!type.empty()) Error(trigger_path + ".type", trigger, "unknown trigger type '" + type + "'");
      return inject;
    }
    switch (*kind) {
      case TriggerKind::kAtTime:
        CheckKeys(trigger, trigger_path, {"type", "minute"});
        inject.trigger = AtTime{ReadInteger(trigger, "minute", trigger_path, true)};
        break;
      case TriggerKind::kAfterMilestone:
        CheckKeys(trigger, trigger_path, {"type", "milestone", "delay_minutes"});
        inject.trigger = AfterMilestone{ReadString(trigger, "milestone", trigger_path, true),
                                        ReadInteger(trigger, "delay_minutes", trigger_path, false)};
        break;
      case TriggerKind::kIfMilestoneMissing:
        CheckKeys(trigger, trigger_path, {"type", "milestone", "deadline_minute"});
        inject.trigger =
            IfMilestoneMissing{ReadString(trigger, "milestone", trigger_path, true),
                               ReadInteger(trigger, "deadline_minute", trigger_path, true)};
        break;
      case TriggerKind::kOnEmailTo:
        CheckKeys(trigger, trigger_path, {"type", "actor", "delay_minutes"});
        inject.trigger = OnEmailTo{ReadString(trigger, "actor", trigger_path, true),
                                   ReadInteger(trigger, "delay_minutes", trigger_path, false)};
        break;
      case TriggerKind::kManual:
        CheckKeys(trigger, trigger_path, {"type"});
        inject.trigger = Manual{};
        break;
    }
    return inject;
  }

  std::optional<ToolSpec> ReadTool(const YAML::Node& node, const std::string& path) {
    CheckKeys(node, path,
              {"id", "builtin", "name", "description", "arguments", "response", "effect",
               "unlocked_by"});
    ToolSpec tool;
    const bool is_builtin = static_cast<bool>(node["builtin"]);
    if (is_builtin) {
      const std::string builtin_id = ReadString(node, "builtin", path, true);
      const auto catalog = toolkit::BuiltinCatalog();
      const auto it = std::find_if(catalog.begin(), catalog.end(),
                                   [&](const ToolSpec& spec) { return spec.id == builtin_id; });
      if (it == catalog.end()) {
        Error(path + ".builtin", node["builtin"], "unknown builtin tool '" + builtin_id + "'");
        return std::nullopt;
      }
      tool = *it;
    }
    tool.id = ReadString(node, "id", path, !is_builtin, tool.id);
    tool.name = ReadString(node, "name", path, !is_builtin, tool.name);
    tool.description = ReadString(node, "description", path, false, tool.description);
    tool.response_template = ReadString(node, "response", path, false, tool.response_template);
    tool.unlocked_by = ReadString(node, "unlocked_by", path, false, tool.unlocked_by);
    if (const YAML::Node args = node["arguments"]) {
      tool.arguments.clear();
      const std::string args_path = path + ".arguments";
      Note(args_path, args);
      if (!args.IsSequence()) {
        Error(args_path, args, "must be a list");
      } else {
        for (const auto& arg_node : args) {
          if (!ExpectMap(arg_node, args_path)) continue;
          CheckKeys(arg_node, args_path, {"name", "pattern", "required"});
          ToolArgument arg;
          arg.name = ReadString(arg_node, "name", args_path, true);
          const std::string arg_path = args_path + "." + arg.name;
          Note(arg_path, arg_node);
          arg.pattern = ReadString(arg_node, "pattern", arg_path, true);
          arg.required = ReadBool(arg_node, "required", arg_path, true);
          tool.arguments.push_back(std::move(arg));
        }
      }
    }
    if (const YAML::Node effect = node["effect"]) {
      const std::string effect_path = path + ".effect";
      Note(effect_path, effect);
      if (ExpectMap(effect, effect_path)) {
        CheckKeys(effect, effect_path, {"type", "argument", "table", "not_found"});
        ToolEffect parsed;
        const std::string type = ReadString(effect, "type", effect_path, true);
        if (const auto kind = EffectKindFromString(type)) {
          parsed.kind = *kind;
        } else if (!type.empty()) {
          Error(effect_path + ".type", effect, "unknown effect type '" + type + "'");
        }
        parsed.argument = ReadString(effect, "argument", effect_path, false);
        parsed.table = ReadStringMap(effect, "table", effect_path);
        parsed.not_found = ReadString(effect, "not_found", effect_path, false);
        tool.effect = std::move(parsed);
      }
    }
    return tool;
  }

  MilestoneCondition ReadCondition(const YAML::Node& node, const std::string& path, int depth) {
    MilestoneCondition condition;
    Note(path, node);
    if (!ExpectMap(node, path)) return condition;
    if (depth > kMaxConditionDepth) {
      Error(path, node,
            "condition nesting exceeds depth " + std::to_string(kMaxConditionDepth));
      return condition;
    }
    static constexpr std::string_view kKinds[] = {"tool_used", "email_sent", "email_to_pattern",
                                                  "inject_received", "all_of", "any_of"};
    std::vector<std::string> present;
    for (const auto kind : kKinds) {
      if (node[std::string(kind)]) present.emplace_back(kind);
    }
    if (present.size() != 1) {
      Error(path, node,
            "condition must have exactly one of tool_used, email_sent, email_to_pattern, "
            "inject_received, all_of, any_of");
      return condition;
    }
    const std::string& kind = present.front();
    if (kind == "tool_used") {
      CheckKeys(node, path, {"tool_used", "arguments", "correct_only"});
      ToolUsed used;
      used.tool = ReadString(node, "tool_used", path, true);
      used.argument_patterns = ReadStringMap(node, "arguments", path);
      used.correct_only = ReadBool(node, "correct_only", path, true);
      condition.node = std::move(used);
    } else if (kind == "email_sent" || kind == "email_to_pattern") {
      CheckKeys(node, path, {"email_sent", "email_to_pattern", "keywords"});
      EmailSent sent;
      if (kind == "email_sent") {
        sent.actor = ReadString(node, "email_sent", path, true);
      } else {
        sent.address_pattern = ReadString(node, "email_to_pattern", path, true);
      }
      sent.keywords = ReadStringList(node, "keywords", path);
      condition.node = std::move(sent);
    } else if (kind == "inject_received") {
      CheckKeys(node, path, {"inject_received"});
      condition.node = InjectReceived{ReadString(node, "inject_received", path, true)};
    } else {
      CheckKeys(node, path, {"all_of", "any_of"});
      const YAML::Node list = node[kind];
      const std::string list_path = path + "." + kind;
      std::vector<MilestoneCondition> children;
      if (!list.IsSequence()) {
        Error(list_path, list, "must be a list of conditions");
      } else {
        std::size_t index = 0;
        for (const auto& child : list) {
          children.push_back(
              ReadCondition(child, list_path + "[" + std::to_string(index++) + "]", depth + 1));
        }
      }
      if (kind == "all_of") {
        condition.node = AllOf{std::move(children)};
      } else {
        condition.node = AnyOf{std::move(children)};
      }
    }
    return condition;
  }

  MilestoneSpec ReadMilestone(const YAML::Node& node, const std::string& path) {
    CheckKeys(node, path, {"id", "description", "condition"});
    MilestoneSpec milestone;
    milestone.id = ReadString(node, "id", path, true);
    milestone.description = ReadString(node, "description", path, false);
    if (const YAML::Node condition = node["condition"]) {
      milestone.condition = ReadCondition(condition, path + ".condition", 1);
    } else {
      Error(path + ".condition", node, "missing required field 'condition'");
    }
    return milestone;
  }

  ActorSpec ReadActor(const YAML::Node& node, const std::string& path) {
    CheckKeys(node, path, {"id", "email", "name", "auto_replies"});
    ActorSpec actor;
    actor.id = ReadString(node, "id", path, true);
    actor.email = ReadString(node, "email", path, true);
    actor.name = ReadString(node, "name", path, false);
    if (const YAML::Node rules = node["auto_replies"]) {
      const std::string rules_path = path + ".auto_replies";
      Note(rules_path, rules);
      if (!rules.IsSequence()) {
        Error(rules_path, rules, "must be a list");
        return actor;
      }
      std::size_t index = 0;
      for (const auto& rule_node : rules) {
        const std::string rule_path = rules_path + "[" + std::to_string(index++) + "]";
        Note(rule_path, rule_node);
        if (!ExpectMap(rule_node, rule_path)) continue;
        CheckKeys(rule_node, rule_path, {"keywords", "reply", "delay_minutes"});
        AutoReplyRule rule;
        rule.keywords = ReadStringList(rule_node, "keywords", rule_path);
        rule.reply_inject = ReadString(rule_node, "reply", rule_path, true);
        rule.delay_minutes = ReadInteger(rule_node, "delay_minutes", rule_path, false);
        actor.auto_replies.push_back(std::move(rule));
      }
    }
    return actor;
  }

  void ReadPages(const YAML::Node& node, ExerciseDefinition& def) {
    Note("pages", node);
    if (!node.IsMap()) {
      Error("pages", node, "must be a mapping of url to page body");
      return;
    }
    for (const auto& entry : node) {
      const auto url = entry.first.as<std::string>();
      Note("pages." + url, entry.first);
      if (!entry.second.IsScalar()) {
        Error("pages." + url, entry.second, "page body must be a string");
        continue;
      }
      def.pages.push_back({url, entry.second.as<std::string>()});
    }
  }

  std::vector<Diagnostic>& errors_;
  std::map<std::string, int>& lines_;
};

// Attaches the source line of the longest recorded path prefix.
void Locate(Diagnostic& diagnostic, const std::map<std::string, int>& lines) {
  if (diagnostic.line) return;
  std::string path = diagnostic.path;
  while (!path.empty()) {
    if (const auto it = lines.find(path); it != lines.end()) {
      diagnostic.line = it->second;
      return;
    }
    const auto cut = path.find_last_of(".[");
    if (cut == std::string::npos) break;
    path.resize(cut);
  }
}

}  // namespace

ParseResult ParseDefinition(std::string_view text) {
  ParseResult result;
  if (text.size() > kMaxDefinitionBytes) {
    result.errors.push_back({"", std::nullopt, "definition exceeds 10 MiB"});
    return result;
  }
  const std::string source(text);
  try {
    std::istringstream stream(source);
    YAML::Parser parser(stream);
    SubsetChecker checker(result.errors);
    while (parser.HandleNextDocument(checker)) {
    }
  } catch (const YAML::Exception& e) {
    result.errors.push_back({"", LineOf(e.mark), "malformed syntax: " + e.msg});
    return result;
  }
  if (!result.errors.empty()) return result;

  YAML::Node root;
  try {
    root = YAML::Load(source);
  } catch (const YAML::Exception& e) {
    result.errors.push_back({"", LineOf(e.mark), "malformed syntax: " + e.msg});
    return result;
  }

  std::map<std::string, int> lines;
  Reader reader(result.errors, lines);
  ExerciseDefinition def;
  try {
    def = reader.ReadDocument(root);
  } catch (const YAML::Exception& e) {
    result.errors.push_back({"", LineOf(e.mark), "malformed document: " + e.msg});
    return result;
  }
  if (!result.errors.empty()) return result;

  ValidationReport report = Validate(def);
  for (auto& diagnostic : report.errors) Locate(diagnostic, lines);
  for (auto& diagnostic : report.warnings) Locate(diagnostic, lines);
  result.errors = std::move(report.errors);
  result.warnings = std::move(report.warnings);
  if (result.errors.empty()) result.definition = std::move(def);
  return result;
}

ParseResult LoadDefinitionFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ttx::Error(ErrorCode::kIo, "cannot read definition file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return ParseDefinition(buffer.str());
}

}  // namespace ttx::definition

#include "ttx/eventlog/record.hpp"

namespace ttx::eventlog {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view ToString(Category category) {
  switch (category) {
    case Category::kInjectCategories: return "inject_categories";
    case Category::kEmails: return "emails";
    case Category::kActionLogs: return "action_logs";
    case Category::kMilestones: return "milestones";
  }
  return "inject_categories";
}

std::optional<Category> CategoryFromString(std::string_view text) {
  for (const auto category : kAllCategories) {
    if (ToString(category) == text) return category;
  }
  return std::nullopt;
}

std::string FileName(Category category) { return std::string(ToString(category)) + ".jsonl"; }

ordered_json ToJson(const LogRecord& record) {
  ordered_json out;
  out["timestamp"] = FormatTimestamp(record.timestamp);
  out["team_id"] = record.team_id;
  out["category"] = ToString(record.category());
  std::visit(
      [&](const auto& payload) {
        using T = std::decay_t<decltype(payload)>;
        if constexpr (std::is_same_v<T, InjectPayload>) {
          out["inject_id"] = payload.inject_id;
          out["trigger"] = payload.trigger;
          out["status"] = payload.status;
        } else if constexpr (std::is_same_v<T, EmailPayload>) {
          out["thread_id"] = payload.thread_id;
          out["sender"] = payload.sender;
          out["recipients"] = payload.recipients;
          out["subject"] = payload.subject;
          out["body"] = payload.body;
          out["origin"] = payload.origin;
        } else if constexpr (std::is_same_v<T, ActionPayload>) {
          out["invocation_id"] = payload.invocation_id;
          out["tool_id"] = payload.tool_id;
          out["args"] = ordered_json::object();
          for (const auto& [name, value] : payload.args) out["args"][name] = value;
          out["classification"] = payload.classification;
          out["reason"] = payload.reason;
          out["output"] = payload.output;
          out["acting_trainee"] = payload.acting_trainee;
          out["rejected"] = payload.rejected;
        } else {
          out["milestone_id"] = payload.milestone_id;
          out["reached_at"] = FormatTimestamp(payload.reached_at);
          out["exercise_start"] = FormatTimestamp(payload.exercise_start);
        }
      },
      record.payload);
  return out;
}

std::string ToLine(const LogRecord& record) {
  return ToJson(record).dump(-1, ' ', false, json::error_handler_t::replace);
}

namespace {

struct FieldReader {
  const json& object;
  std::string& error;

  bool String(const char* key, std::string& out) {
    const auto it = object.find(key);
    if (it == object.end() || !it->is_string()) {
      error = std::string("field '") + key + "' missing or not a string";
      return false;
    }
    out = it->get<std::string>();
    return true;
  }

  bool Time(const char* key, Timestamp& out) {
    std::string text;
    if (!String(key, text)) return false;
    const auto parsed = ParseTimestamp(text);
    if (!parsed) {
      error = std::string("field '") + key + "' is not a YYYY-MM-DDTHH:MM:SS.ffffffZ timestamp";
      return false;
    }
    out = *parsed;
    return true;
  }

  bool Bool(const char* key, bool& out) {
    const auto it = object.find(key);
    if (it == object.end() || !it->is_boolean()) {
      error = std::string("field '") + key + "' missing or not a boolean";
      return false;
    }
    out = it->get<bool>();
    return true;
  }

  bool StringList(const char* key, std::vector<std::string>& out) {
    const auto it = object.find(key);
    if (it == object.end() || !it->is_array()) {
      error = std::string("field '") + key + "' missing or not an array";
      return false;
    }
    for (const auto& item : *it) {
      if (!item.is_string()) {
        error = std::string("field '") + key + "' must contain only strings";
        return false;
      }
      out.push_back(item.get<std::string>());
    }
    return true;
  }

  bool StringMap(const char* key, std::map<std::string, std::string>& out) {
    const auto it = object.find(key);
    if (it == object.end() || !it->is_object()) {
      error = std::string("field '") + key + "' missing or not an object";
      return false;
    }
    for (const auto& [name, value] : it->items()) {
      if (!value.is_string()) {
        error = std::string("field '") + key + "' must map to strings";
        return false;
      }
      out[name] = value.get<std::string>();
    }
    return true;
  }
};

}  // namespace

std::optional<LogRecord> FromJson(const json& object, std::string& error) {
  if (!object.is_object()) {
    error = "record is not a JSON object";
    return std::nullopt;
  }
  FieldReader read{object, error};
  LogRecord record;
  std::string category_text;
  if (!read.Time("timestamp", record.timestamp) || !read.String("team_id", record.team_id) ||
      !read.String("category", category_text)) {
    return std::nullopt;
  }
  const auto category = CategoryFromString(category_text);
  if (!category) {
    error = "unknown category '" + category_text + "'";
    return std::nullopt;
  }
  bool ok = false;
  switch (*category) {
    case Category::kInjectCategories: {
      InjectPayload payload;
      ok = read.String("inject_id", payload.inject_id) && read.String("trigger", payload.trigger) &&
           read.String("status", payload.status);
      record.payload = std::move(payload);
      break;
    }
    case Category::kEmails: {
      EmailPayload payload;
      ok = read.String("thread_id", payload.thread_id) && read.String("sender", payload.sender) &&
           read.StringList("recipients", payload.recipients) &&
           read.String("subject", payload.subject) && read.String("body", payload.body) &&
           read.String("origin", payload.origin);
      record.payload = std::move(payload);
      break;
    }
    case Category::kActionLogs: {
      ActionPayload payload;
      ok = read.String("invocation_id", payload.invocation_id) &&
           read.String("tool_id", payload.tool_id) && read.StringMap("args", payload.args) &&
           read.String("classification", payload.classification) &&
           read.String("reason", payload.reason) && read.String("output", payload.output) &&
           read.String("acting_trainee", payload.acting_trainee) &&
           read.Bool("rejected", payload.rejected);
      record.payload = std::move(payload);
      break;
    }
    case Category::kMilestones: {
      MilestonePayload payload;
      ok = read.String("milestone_id", payload.milestone_id) &&
           read.Time("reached_at", payload.reached_at) &&
           read.Time("exercise_start", payload.exercise_start);
      record.payload = std::move(payload);
      break;
    }
  }
  if (!ok) return std::nullopt;
  return record;
}

}  // namespace ttx::eventlog

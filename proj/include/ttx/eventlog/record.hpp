#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "ttx/common/time.hpp"

namespace ttx::eventlog {

// The four per-team streams. Order here is the export order.
enum class Category { kInjectCategories, kEmails, kActionLogs, kMilestones };

inline constexpr std::array<Category, 4> kAllCategories = {
    Category::kInjectCategories, Category::kEmails, Category::kActionLogs, Category::kMilestones};

std::string_view ToString(Category category);
std::optional<Category> CategoryFromString(std::string_view text);
// `inject_categories.jsonl`, `emails.jsonl`, `action_logs.jsonl`, `milestones.jsonl`.
std::string FileName(Category category);

struct InjectPayload {
  std::string inject_id;
  std::string trigger;  // delivery cause, see engine::DeliveryCause
  std::string status = "delivered";  // or "discarded" (pending at exercise end)
  bool operator==(const InjectPayload&) const = default;
};

struct EmailPayload {
  std::string thread_id;
  std::string sender;
  std::vector<std::string> recipients;
  std::string subject;
  std::string body;
  std::string origin;  // team | actor | instructor
  bool operator==(const EmailPayload&) const = default;
};

struct ActionPayload {
  std::string invocation_id;
  std::string tool_id;
  std::map<std::string, std::string> args;
  std::string classification;  // correct | incorrect | not_classified (rejected)
  std::string reason;
  std::string output;
  std::string acting_trainee;
  bool rejected = false;
  bool operator==(const ActionPayload&) const = default;
};

struct MilestonePayload {
  std::string milestone_id;
  Timestamp reached_at;
  Timestamp exercise_start;
  bool operator==(const MilestonePayload&) const = default;
};

// Alternative index equals the Category value.
using Payload = std::variant<InjectPayload, EmailPayload, ActionPayload, MilestonePayload>;

struct LogRecord {
  Timestamp timestamp;
  std::string team_id;
  Payload payload;

  Category category() const { return static_cast<Category>(payload.index()); }
  bool operator==(const LogRecord&) const = default;
};

// One JSON object per record, keys in a fixed order:
// timestamp, team_id, category, then the payload fields.
nlohmann::ordered_json ToJson(const LogRecord& record);
std::string ToLine(const LogRecord& record);

// Inverse of ToJson. On failure returns nullopt and sets `error`.
std::optional<LogRecord> FromJson(const nlohmann::json& object, std::string& error);

}  // namespace ttx::eventlog

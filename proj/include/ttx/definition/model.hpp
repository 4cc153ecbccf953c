#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace ttx::definition {

inline constexpr std::string_view kSystemSender = "system";
inline constexpr int kMaxConditionDepth = 8;
inline constexpr std::size_t kMaxDefinitionBytes = 10 * 1024 * 1024;

// Ordered string->string pairs. Definition order is significant for output and
// for first-match rules, so these are not maps.
using OrderedPairs = std::vector<std::pair<std::string, std::string>>;

// --- Triggers -------------------------------------------------------------

struct AtTime {
  std::int64_t minute = 0;
  bool operator==(const AtTime&) const = default;
};

struct AfterMilestone {
  std::string milestone;
  std::int64_t delay_minutes = 0;
  bool operator==(const AfterMilestone&) const = default;
};

struct IfMilestoneMissing {
  std::string milestone;
  std::int64_t deadline_minute = 0;
  bool operator==(const IfMilestoneMissing&) const = default;
};

struct OnEmailTo {
  std::string actor;
  std::int64_t delay_minutes = 0;
  bool operator==(const OnEmailTo&) const = default;
};

struct Manual {
  bool operator==(const Manual&) const = default;
};

using TriggerRule = std::variant<AtTime, AfterMilestone, IfMilestoneMissing, OnEmailTo, Manual>;

enum class TriggerKind { kAtTime, kAfterMilestone, kIfMilestoneMissing, kOnEmailTo, kManual };

TriggerKind KindOf(const TriggerRule& rule);
std::string_view ToString(TriggerKind kind);
std::optional<TriggerKind> TriggerKindFromString(std::string_view text);

struct InjectSpec {
  std::string id;
  std::string sender{kSystemSender};
  std::string subject;
  std::string body;
  TriggerRule trigger{Manual{}};
  bool operator==(const InjectSpec&) const = default;
};

// --- Tools ----------------------------------------------------------------

struct ToolArgument {
  std::string name;
  std::string pattern;  // matched against the whole value
  bool required = true;
  bool operator==(const ToolArgument&) const = default;
};

enum class EffectKind { kNone, kRecordBlock, kReturnPage, kReturnLookup };

std::string_view ToString(EffectKind kind);
std::optional<EffectKind> EffectKindFromString(std::string_view text);

struct ToolEffect {
  EffectKind kind = EffectKind::kNone;
  std::string argument;    // which argument the effect keys on
  OrderedPairs table;      // kReturnLookup: key -> result
  std::string not_found;   // kReturnLookup / kReturnPage fallback text
  bool operator==(const ToolEffect&) const = default;
};

struct ToolSpec {
  std::string id;
  std::string name;
  std::string description;
  std::vector<ToolArgument> arguments;
  std::string response_template;  // `{{arg}}` placeholders, `{{result}}` for effects
  ToolEffect effect;
  std::string unlocked_by;  // inject id; empty = available from the start
  bool operator==(const ToolSpec&) const = default;

  const ToolArgument* FindArgument(std::string_view arg_name) const;
};

// --- Milestones -----------------------------------------------------------

struct MilestoneCondition;

struct ToolUsed {
  std::string tool;
  OrderedPairs argument_patterns;
  bool correct_only = true;
  bool operator==(const ToolUsed&) const = default;
};

// Exactly one of `actor` / `address_pattern` is set.
struct EmailSent {
  std::string actor;
  std::string address_pattern;
  std::vector<std::string> keywords;  // any-of, case-insensitive; empty = any body
  bool operator==(const EmailSent&) const = default;
};

struct InjectReceived {
  std::string inject;
  bool operator==(const InjectReceived&) const = default;
};

struct AllOf {
  std::vector<MilestoneCondition> conditions;
  bool operator==(const AllOf&) const;
};

struct AnyOf {
  std::vector<MilestoneCondition> conditions;
  bool operator==(const AnyOf&) const;
};

struct MilestoneCondition {
  std::variant<ToolUsed, EmailSent, InjectReceived, AllOf, AnyOf> node;
  bool operator==(const MilestoneCondition&) const = default;
};

inline bool AllOf::operator==(const AllOf& other) const { return conditions == other.conditions; }
inline bool AnyOf::operator==(const AnyOf& other) const { return conditions == other.conditions; }

int ConditionDepth(const MilestoneCondition& condition);

struct MilestoneSpec {
  std::string id;
  std::string description;
  MilestoneCondition condition;
  bool operator==(const MilestoneSpec&) const = default;
};

// --- Actors and pages ------------------------------------------------------

struct AutoReplyRule {
  std::vector<std::string> keywords;  // empty = any body
  std::string reply_inject;
  std::int64_t delay_minutes = 0;
  bool operator==(const AutoReplyRule&) const = default;
};

struct ActorSpec {
  std::string id;
  std::string email;
  std::string name;
  std::vector<AutoReplyRule> auto_replies;
  bool operator==(const ActorSpec&) const = default;
};

struct Page {
  std::string url;
  std::string body;
  bool operator==(const Page&) const = default;
};

// --- Whole definition -------------------------------------------------------

struct ExerciseDefinition {
  std::string name;
  std::int64_t duration_minutes = 0;
  std::vector<InjectSpec> injects;
  std::vector<ToolSpec> tools;
  std::vector<MilestoneSpec> milestones;
  std::vector<ActorSpec> actors;
  std::vector<Page> pages;

  bool operator==(const ExerciseDefinition&) const = default;

  const InjectSpec* FindInject(std::string_view id) const;
  std::optional<std::size_t> InjectIndex(std::string_view id) const;
  const ToolSpec* FindTool(std::string_view id) const;
  const MilestoneSpec* FindMilestone(std::string_view id) const;
  const ActorSpec* FindActor(std::string_view id) const;
  // Matches either the actor id or its email address (case-insensitive).
  const ActorSpec* ResolveActor(std::string_view id_or_address) const;
  // Exact URL match, tolerating one trailing slash on either side.
  const Page* FindPage(std::string_view url) const;
};

// A located problem in a definition: `path` is a dotted field path using ids
// (e.g. `injects.phish_report.trigger.milestone`); `line` is 1-based when the
// definition came from text.
struct Diagnostic {
  std::string path;
  std::optional<int> line;
  std::string message;

  std::string ToString() const;
};

}  // namespace ttx::definition

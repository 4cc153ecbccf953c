#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ttx/definition/model.hpp"

namespace ttx::toolkit {

// Argument name -> value. Sorted so logs and outputs are deterministic.
using Arguments = std::map<std::string, std::string>;

struct Classification {
  bool correct = true;
  std::string reason;  // "<argument>: <problem>" when incorrect

  static Classification Correct() { return {true, {}}; }
  static Classification Incorrect(std::string reason) { return {false, std::move(reason)}; }
  bool operator==(const Classification&) const = default;
};

// Purely syntactic: every required argument present and non-empty, no
// undeclared arguments, every supplied value matches its pattern in full.
// Declared arguments are checked in declaration order, then undeclared ones.
Classification ClassifyArguments(const definition::ToolSpec& tool, const Arguments& args);

enum class SideEffectKind { kBlockedEndpoint, kPage, kLookup };

struct SideEffect {
  SideEffectKind kind;
  std::string key;     // blocked endpoint, page URL or lookup key
  std::string value;   // page body or lookup result
  bool found = true;   // page/lookup hit
  bool already_applied = false;  // endpoint was blocked before this call
};

struct ToolResult {
  Classification classification;
  std::string output;
  std::optional<SideEffect> side_effect;
};

// Per-team state that tool side effects mutate.
struct ToolState {
  std::set<std::pair<std::string, std::string>> blocked;  // (tool id, endpoint)

  bool operator==(const ToolState&) const = default;
};

// Classifies, then either renders the response and applies the declared side
// effect (correct) or returns an error output and touches nothing (incorrect).
ToolResult Invoke(const definition::ToolSpec& tool, const Arguments& args,
                  std::span<const definition::Page> pages, ToolState& state);

// `{{name}}` placeholders in order of appearance.
std::vector<std::string> TemplatePlaceholders(std::string_view text);

// Substitutes `{{name}}` from `args` and `{{result}}` from `result`; unknown
// placeholders render empty.
std::string RenderTemplate(std::string_view text, const Arguments& args,
                           std::string_view result = {});

inline constexpr std::string_view kResultPlaceholder = "result";

inline constexpr std::string_view kIpv4Pattern =
    R"((25[0-5]|2[0-4][0-9]|1[0-9]{2}|[1-9]?[0-9])(\.(25[0-5]|2[0-4][0-9]|1[0-9]{2}|[1-9]?[0-9])){3})";
inline constexpr std::string_view kDomainPattern =
    R"(([A-Za-z]([A-Za-z0-9-]{0,61}[A-Za-z0-9])?\.)+[A-Za-z]([A-Za-z0-9-]{0,61}[A-Za-z0-9])?)";
inline constexpr std::string_view kUrlPattern =
    R"(https?://(([A-Za-z]([A-Za-z0-9-]{0,61}[A-Za-z0-9])?\.)+[A-Za-z]([A-Za-z0-9-]{0,61}[A-Za-z0-9])?|(25[0-5]|2[0-4][0-9]|1[0-9]{2}|[1-9]?[0-9])(\.(25[0-5]|2[0-4][0-9]|1[0-9]{2}|[1-9]?[0-9])){3})(:[0-9]{1,5})?(/[A-Za-z0-9._~%!$&'()*+,;=:@/-]*)?(\?[A-Za-z0-9._~%!$&'()*+,;=:@/?-]*)?)";
inline constexpr std::string_view kAccountPattern = R"([A-Za-z0-9._-]{2,64}(@([A-Za-z0-9-]+\.)+[A-Za-z]{2,})?)";

// The shipped tool catalog: traffic blocking in both directions, DNS and
// reverse lookups, whois, traffic inspection, browser, account handling,
// authority notification and backup restore. Email is handled by the engine.
std::vector<definition::ToolSpec> BuiltinCatalog();

// The catalog as a parseable definition document that declares only tools.
std::string SerializeCatalog();

}  // namespace ttx::toolkit

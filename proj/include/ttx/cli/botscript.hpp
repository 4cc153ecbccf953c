#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ttx/common/time.hpp"
#include "ttx/definition/model.hpp"
#include "ttx/engine/instance.hpp"

namespace ttx::cli {

// Every team starts with this trainee holding the operator token.
inline constexpr std::string_view kDefaultTrainee = "operator";

struct ClaimStep {};
struct ReleaseStep {};

using BotAction = std::variant<ClaimStep, ReleaseStep, engine::InvokeTool, engine::SendEmail,
                               engine::DeliverManualInject, engine::ReplyInThread>;

struct BotStep {
  Duration at{0};  // logical time from exercise start
  std::string trainee{kDefaultTrainee};
  BotAction action;
  int line = 0;  // source line for error messages
};

struct BotTeam {
  std::string team_id;
  std::vector<BotStep> steps;  // times non-decreasing
};

struct BotScript {
  std::vector<BotTeam> teams;  // file order
};

struct BotScriptResult {
  std::optional<BotScript> script;
  std::vector<std::string> errors;  // "line N: message"
};

// Parses a bot script document:
//
//   teams:
//     team-1:
//       - {at: 5, invoke: dns_lookup, args: {domain: example.org}}
//       - {at: 6, email: {to: [it_manager], subject: Hi, body: text}}
//       - {at: 7, as: bob, claim: true}
//       - {at: 8, inject: hint_1}                      # instructor
//       - {at: 9, reply: {thread: thread-1, body: ok}}  # instructor
//
// `at` is in minutes (fractions allowed). Never throws.
BotScriptResult ParseBotScript(std::string_view text);

// Throws Error(kIo) if the file cannot be read.
BotScriptResult LoadBotScript(const std::filesystem::path& path);

// Checks the script against a definition: known tools, actors, injects, and
// every step strictly inside the exercise duration.
std::vector<std::string> CheckBotScript(const BotScript& script,
                                        const definition::ExerciseDefinition& def);

}  // namespace ttx::cli

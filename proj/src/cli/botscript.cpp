#include "ttx/cli/botscript.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "ttx/common/error.hpp"

namespace ttx::cli {

namespace {

std::string At(const YAML::Node& node, const std::string& message) {
  return "line " + std::to_string(node.Mark().line + 1) + ": " + message;
}

std::optional<std::string> Scalar(const YAML::Node& node) {
  if (!node || !node.IsScalar()) return std::nullopt;
  return node.Scalar();
}

std::vector<std::string> StringList(const YAML::Node& node, std::vector<std::string>& errors) {
  std::vector<std::string> out;
  if (!node) return out;
  if (node.IsScalar()) {
    out.push_back(node.Scalar());
  } else if (node.IsSequence()) {
    for (const auto& item : node) {
      if (item.IsScalar()) {
        out.push_back(item.Scalar());
      } else {
        errors.push_back(At(item, "expected a string"));
      }
    }
  } else {
    errors.push_back(At(node, "expected a string or a list of strings"));
  }
  return out;
}

class StepReader {
 public:
  explicit StepReader(std::vector<std::string>& errors) : errors_(errors) {}

  std::optional<BotStep> Read(const YAML::Node& node) {
    if (!node.IsMap()) {
      errors_.push_back(At(node, "step must be a mapping"));
      return std::nullopt;
    }
    static const std::set<std::string> kKeys = {"at",    "as",    "claim",  "release", "invoke",
                                                "args",  "email", "inject", "reply"};
    static const std::set<std::string> kActions = {"claim", "release", "invoke",
                                                   "email", "inject",  "reply"};
    std::vector<std::string> actions;
    for (const auto& entry : node) {
      const std::string key = entry.first.as<std::string>();
      if (!kKeys.count(key)) errors_.push_back(At(entry.first, "unknown step key '" + key + "'"));
      if (kActions.count(key)) actions.push_back(key);
    }
    if (actions.size() != 1) {
      errors_.push_back(At(node, "step needs exactly one of claim, release, invoke, email, "
                                 "inject, reply"));
      return std::nullopt;
    }

    BotStep step;
    step.line = node.Mark().line + 1;
    const auto at = Scalar(node["at"]);
    double minutes = 0.0;
    try {
      if (!at) throw std::invalid_argument("missing");
      std::size_t used = 0;
      minutes = std::stod(*at, &used);
      if (used != at->size() || !std::isfinite(minutes) || minutes < 0) {
        throw std::invalid_argument("bad");
      }
    } catch (const std::exception&) {
      errors_.push_back(At(node, "'at' must be a non-negative number of minutes"));
      return std::nullopt;
    }
    step.at = Duration{static_cast<Duration::rep>(std::llround(minutes * 60e6))};
    if (node["as"]) {
      const auto as = Scalar(node["as"]);
      if (!as || as->empty()) {
        errors_.push_back(At(node["as"], "'as' must be a trainee name"));
        return std::nullopt;
      }
      step.trainee = *as;
    }

    const std::string& action = actions.front();
    const std::size_t errors_before = errors_.size();
    if (action == "claim") {
      step.action = ClaimStep{};
    } else if (action == "release") {
      step.action = ReleaseStep{};
    } else if (action == "invoke") {
      engine::InvokeTool invoke;
      invoke.tool_id = Scalar(node["invoke"]).value_or("");
      if (invoke.tool_id.empty()) errors_.push_back(At(node, "'invoke' must name a tool"));
      if (const auto args = node["args"]) {
        if (!args.IsMap()) {
          errors_.push_back(At(args, "'args' must be a mapping"));
        } else {
          for (const auto& entry : args) {
            const auto value = entry.second.IsNull() ? std::optional<std::string>("")
                                                     : Scalar(entry.second);
            if (!value) {
              errors_.push_back(At(entry.second, "argument values must be scalars"));
            } else {
              invoke.args[entry.first.as<std::string>()] = *value;
            }
          }
        }
      }
      step.action = std::move(invoke);
    } else if (action == "email") {
      const YAML::Node email_node = node["email"];
      engine::SendEmail email;
      if (!email_node.IsMap()) {
        errors_.push_back(At(email_node, "'email' must be a mapping with to/subject/body/thread"));
      } else {
        for (const auto& entry : email_node) {
          const std::string key = entry.first.as<std::string>();
          if (key != "to" && key != "subject" && key != "body" && key != "thread") {
            errors_.push_back(At(entry.first, "unknown email key '" + key + "'"));
          }
        }
        email.to = StringList(email_node["to"], errors_);
        email.subject = Scalar(email_node["subject"]).value_or("");
        email.body = Scalar(email_node["body"]).value_or("");
        email.thread_id = Scalar(email_node["thread"]).value_or("");
      }
      step.action = std::move(email);
    } else if (action == "inject") {
      const auto inject = Scalar(node["inject"]);
      if (!inject || inject->empty()) errors_.push_back(At(node, "'inject' must name an inject"));
      step.action = engine::DeliverManualInject{inject.value_or("")};
    } else {
      const YAML::Node reply_node = node["reply"];
      engine::ReplyInThread reply;
      if (!reply_node.IsMap()) {
        errors_.push_back(At(reply_node, "'reply' must be a mapping with thread/body/as_actor"));
      } else {
        reply.thread_id = Scalar(reply_node["thread"]).value_or("");
        reply.body = Scalar(reply_node["body"]).value_or("");
        reply.as_actor = Scalar(reply_node["as_actor"]).value_or("");
        if (reply.thread_id.empty()) errors_.push_back(At(reply_node, "'reply.thread' is required"));
      }
      step.action = std::move(reply);
    }
    if (errors_.size() != errors_before) return std::nullopt;
    return step;
  }

 private:
  std::vector<std::string>& errors_;
};

}  // namespace

BotScriptResult ParseBotScript(std::string_view text) {
  BotScriptResult result;
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    result.errors.push_back("line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
    return result;
  }
  BotScript script;
  if (root.IsNull()) {
    result.script = std::move(script);  // empty script: no actions
    return result;
  }
  if (!root.IsMap()) {
    result.errors.push_back(At(root, "bot script must be a mapping with a 'teams' key"));
    return result;
  }
  for (const auto& entry : root) {
    const std::string key = entry.first.as<std::string>();
    if (key != "teams") result.errors.push_back(At(entry.first, "unknown top-level key '" + key + "'"));
  }
  const YAML::Node teams = root["teams"];
  if (teams && !teams.IsNull()) {
    if (!teams.IsMap()) {
      result.errors.push_back(At(teams, "'teams' must map team ids to step lists"));
      return result;
    }
    StepReader reader(result.errors);
    for (const auto& entry : teams) {
      BotTeam team;
      team.team_id = entry.first.as<std::string>();
      const YAML::Node steps = entry.second;
      if (!steps.IsNull() && !steps.IsSequence()) {
        result.errors.push_back(At(steps, "steps of team '" + team.team_id + "' must be a list"));
        continue;
      }
      for (const auto& step_node : steps) {
        if (auto step = reader.Read(step_node)) {
          if (!team.steps.empty() && step->at < team.steps.back().at) {
            result.errors.push_back(At(step_node, "step times must be non-decreasing"));
          }
          team.steps.push_back(std::move(*step));
        }
      }
      script.teams.push_back(std::move(team));
    }
  }
  if (result.errors.empty()) result.script = std::move(script);
  return result;
}

BotScriptResult LoadBotScript(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return ParseBotScript(buffer.str());
}

std::vector<std::string> CheckBotScript(const BotScript& script,
                                        const definition::ExerciseDefinition& def) {
  std::vector<std::string> errors;
  const Duration end = Minutes(def.duration_minutes);
  std::set<std::string> seen;
  for (const auto& team : script.teams) {
    if (!seen.insert(team.team_id).second) errors.push_back("duplicate team '" + team.team_id + "'");
    for (const auto& step : team.steps) {
      const std::string where = "line " + std::to_string(step.line) + ": ";
      if (step.at >= end) {
        errors.push_back(where + "step is at or after the exercise end (" +
                         std::to_string(def.duration_minutes) + " min)");
      }
      if (const auto* invoke = std::get_if<engine::InvokeTool>(&step.action)) {
        if (def.FindTool(invoke->tool_id) == nullptr) {
          errors.push_back(where + "unknown tool '" + invoke->tool_id + "'");
        }
      } else if (const auto* email = std::get_if<engine::SendEmail>(&step.action)) {
        for (const auto& to : email->to) {
          if (def.ResolveActor(to) == nullptr && to.find('@') == std::string::npos) {
            errors.push_back(where + "unknown actor '" + to + "'");
          }
        }
      } else if (const auto* inject = std::get_if<engine::DeliverManualInject>(&step.action)) {
        if (def.FindInject(inject->inject_id) == nullptr) {
          errors.push_back(where + "unknown inject '" + inject->inject_id + "'");
        }
      } else if (const auto* reply = std::get_if<engine::ReplyInThread>(&step.action)) {
        if (!reply->as_actor.empty() && def.ResolveActor(reply->as_actor) == nullptr) {
          errors.push_back(where + "unknown actor '" + reply->as_actor + "'");
        }
      }
    }
  }
  return errors;
}

}  // namespace ttx::cli

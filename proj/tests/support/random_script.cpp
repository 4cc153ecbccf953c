#include "random_script.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <vector>

namespace ttx::testing {

namespace {

const std::map<std::string, std::vector<std::string>>& GoodValues() {
  static const std::map<std::string, std::vector<std::string>> values = {
      {"ip", {"203.0.113.45", "198.51.100.23", "192.0.2.10", "10.0.0.1"}},
      {"domain", {"cdn-update.example.net", "www.faculty.example.edu", "faculty.example.edu"}},
      {"url",
       {"https://www.faculty.example.edu", "https://www.faculty.example.edu/admin",
        "https://cdn-update.example.net/collect", "http://unknown.example.org/"}},
      {"account", {"webadmin", "j.novak", "student42"}},
      {"authority",
       {"national_csirt", "data_protection_authority", "police", "university_management"}},
      {"reference", {"case 1", "INC-2024-001"}},
      {"server", {"www.faculty.example.edu", "mail.faculty.example.edu"}},
      {"snapshot", {"2023-12-27", "2023-12-28", "2023-12-31"}},
  };
  return values;
}

const std::vector<std::string>& BadValues() {
  static const std::vector<std::string> values = {"", "not valid!", "999.1.1.1",
                                                  "https://cdn-update.example.net", "x"};
  return values;
}

const std::vector<std::string>& Words() {
  static const std::vector<std::string> words = {
      "logs", "summary", "backup", "password", "snapshot", "statement", "hello", "report",
      "breach", "urgent"};
  return words;
}

template <typename T>
const T& Pick(const std::vector<T>& items, std::mt19937_64& rng) {
  return items[std::uniform_int_distribution<std::size_t>(0, items.size() - 1)(rng)];
}

bool Chance(double p, std::mt19937_64& rng) { return std::bernoulli_distribution(p)(rng); }

engine::InvokeTool RandomInvoke(const definition::ExerciseDefinition& def, std::mt19937_64& rng) {
  const auto& tool = Pick(def.tools, rng);
  engine::InvokeTool invoke;
  invoke.tool_id = tool.id;
  for (const auto& arg : tool.arguments) {
    if (!arg.required && Chance(0.5, rng)) continue;
    if (Chance(0.05, rng)) continue;  // missing argument
    const auto it = GoodValues().find(arg.name);
    if (it != GoodValues().end() && Chance(0.8, rng)) {
      invoke.args[arg.name] = Pick(it->second, rng);
    } else {
      invoke.args[arg.name] = Pick(BadValues(), rng);
    }
  }
  if (Chance(0.03, rng)) invoke.args["unexpected"] = "1";
  return invoke;
}

engine::SendEmail RandomEmail(const definition::ExerciseDefinition& def, std::mt19937_64& rng) {
  engine::SendEmail email;
  if (Chance(0.25, rng)) {
    email.thread_id = "thread-" + std::to_string(std::uniform_int_distribution<int>(1, 4)(rng));
  } else {
    email.subject = "Subject " + Pick(Words(), rng);
  }
  const int recipients = std::uniform_int_distribution<int>(email.thread_id.empty() ? 1 : 0, 2)(rng);
  for (int i = 0; i < recipients; ++i) {
    if (Chance(0.2, rng)) {
      email.to.push_back(Chance(0.5, rng) ? "students@faculty.example.edu"
                                          : "someone@elsewhere.example.org");
    } else {
      const auto& actor = Pick(def.actors, rng);
      email.to.push_back(Chance(0.5, rng) ? actor.id : actor.email);
    }
  }
  const int words = std::uniform_int_distribution<int>(1, 4)(rng);
  for (int i = 0; i < words; ++i) email.body += (i ? " " : "") + Pick(Words(), rng);
  return email;
}

}  // namespace

cli::BotScript RandomScript(const definition::ExerciseDefinition& def, std::mt19937_64& rng,
                            const RandomScriptLimits& limits) {
  std::vector<std::string> manual;
  for (const auto& inject : def.injects) {
    if (std::holds_alternative<definition::Manual>(inject.trigger)) manual.push_back(inject.id);
  }
  cli::BotScript script;
  const int teams = std::uniform_int_distribution<int>(1, limits.max_teams)(rng);
  for (int t = 1; t <= teams; ++t) {
    cli::BotTeam team;
    team.team_id = "team-" + std::to_string(t);
    const int steps = std::uniform_int_distribution<int>(0, limits.max_steps)(rng);
    std::vector<std::int64_t> seconds;
    std::uniform_int_distribution<std::int64_t> when(0, def.duration_minutes * 60 - 1);
    for (int i = 0; i < steps; ++i) seconds.push_back(when(rng));
    std::sort(seconds.begin(), seconds.end());
    for (int i = 0; i < steps; ++i) {
      cli::BotStep step;
      step.at = std::chrono::seconds(seconds[static_cast<std::size_t>(i)]);
      step.line = i + 1;
      step.trainee = Chance(0.85, rng) ? std::string(cli::kDefaultTrainee) : "mallory";
      const double roll = std::uniform_real_distribution<double>(0, 1)(rng);
      if (roll < 0.55) {
        step.action = RandomInvoke(def, rng);
      } else if (roll < 0.8) {
        step.action = RandomEmail(def, rng);
      } else if (roll < 0.87) {
        step.action = cli::ClaimStep{};
      } else if (roll < 0.93) {
        step.action = cli::ReleaseStep{};
      } else if (roll < 0.97 && !manual.empty()) {
        step.action = engine::DeliverManualInject{Pick(manual, rng)};
      } else {
        engine::ReplyInThread reply;
        reply.thread_id = "thread-1";
        reply.body = "noted";
        if (Chance(0.5, rng)) reply.as_actor = Pick(def.actors, rng).id;
        step.action = reply;
      }
      team.steps.push_back(std::move(step));
    }
    script.teams.push_back(std::move(team));
  }
  return script;
}

}  // namespace ttx::testing

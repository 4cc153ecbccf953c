#include "ttx/cli/simulate.hpp"

#include <algorithm>
#include <map>

#include "ttx/common/error.hpp"

namespace ttx::cli {

Timestamp DefaultSimulationStart() { return *ParseTimestamp("2024-01-01T09:00:00.000000Z"); }

namespace {

struct QueuedStep {
  Duration at;
  std::size_t team_order;
  std::size_t step_order;
  const BotTeam* team;
  const BotStep* step;
};

void RunStep(engine::ExerciseInstance& instance, const std::string& team_id, const BotStep& step) {
  const std::string& trainee = step.trainee;
  std::visit(
      [&](const auto& action) {
        using T = std::decay_t<decltype(action)>;
        if constexpr (std::is_same_v<T, ClaimStep>) {
          instance.ClaimToken(team_id, trainee);
        } else if constexpr (std::is_same_v<T, ReleaseStep>) {
          instance.ReleaseToken(team_id, trainee);
        } else if constexpr (std::is_same_v<T, engine::InvokeTool> ||
                             std::is_same_v<T, engine::SendEmail>) {
          instance.HandleCommand(team_id, trainee, action);
        } else {
          instance.Instruct(team_id, action);
        }
      },
      step.action);
}

}  // namespace

Simulation RunSimulation(const definition::ExerciseDefinition& def, const BotScript& script,
                         const SimulationOptions& options) {
  if (const auto errors = CheckBotScript(script, def); !errors.empty()) {
    std::string message = "bot script does not match the definition:";
    for (const auto& error : errors) message += "\n" + error;
    throw Error(ErrorCode::kInvalidArgument, message);
  }

  std::vector<std::string> team_ids;
  for (const auto& team : script.teams) team_ids.push_back(team.team_id);
  for (const auto& team : options.teams) {
    if (std::find(team_ids.begin(), team_ids.end(), team) == team_ids.end()) team_ids.push_back(team);
  }
  if (team_ids.empty()) team_ids.push_back("team-1");

  Simulation sim;
  sim.clock = std::make_unique<engine::ScriptedClock>(options.start);
  sim.instance = std::make_unique<engine::ExerciseInstance>(def, team_ids, *sim.clock);
  engine::ExerciseInstance& instance = *sim.instance;
  instance.Start();
  for (const auto& team_id : team_ids) instance.ClaimToken(team_id, std::string(kDefaultTrainee));

  std::vector<QueuedStep> queue;
  for (std::size_t t = 0; t < script.teams.size(); ++t) {
    const BotTeam& team = script.teams[t];
    for (std::size_t s = 0; s < team.steps.size(); ++s) {
      queue.push_back({team.steps[s].at, t, s, &team, &team.steps[s]});
    }
  }
  std::stable_sort(queue.begin(), queue.end(), [](const QueuedStep& a, const QueuedStep& b) {
    if (a.at != b.at) return a.at < b.at;
    if (a.team_order != b.team_order) return a.team_order < b.team_order;
    return a.step_order < b.step_order;
  });

  for (const auto& queued : queue) {
    const Timestamp now = options.start + queued.at;
    if (sim.clock->Now() < now) {
      sim.clock->Set(now);
      instance.AdvanceTime(now);
    }
    try {
      RunStep(instance, queued.team->team_id, *queued.step);
    } catch (const Error& e) {
      std::string where = "team " + queued.team->team_id + ", line " +
                          std::to_string(queued.step->line) + ": " + e.what();
      if (!options.keep_going) throw Error(e.code(), where);
      sim.failed_steps.push_back(std::move(where));
    }
  }
  sim.clock->Set(std::max(sim.clock->Now(), instance.end_time()));
  instance.AdvanceTime(instance.end_time());

  for (const auto& team_id : team_ids) {
    const engine::TeamState state = instance.Snapshot(team_id);
    TeamCoverage coverage;
    coverage.team_id = team_id;
    for (const auto& milestone : def.milestones) {
      (state.IsReached(milestone.id) ? coverage.reached : coverage.missed).push_back(milestone.id);
    }
    coverage.injects_delivered = static_cast<std::int64_t>(state.delivered.size());
    coverage.tool_uses = static_cast<std::int64_t>(state.invocations.size());
    for (const auto& record : instance.Records(team_id, eventlog::Category::kActionLogs)) {
      if (std::get<eventlog::ActionPayload>(record.payload).rejected) ++coverage.rejected;
    }
    sim.coverage.push_back(std::move(coverage));
  }
  return sim;
}

void ExportSimulation(const Simulation& simulation, const std::filesystem::path& directory) {
  for (const auto& team_id : simulation.instance->team_ids()) {
    simulation.instance->ExportTeamLogs(team_id, directory / team_id);
  }
}

}  // namespace ttx::cli

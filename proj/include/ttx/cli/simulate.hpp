#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "ttx/cli/botscript.hpp"
#include "ttx/engine/clock.hpp"
#include "ttx/engine/instance.hpp"

namespace ttx::cli {

// 2024-01-01T09:00:00.000000Z; a fixed default keeps dry runs reproducible.
Timestamp DefaultSimulationStart();

struct SimulationOptions {
  Timestamp start = DefaultSimulationStart();
  // Teams to run in addition to those named by the script. With neither, a
  // single team "team-1" runs.
  std::vector<std::string> teams;
  // Record failing steps in Simulation::failed_steps and continue instead of
  // throwing.
  bool keep_going = false;
};

struct TeamCoverage {
  std::string team_id;
  std::vector<std::string> reached;  // definition order
  std::vector<std::string> missed;
  std::int64_t injects_delivered = 0;
  std::int64_t tool_uses = 0;
  std::int64_t rejected = 0;
};

struct Simulation {
  std::unique_ptr<engine::ScriptedClock> clock;  // outlives `instance`
  std::unique_ptr<engine::ExerciseInstance> instance;
  std::vector<TeamCoverage> coverage;
  std::vector<std::string> failed_steps;  // keep_going only: "team <id>, line <n>: <error>"
};

// Runs the whole exercise on a scripted clock: at every distinct step time the
// clock moves there, due triggers fire, then that time's steps run in team
// order. Finally time advances to the exercise end. Throws Error (with the
// step line) when a step fails, unless `keep_going` is set.
Simulation RunSimulation(const definition::ExerciseDefinition& def, const BotScript& script,
                         const SimulationOptions& options = {});

// Writes `<directory>/<team>/` four files per team.
void ExportSimulation(const Simulation& simulation, const std::filesystem::path& directory);

}  // namespace ttx::cli

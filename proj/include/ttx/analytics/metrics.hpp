#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ttx/definition/model.hpp"
#include "ttx/eventlog/stream.hpp"

namespace ttx::analytics {

// An exact fraction with its integer percentage (rounded half away from zero).
struct Ratio {
  std::int64_t numerator = 0;
  std::int64_t denominator = 1;
  double fraction = 0.0;
  int percent = 0;
};

// 100 * numerator / denominator rounded half away from zero, in exact integer
// arithmetic. Requires denominator > 0.
int RoundedPercent(std::int64_t numerator, std::int64_t denominator);

// Throws Error(kInvalidArgument) if defined <= 0 or reached is outside [0, defined].
Ratio CompletionRatio(std::int64_t reached, std::int64_t defined);

struct ToolCounts {
  std::int64_t correct = 0;
  std::int64_t incorrect = 0;
  std::int64_t total() const { return correct + incorrect; }
  bool operator==(const ToolCounts&) const = default;
};

struct ToolUsage {
  std::map<std::string, ToolCounts> per_tool;
  std::int64_t total = 0;
  std::int64_t correct = 0;
  std::int64_t incorrect = 0;
};

// Counts every non-rejected action record, repeats included.
ToolUsage ToolUsageReport(const std::vector<eventlog::LogRecord>& action_logs);

// Per tool across all teams: incorrect / (correct + incorrect). Tools never
// invoked are absent.
std::map<std::string, Ratio> ToolCorrectnessRates(std::span<const eventlog::TeamLogData> teams);

// Distinct threads holding at least one team-origin message.
std::int64_t EmailThreadCount(const std::vector<eventlog::LogRecord>& emails);

struct MilestoneTimingStats {
  std::string milestone_id;
  std::int64_t reached_count = 0;
  std::int64_t team_count = 0;
  // Minutes from each reaching team's exercise start; absent iff reached_count == 0.
  std::optional<double> min_minutes;
  std::optional<double> mean_minutes;
  std::optional<double> max_minutes;
};

MilestoneTimingStats TimingStats(const std::string& milestone_id,
                                 const std::vector<double>& reach_minutes,
                                 std::int64_t team_count);

// Throws Error(kUnknownMilestone) if the definition lacks `milestone_id`.
MilestoneTimingStats TimeToMilestoneStats(const definition::ExerciseDefinition& def,
                                          const std::string& milestone_id,
                                          std::span<const eventlog::TeamLogData> teams);

struct ReachedMilestone {
  std::string milestone_id;
  Timestamp reached_at;
  double minutes = 0.0;  // from the team's exercise start
};

struct TeamMetrics {
  std::string team_id;
  std::vector<ReachedMilestone> reached;  // defined milestones only, in reach order
  std::optional<Ratio> completion;        // absent when no milestones are defined
  ToolUsage tools;
  std::int64_t email_threads = 0;
  std::int64_t injects_received = 0;
  std::optional<double> time_to_first_milestone;
};

TeamMetrics ComputeTeamMetrics(const definition::ExerciseDefinition& def,
                               const eventlog::TeamLogData& logs);

struct SkippedTeam {
  std::string directory;
  std::string reason;
};

struct ExerciseReport {
  std::string exercise_name;
  std::int64_t defined_milestones = 0;
  std::vector<TeamMetrics> teams;
  std::vector<MilestoneTimingStats> milestones;  // definition order
  std::map<std::string, Ratio> tool_correctness;
  std::optional<double> mean_milestones_reached;
  std::optional<double> mean_tool_uses;
  std::optional<double> mean_email_threads;
  std::vector<std::string> below_average_teams;  // strictly below the mean
  std::vector<std::string> overlooked_milestones;  // reached by no team
  std::vector<SkippedTeam> skipped;
  std::vector<std::string> warnings;
};

// Teams with a missing stream file are skipped and listed; a team id seen twice
// keeps its first directory.
ExerciseReport BuildReport(const definition::ExerciseDefinition& def,
                           const std::vector<eventlog::TeamLogData>& teams);

}  // namespace ttx::analytics

#include "ttx/analytics/metrics.hpp"

#include <algorithm>
#include <set>

#include "ttx/common/error.hpp"

namespace ttx::analytics {

using eventlog::Category;
using eventlog::LogRecord;
using eventlog::TeamLogData;

int RoundedPercent(std::int64_t numerator, std::int64_t denominator) {
  if (denominator <= 0) throw Error(ErrorCode::kInvalidArgument, "denominator must be positive");
  // round(100 n / d) with halves away from zero: floor((200 n + d) / 2d) for n >= 0.
  const std::int64_t scaled = 200 * (numerator < 0 ? -numerator : numerator) + denominator;
  const auto magnitude = static_cast<int>(scaled / (2 * denominator));
  return numerator < 0 ? -magnitude : magnitude;
}

namespace {

Ratio MakeRatio(std::int64_t numerator, std::int64_t denominator) {
  return {numerator, denominator,
          static_cast<double>(numerator) / static_cast<double>(denominator),
          RoundedPercent(numerator, denominator)};
}

double Mean(const std::vector<double>& values) {
  double sum = 0.0;
  for (const double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

}  // namespace

Ratio CompletionRatio(std::int64_t reached, std::int64_t defined) {
  if (defined <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "completion ratio needs at least one defined milestone");
  }
  if (reached < 0 || reached > defined) {
    throw Error(ErrorCode::kInvalidArgument, "reached count " + std::to_string(reached) +
                                                 " outside [0, " + std::to_string(defined) + "]");
  }
  return MakeRatio(reached, defined);
}

ToolUsage ToolUsageReport(const std::vector<LogRecord>& action_logs) {
  ToolUsage usage;
  for (const auto& record : action_logs) {
    const auto* action = std::get_if<eventlog::ActionPayload>(&record.payload);
    if (action == nullptr || action->rejected) continue;
    ToolCounts& counts = usage.per_tool[action->tool_id];
    if (action->classification == "correct") {
      ++counts.correct;
      ++usage.correct;
    } else {
      ++counts.incorrect;
      ++usage.incorrect;
    }
    ++usage.total;
  }
  return usage;
}

std::map<std::string, Ratio> ToolCorrectnessRates(std::span<const TeamLogData> teams) {
  std::map<std::string, ToolCounts> totals;
  for (const auto& team : teams) {
    for (const auto& [tool, counts] : ToolUsageReport(team.stream(Category::kActionLogs)).per_tool) {
      totals[tool].correct += counts.correct;
      totals[tool].incorrect += counts.incorrect;
    }
  }
  std::map<std::string, Ratio> rates;
  for (const auto& [tool, counts] : totals) {
    if (counts.total() > 0) rates[tool] = MakeRatio(counts.incorrect, counts.total());
  }
  return rates;
}

std::int64_t EmailThreadCount(const std::vector<LogRecord>& emails) {
  std::set<std::string> threads;
  for (const auto& record : emails) {
    const auto* email = std::get_if<eventlog::EmailPayload>(&record.payload);
    if (email != nullptr && email->origin == "team") threads.insert(email->thread_id);
  }
  return static_cast<std::int64_t>(threads.size());
}

MilestoneTimingStats TimingStats(const std::string& milestone_id,
                                 const std::vector<double>& reach_minutes,
                                 std::int64_t team_count) {
  MilestoneTimingStats stats;
  stats.milestone_id = milestone_id;
  stats.team_count = team_count;
  stats.reached_count = static_cast<std::int64_t>(reach_minutes.size());
  if (!reach_minutes.empty()) {
    const auto [lo, hi] = std::minmax_element(reach_minutes.begin(), reach_minutes.end());
    stats.min_minutes = *lo;
    stats.max_minutes = *hi;
    // Clamp so floating-point summation cannot push the mean outside [min, max].
    stats.mean_minutes = std::clamp(Mean(reach_minutes), *lo, *hi);
  }
  return stats;
}

namespace {

// First reach per milestone id, in stream order.
std::vector<ReachedMilestone> ReachedFromLogs(const TeamLogData& logs) {
  std::vector<ReachedMilestone> reached;
  std::set<std::string> seen;
  for (const auto& record : logs.stream(Category::kMilestones)) {
    const auto* payload = std::get_if<eventlog::MilestonePayload>(&record.payload);
    if (payload == nullptr || !seen.insert(payload->milestone_id).second) continue;
    reached.push_back({payload->milestone_id, payload->reached_at,
                       MinutesBetween(payload->exercise_start, payload->reached_at)});
  }
  return reached;
}

}  // namespace

MilestoneTimingStats TimeToMilestoneStats(const definition::ExerciseDefinition& def,
                                          const std::string& milestone_id,
                                          std::span<const TeamLogData> teams) {
  if (def.FindMilestone(milestone_id) == nullptr) {
    throw Error(ErrorCode::kUnknownMilestone, "unknown milestone '" + milestone_id + "'");
  }
  std::vector<double> minutes;
  for (const auto& team : teams) {
    for (const auto& reach : ReachedFromLogs(team)) {
      if (reach.milestone_id == milestone_id) minutes.push_back(reach.minutes);
    }
  }
  return TimingStats(milestone_id, minutes, static_cast<std::int64_t>(teams.size()));
}

TeamMetrics ComputeTeamMetrics(const definition::ExerciseDefinition& def, const TeamLogData& logs) {
  TeamMetrics metrics;
  metrics.team_id = logs.team_id;
  for (auto& reach : ReachedFromLogs(logs)) {
    if (def.FindMilestone(reach.milestone_id) != nullptr) metrics.reached.push_back(std::move(reach));
  }
  const auto defined = static_cast<std::int64_t>(def.milestones.size());
  if (defined > 0) {
    metrics.completion = CompletionRatio(static_cast<std::int64_t>(metrics.reached.size()), defined);
  }
  for (const auto& reach : metrics.reached) {
    if (!metrics.time_to_first_milestone || reach.minutes < *metrics.time_to_first_milestone) {
      metrics.time_to_first_milestone = reach.minutes;
    }
  }
  metrics.tools = ToolUsageReport(logs.stream(Category::kActionLogs));
  metrics.email_threads = EmailThreadCount(logs.stream(Category::kEmails));
  for (const auto& record : logs.stream(Category::kInjectCategories)) {
    const auto* inject = std::get_if<eventlog::InjectPayload>(&record.payload);
    if (inject != nullptr && inject->status == "delivered") ++metrics.injects_received;
  }
  return metrics;
}

ExerciseReport BuildReport(const definition::ExerciseDefinition& def,
                           const std::vector<TeamLogData>& teams) {
  ExerciseReport report;
  report.exercise_name = def.name;
  report.defined_milestones = static_cast<std::int64_t>(def.milestones.size());

  std::vector<TeamLogData> included;
  std::set<std::string> seen_teams;
  for (const auto& team : teams) {
    const std::string directory = team.directory.string();
    if (!team.missing_files.empty()) {
      std::string missing;
      for (const auto& name : team.missing_files) missing += (missing.empty() ? "" : ", ") + name;
      report.skipped.push_back({directory, "missing stream file(s): " + missing});
      continue;
    }
    if (!seen_teams.insert(team.team_id).second) {
      report.skipped.push_back({directory, "duplicate team id '" + team.team_id + "'"});
      continue;
    }
    for (const auto& error : team.errors) report.warnings.push_back(directory + ": " + error);
    for (const auto& record : team.stream(Category::kMilestones)) {
      const auto& payload = std::get<eventlog::MilestonePayload>(record.payload);
      if (def.FindMilestone(payload.milestone_id) == nullptr) {
        report.warnings.push_back(directory + ": milestone '" + payload.milestone_id +
                                  "' is not in the definition");
      }
    }
    included.push_back(team);
  }

  for (const auto& team : included) report.teams.push_back(ComputeTeamMetrics(def, team));
  for (const auto& milestone : def.milestones) {
    report.milestones.push_back(TimeToMilestoneStats(def, milestone.id, included));
    if (report.milestones.back().reached_count == 0) {
      report.overlooked_milestones.push_back(milestone.id);
    }
  }
  report.tool_correctness = ToolCorrectnessRates(included);

  if (!report.teams.empty()) {
    const auto n = static_cast<std::int64_t>(report.teams.size());
    std::int64_t milestone_sum = 0;
    std::int64_t tool_sum = 0;
    std::int64_t thread_sum = 0;
    for (const auto& team : report.teams) {
      milestone_sum += static_cast<std::int64_t>(team.reached.size());
      tool_sum += team.tools.total;
      thread_sum += team.email_threads;
    }
    report.mean_milestones_reached = static_cast<double>(milestone_sum) / static_cast<double>(n);
    report.mean_tool_uses = static_cast<double>(tool_sum) / static_cast<double>(n);
    report.mean_email_threads = static_cast<double>(thread_sum) / static_cast<double>(n);
    // count < sum / n, compared exactly as count * n < sum.
    for (const auto& team : report.teams) {
      if (static_cast<std::int64_t>(team.reached.size()) * n < milestone_sum) {
        report.below_average_teams.push_back(team.team_id);
      }
    }
  }
  return report;
}

}  // namespace ttx::analytics

#include "ttx/analytics/render.hpp"

#include <cstdio>
#include <sstream>

namespace ttx::analytics {

using nlohmann::ordered_json;

namespace {

ordered_json RatioJson(const Ratio& ratio) {
  ordered_json out;
  out["numerator"] = ratio.numerator;
  out["denominator"] = ratio.denominator;
  out["fraction"] = ratio.fraction;
  out["percent"] = ratio.percent;
  return out;
}

void PutOptional(ordered_json& out, const char* key, const std::optional<double>& value) {
  if (value) out[key] = *value;
}

std::string Fixed(double value, int decimals = 2) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.*f", decimals, value);
  return buffer;
}

std::string Pad(std::string text, std::size_t width) {
  if (text.size() < width) text.append(width - text.size(), ' ');
  return text;
}

std::string Join(const std::vector<std::string>& items) {
  if (items.empty()) return "(none)";
  std::string out;
  for (const auto& item : items) out += (out.empty() ? "" : ", ") + item;
  return out;
}

}  // namespace

ordered_json ToJson(const ExerciseReport& report) {
  ordered_json out;
  out["exercise"] = report.exercise_name;
  out["defined_milestones"] = report.defined_milestones;
  out["team_count"] = report.teams.size();
  PutOptional(out, "mean_milestones_reached", report.mean_milestones_reached);
  PutOptional(out, "mean_tool_uses", report.mean_tool_uses);
  PutOptional(out, "mean_email_threads", report.mean_email_threads);
  out["below_average_teams"] = report.below_average_teams;
  out["overlooked_milestones"] = report.overlooked_milestones;

  out["teams"] = ordered_json::array();
  for (const auto& team : report.teams) {
    ordered_json t;
    t["team_id"] = team.team_id;
    t["milestones_reached"] = team.reached.size();
    if (team.completion) t["completion"] = RatioJson(*team.completion);
    t["reached"] = ordered_json::array();
    for (const auto& reach : team.reached) {
      ordered_json r;
      r["milestone_id"] = reach.milestone_id;
      r["reached_at"] = FormatTimestamp(reach.reached_at);
      r["minutes"] = reach.minutes;
      t["reached"].push_back(std::move(r));
    }
    PutOptional(t, "time_to_first_milestone_minutes", team.time_to_first_milestone);
    t["tool_uses_total"] = team.tools.total;
    t["tool_uses_correct"] = team.tools.correct;
    t["tool_uses_incorrect"] = team.tools.incorrect;
    t["tools"] = ordered_json::object();
    for (const auto& [tool, counts] : team.tools.per_tool) {
      t["tools"][tool] = {{"correct", counts.correct},
                          {"incorrect", counts.incorrect},
                          {"total", counts.total()}};
    }
    t["email_threads"] = team.email_threads;
    t["injects_received"] = team.injects_received;
    out["teams"].push_back(std::move(t));
  }

  out["milestones"] = ordered_json::array();
  for (const auto& stats : report.milestones) {
    ordered_json m;
    m["milestone_id"] = stats.milestone_id;
    m["reached_count"] = stats.reached_count;
    m["team_count"] = stats.team_count;
    PutOptional(m, "min_minutes", stats.min_minutes);
    PutOptional(m, "mean_minutes", stats.mean_minutes);
    PutOptional(m, "max_minutes", stats.max_minutes);
    out["milestones"].push_back(std::move(m));
  }

  out["tool_correctness"] = ordered_json::array();
  for (const auto& [tool, rate] : report.tool_correctness) {
    ordered_json r;
    r["tool_id"] = tool;
    r["incorrect"] = rate.numerator;
    r["total"] = rate.denominator;
    r["incorrect_fraction"] = rate.fraction;
    r["incorrect_percent"] = rate.percent;
    out["tool_correctness"].push_back(std::move(r));
  }

  out["skipped"] = ordered_json::array();
  for (const auto& skipped : report.skipped) {
    out["skipped"].push_back({{"directory", skipped.directory}, {"reason", skipped.reason}});
  }
  out["warnings"] = report.warnings;
  return out;
}

std::string RenderText(const ExerciseReport& report) {
  std::ostringstream out;
  out << "Exercise: " << report.exercise_name << "\n";
  out << "Teams: " << report.teams.size() << ", defined milestones: " << report.defined_milestones
      << "\n\n";

  out << Pad("team", 16) << Pad("milestones", 12) << Pad("completion", 12) << Pad("tool uses", 11)
      << Pad("correct", 9) << Pad("threads", 9) << "first milestone (min)\n";
  for (const auto& team : report.teams) {
    out << Pad(team.team_id, 16) << Pad(std::to_string(team.reached.size()), 12)
        << Pad(team.completion ? std::to_string(team.completion->percent) + "%" : "-", 12)
        << Pad(std::to_string(team.tools.total), 11) << Pad(std::to_string(team.tools.correct), 9)
        << Pad(std::to_string(team.email_threads), 9)
        << (team.time_to_first_milestone ? Fixed(*team.time_to_first_milestone) : "-") << "\n";
  }
  out << "\n";
  if (report.mean_milestones_reached) {
    out << "Mean milestones reached: " << Fixed(*report.mean_milestones_reached) << "\n";
    out << "Mean tool uses: " << Fixed(*report.mean_tool_uses) << "\n";
    out << "Mean email threads: " << Fixed(*report.mean_email_threads) << "\n";
  }
  out << "Below-average teams: " << Join(report.below_average_teams) << "\n";
  out << "Overlooked milestones: " << Join(report.overlooked_milestones) << "\n\n";

  out << Pad("milestone", 28) << Pad("reached", 10) << Pad("min", 9) << Pad("mean", 9) << "max\n";
  for (const auto& stats : report.milestones) {
    out << Pad(stats.milestone_id, 28)
        << Pad(std::to_string(stats.reached_count) + "/" + std::to_string(stats.team_count), 10);
    if (stats.reached_count > 0) {
      out << Pad(Fixed(*stats.min_minutes), 9) << Pad(Fixed(*stats.mean_minutes), 9)
          << Fixed(*stats.max_minutes);
    } else {
      out << Pad("-", 9) << Pad("-", 9) << "-";
    }
    out << "\n";
  }

  if (!report.tool_correctness.empty()) {
    out << "\n" << Pad("tool", 28) << Pad("incorrect", 12) << "error rate\n";
    for (const auto& [tool, rate] : report.tool_correctness) {
      out << Pad(tool, 28)
          << Pad(std::to_string(rate.numerator) + "/" + std::to_string(rate.denominator), 12)
          << rate.percent << "%\n";
    }
  }
  for (const auto& skipped : report.skipped) {
    out << "\nskipped " << skipped.directory << ": " << skipped.reason;
  }
  for (const auto& warning : report.warnings) out << "\nwarning: " << warning;
  if (!report.skipped.empty() || !report.warnings.empty()) out << "\n";
  return out.str();
}

}  // namespace ttx::analytics

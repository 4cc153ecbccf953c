#include "oracle.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

namespace ttx::oracle {

namespace {

// Days since 1970-01-01 for a proleptic Gregorian date.
long long DaysFromCivil(long long y, unsigned m, unsigned d) {
  y -= m <= 2;
  const long long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long long>(doe) - 719468;
}

std::vector<nlohmann::json> Lines(const std::filesystem::path& file, bool& present) {
  std::vector<nlohmann::json> out;
  std::ifstream in(file);
  present = static_cast<bool>(in);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto value = nlohmann::json::parse(line, nullptr, false);
    if (value.is_object()) out.push_back(std::move(value));
  }
  return out;
}

}  // namespace

std::optional<long long> ParseUtcMicros(const std::string& text) {
  if (text.size() != 27) return std::nullopt;
  static const char kShape[] = "dddd-dd-ddTdd:dd:dd.ddddddZ";
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (kShape[i] == 'd' ? !std::isdigit(static_cast<unsigned char>(text[i])) : text[i] != kShape[i]) {
      return std::nullopt;
    }
  }
  int y, mo, d, h, mi, s;
  long us;
  if (std::sscanf(text.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d.%6ldZ", &y, &mo, &d, &h, &mi, &s, &us) != 7) {
    return std::nullopt;
  }
  const long long days = DaysFromCivil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d));
  return ((days * 24 + h) * 60 + mi) * 60'000'000LL + s * 1'000'000LL + us;
}

int Percent(long numerator, long denominator) {
  return static_cast<int>(std::floor(100.0 * numerator / denominator + 0.5));
}

TeamScan ScanTeam(const std::filesystem::path& directory,
                  const std::vector<std::string>& milestone_ids) {
  TeamScan scan;
  scan.team_id = directory.filename().string();
  const std::set<std::string> defined(milestone_ids.begin(), milestone_ids.end());
  bool present = false;

  for (const auto& line : Lines(directory / "milestones.jsonl", present)) {
    if (line.contains("team_id")) scan.team_id = line["team_id"];
    const std::string id = line.value("milestone_id", "");
    if (!defined.count(id) || scan.reached_minutes.count(id)) continue;
    const auto reached = ParseUtcMicros(line.value("reached_at", ""));
    const auto start = ParseUtcMicros(line.value("exercise_start", ""));
    if (!reached || !start) continue;
    const double minutes = static_cast<double>(*reached - *start) / 60e6;
    scan.reached_minutes[id] = minutes;
    if (!scan.first_milestone_minutes || minutes < *scan.first_milestone_minutes) {
      scan.first_milestone_minutes = minutes;
    }
  }
  scan.complete = scan.complete && present;

  for (const auto& line : Lines(directory / "action_logs.jsonl", present)) {
    if (line.value("rejected", false)) {
      ++scan.rejected;
      continue;
    }
    const std::string tool = line.value("tool_id", "");
    const std::string classification = line.value("classification", "");
    ++scan.tool_total;
    if (classification == "correct") {
      ++scan.tool_correct;
      ++scan.tools[tool].correct;
    } else {
      ++scan.tool_incorrect;
      ++scan.tools[tool].incorrect;
    }
  }
  scan.complete = scan.complete && present;

  for (const auto& line : Lines(directory / "emails.jsonl", present)) {
    if (line.value("origin", "") == "team") scan.team_threads.insert(line.value("thread_id", ""));
  }
  scan.complete = scan.complete && present;

  for (const auto& line : Lines(directory / "inject_categories.jsonl", present)) {
    if (line.value("status", "") == "delivered") ++scan.injects_delivered;
  }
  scan.complete = scan.complete && present;
  return scan;
}

ExerciseScan ScanExercise(const std::vector<std::filesystem::path>& team_directories,
                          const std::vector<std::string>& milestone_ids) {
  ExerciseScan out;
  for (const auto& directory : team_directories) {
    TeamScan team = ScanTeam(directory, milestone_ids);
    if (team.complete) out.teams.push_back(std::move(team));
  }
  if (out.teams.empty()) return out;
  const double n = static_cast<double>(out.teams.size());

  double reached_sum = 0, tools_sum = 0, threads_sum = 0;
  for (const auto& team : out.teams) {
    reached_sum += static_cast<double>(team.reached_minutes.size());
    tools_sum += static_cast<double>(team.tool_total);
    threads_sum += static_cast<double>(team.team_threads.size());
    for (const auto& [tool, tally] : team.tools) {
      out.tools[tool].correct += tally.correct;
      out.tools[tool].incorrect += tally.incorrect;
    }
  }
  out.mean_reached = reached_sum / n;
  out.mean_tool_uses = tools_sum / n;
  out.mean_threads = threads_sum / n;
  for (const auto& team : out.teams) {
    if (static_cast<double>(team.reached_minutes.size()) < out.mean_reached) {
      out.below_average.push_back(team.team_id);
    }
  }

  for (const auto& id : milestone_ids) {
    MilestoneSummary summary;
    double total = 0;
    for (const auto& team : out.teams) {
      const auto it = team.reached_minutes.find(id);
      if (it == team.reached_minutes.end()) continue;
      ++summary.reached;
      total += it->second;
      summary.min = summary.min ? std::min(*summary.min, it->second) : it->second;
      summary.max = summary.max ? std::max(*summary.max, it->second) : it->second;
    }
    if (summary.reached > 0) {
      summary.mean = total / static_cast<double>(summary.reached);
    } else {
      out.overlooked.push_back(id);
    }
    out.milestones[id] = summary;
  }
  return out;
}

}  // namespace ttx::oracle

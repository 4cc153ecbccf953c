#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "oracle.hpp"
#include "random_script.hpp"
#include "ttx/analytics/metrics.hpp"
#include "ttx/analytics/render.hpp"
#include "ttx/cli/simulate.hpp"
#include "ttx/common/error.hpp"

namespace ttx::analytics {
namespace {

using eventlog::ActionPayload;
using eventlog::Category;
using eventlog::EmailPayload;
using eventlog::LogRecord;
using eventlog::MilestonePayload;
using eventlog::TeamLogData;
using testing::T0;

LogRecord ActionRecord(const std::string& tool, const std::string& classification,
                       bool rejected = false) {
  ActionPayload payload;
  payload.tool_id = tool;
  payload.classification = classification;
  payload.rejected = rejected;
  return {T0(), "t", payload};
}

LogRecord EmailRecord(const std::string& thread, const std::string& origin) {
  return {T0(), "t", EmailPayload{thread, origin == "team" ? "t" : "x@y.example", {}, "s", "b", origin}};
}

definition::ExerciseDefinition DefinitionWithMilestones(int count) {
  definition::ExerciseDefinition def;
  def.name = "Fixture";
  def.duration_minutes = 120;
  def.injects.push_back({"i", "system", "", "body", definition::AtTime{0}});
  for (int i = 0; i < count; ++i) {
    def.milestones.push_back({"m" + std::to_string(i), "", {definition::InjectReceived{"i"}}});
  }
  return def;
}

TeamLogData TeamReaching(const std::string& team, int reached, double first_minute = 1) {
  TeamLogData data;
  data.team_id = team;
  for (int i = 0; i < reached; ++i) {
    const Timestamp at = T0() + std::chrono::duration_cast<Duration>(
                                    std::chrono::duration<double, std::ratio<60>>(first_minute + i));
    data.streams[static_cast<std::size_t>(Category::kMilestones)].push_back(
        {at, team, MilestonePayload{"m" + std::to_string(i), at, T0()}});
  }
  return data;
}

TEST(CompletionRatio, PublishedValues) {
  EXPECT_EQ(CompletionRatio(10, 14).percent, 71);
  EXPECT_EQ(CompletionRatio(8, 14).percent, 57);
  EXPECT_EQ(CompletionRatio(0, 14).percent, 0);
  EXPECT_EQ(CompletionRatio(14, 14).percent, 100);
  const auto ratio = CompletionRatio(10, 14);
  EXPECT_EQ(ratio.numerator, 10);
  EXPECT_EQ(ratio.denominator, 14);
  EXPECT_DOUBLE_EQ(ratio.fraction, 10.0 / 14.0);
}

TEST(CompletionRatio, Preconditions) {
  EXPECT_THROW(CompletionRatio(1, 0), Error);
  EXPECT_THROW(CompletionRatio(-1, 5), Error);
  EXPECT_THROW(CompletionRatio(6, 5), Error);
}

TEST(RoundedPercent, HalvesRoundAwayFromZero) {
  EXPECT_EQ(RoundedPercent(1, 8), 13);   // 12.5
  EXPECT_EQ(RoundedPercent(3, 8), 38);   // 37.5
  EXPECT_EQ(RoundedPercent(1, 200), 1);  // 0.5
  EXPECT_EQ(RoundedPercent(1, 3), 33);
  EXPECT_EQ(RoundedPercent(2, 3), 67);
  // Agrees with the floating-point oracle wherever no exact half is involved.
  for (long d = 1; d <= 300; ++d) {
    for (long n = 0; n <= d; ++n) {
      if ((200 * n) % (2 * d) == d) continue;  // exact .5: float rounding is not trustworthy
      ASSERT_EQ(RoundedPercent(n, d), oracle::Percent(n, d)) << n << "/" << d;
    }
  }
}

TEST(TimingStats, PublishedEndpoints) {
  const auto stats = TimingStats("visit", {8.0, 15.0, 30.0}, 9);
  EXPECT_EQ(stats.reached_count, 3);
  EXPECT_EQ(stats.team_count, 9);
  EXPECT_DOUBLE_EQ(*stats.min_minutes, 8.0);
  EXPECT_DOUBLE_EQ(*stats.max_minutes, 30.0);
  EXPECT_NEAR(*stats.mean_minutes, 17.67, 0.01);
}

TEST(TimingStats, SingletonAndEmpty) {
  const auto one = TimingStats("m", {8.0}, 1);
  EXPECT_EQ(*one.min_minutes, 8.0);
  EXPECT_EQ(*one.mean_minutes, 8.0);
  EXPECT_EQ(*one.max_minutes, 8.0);
  const auto none = TimingStats("m", {}, 4);
  EXPECT_EQ(none.reached_count, 0);
  EXPECT_FALSE(none.min_minutes || none.mean_minutes || none.max_minutes);
}

TEST(TimingStats, MeanBetweenBoundsOnRandomInput) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 2000; ++i) {
    std::vector<double> values(std::uniform_int_distribution<std::size_t>(1, 12)(rng));
    for (auto& v : values) v = std::uniform_real_distribution<double>(0, 120)(rng);
    if (i % 7 == 0) std::fill(values.begin(), values.end(), 33.3);
    const auto stats = TimingStats("m", values, 12);
    ASSERT_LE(*stats.min_minutes, *stats.mean_minutes);
    ASSERT_LE(*stats.mean_minutes, *stats.max_minutes);
  }
}

TEST(TimeToMilestoneStats, UnknownMilestoneThrows) {
  const auto def = DefinitionWithMilestones(2);
  std::vector<TeamLogData> teams = {TeamReaching("a", 1, 8)};
  try {
    TimeToMilestoneStats(def, "nope", teams);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownMilestone);
  }
  const auto stats = TimeToMilestoneStats(def, "m0", teams);
  EXPECT_EQ(stats.reached_count, 1);
  EXPECT_DOUBLE_EQ(*stats.min_minutes, 8.0);
}

TEST(ToolUsageReport, CountsRepeatsAndExcludesRejected) {
  std::vector<LogRecord> actions = {
      ActionRecord("dns_lookup", "correct"),        ActionRecord("dns_lookup", "incorrect"),
      ActionRecord("dns_lookup", "correct"),        ActionRecord("block_traffic_from", "correct"),
      ActionRecord("block_traffic_from", "correct"), ActionRecord("dns_lookup", "not_classified", true)};
  const auto usage = ToolUsageReport(actions);
  EXPECT_EQ(usage.total, 5);
  EXPECT_EQ(usage.correct, 4);
  EXPECT_EQ(usage.incorrect, 1);
  EXPECT_EQ(usage.per_tool.at("dns_lookup"), (ToolCounts{2, 1}));
  EXPECT_EQ(usage.per_tool.at("block_traffic_from"), (ToolCounts{2, 0}));

  EXPECT_EQ(ToolUsageReport({}).total, 0);
  const auto only_rejected = ToolUsageReport({ActionRecord("dns_lookup", "not_classified", true)});
  EXPECT_EQ(only_rejected.total, 0);
  EXPECT_TRUE(only_rejected.per_tool.empty());
}

TEST(ToolCorrectnessRates, FractionsAndAbsence) {
  std::vector<TeamLogData> teams(2);
  auto& a = teams[0].streams[static_cast<std::size_t>(Category::kActionLogs)];
  auto& b = teams[1].streams[static_cast<std::size_t>(Category::kActionLogs)];
  for (int i = 0; i < 6; ++i) a.push_back(ActionRecord("dns_lookup", i < 2 ? "incorrect" : "correct"));
  for (int i = 0; i < 4; ++i) b.push_back(ActionRecord("dns_lookup", i < 2 ? "incorrect" : "correct"));
  for (int i = 0; i < 7; ++i) b.push_back(ActionRecord("browser", "correct"));
  const auto rates = ToolCorrectnessRates(teams);
  EXPECT_EQ(rates.at("dns_lookup").numerator, 4);
  EXPECT_EQ(rates.at("dns_lookup").denominator, 10);
  EXPECT_EQ(rates.at("dns_lookup").percent, 40);
  EXPECT_EQ(rates.at("browser").percent, 0);
  EXPECT_FALSE(rates.count("whois"));
}

TEST(EmailThreadCount, ParticipationRule) {
  std::vector<LogRecord> nine;
  for (int i = 1; i <= 9; ++i) nine.push_back(EmailRecord("thread-" + std::to_string(i), "team"));
  nine.push_back(EmailRecord("thread-3", "actor"));
  EXPECT_EQ(EmailThreadCount(nine), 9);
  EXPECT_EQ(EmailThreadCount({EmailRecord("thread-1", "team"), EmailRecord("thread-1", "team"),
                              EmailRecord("thread-1", "team")}),
            1);
  EXPECT_EQ(EmailThreadCount({EmailRecord("thread-1", "actor"), EmailRecord("thread-2", "instructor")}),
            0);
}

TEST(BuildReport, NineTeamFixture) {
  const auto def = DefinitionWithMilestones(14);
  const std::vector<int> counts = {12, 12, 11, 11, 10, 10, 10, 9, 5};
  std::vector<TeamLogData> teams;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    teams.push_back(TeamReaching("team-" + std::to_string(i + 1), counts[i]));
  }
  const auto report = BuildReport(def, teams);
  ASSERT_EQ(report.teams.size(), 9u);
  EXPECT_DOUBLE_EQ(*report.mean_milestones_reached, 10.0);
  EXPECT_EQ(report.below_average_teams, (std::vector<std::string>{"team-8", "team-9"}));
  EXPECT_EQ(report.overlooked_milestones, (std::vector<std::string>{"m12", "m13"}));
  EXPECT_EQ(report.teams[0].completion->percent, 86);
  EXPECT_EQ(CompletionRatio(10, 14).percent, 71);
  // Sum consistency: per-milestone reached counts equal team indicators.
  std::int64_t indicator_sum = 0, reached_sum = 0;
  for (const auto& team : report.teams) indicator_sum += static_cast<std::int64_t>(team.reached.size());
  for (const auto& milestone : report.milestones) reached_sum += milestone.reached_count;
  EXPECT_EQ(indicator_sum, reached_sum);
}

TEST(BuildReport, SingleTeamSingleMilestone) {
  const auto def = DefinitionWithMilestones(1);
  const auto report = BuildReport(def, {TeamReaching("solo", 1)});
  ASSERT_EQ(report.teams.size(), 1u);
  EXPECT_TRUE(report.below_average_teams.empty());
  EXPECT_TRUE(report.overlooked_milestones.empty());
  EXPECT_EQ(*report.mean_milestones_reached, 1.0);
}

TEST(BuildReport, SkipsIncompleteAndDuplicateTeams) {
  const auto def = DefinitionWithMilestones(3);
  auto missing = TeamReaching("broken", 1);
  missing.missing_files = {"emails.jsonl"};
  missing.directory = "/logs/broken";
  auto dup = TeamReaching("a", 3);
  dup.directory = "/logs/a-copy";
  const auto report = BuildReport(def, {TeamReaching("a", 2), missing, dup});
  ASSERT_EQ(report.teams.size(), 1u);
  EXPECT_EQ(report.teams[0].reached.size(), 2u);
  EXPECT_EQ(report.skipped.size(), 2u);
}

TEST(BuildReport, IgnoresUndefinedMilestonesAndIsIdempotent) {
  const auto def = DefinitionWithMilestones(2);
  auto team = TeamReaching("a", 2);
  team.streams[static_cast<std::size_t>(Category::kMilestones)].push_back(
      {T0() + Minutes(5), "a", MilestonePayload{"retired", T0() + Minutes(5), T0()}});
  const auto first = BuildReport(def, {team});
  EXPECT_EQ(first.teams[0].reached.size(), 2u);
  EXPECT_EQ(ToJson(first).dump(), ToJson(BuildReport(def, {team})).dump());
}

TEST(Render, JsonAndTextShapes) {
  const auto def = DefinitionWithMilestones(3);
  const auto report = BuildReport(def, {TeamReaching("alpha", 2, 8), TeamReaching("beta", 1, 30)});
  const auto json = ToJson(report);
  EXPECT_EQ(json["team_count"], 2);
  EXPECT_EQ(json["defined_milestones"], 3);
  EXPECT_EQ(json["teams"][0]["completion"]["percent"], 67);
  EXPECT_EQ(json["milestones"][0]["min_minutes"], 8.0);
  EXPECT_FALSE(json["milestones"][2].contains("mean_minutes"));
  EXPECT_EQ(json["overlooked_milestones"], nlohmann::ordered_json::array({"m2"}));
  const std::string text = RenderText(report);
  EXPECT_NE(text.find("alpha"), std::string::npos);
  EXPECT_NE(text.find("Overlooked milestones: m2"), std::string::npos);
}

// Oracle equivalence on simulated demo runs.
TEST(OracleEquivalence, RandomSimulatedRuns) {
  const auto def = testing::LoadDemo();
  std::vector<std::string> milestone_ids;
  for (const auto& m : def.milestones) milestone_ids.push_back(m.id);
  std::mt19937_64 rng(2024);
  for (int run = 0; run < 25; ++run) {
    const auto script = testing::RandomScript(def, rng);
    cli::SimulationOptions options;
    options.keep_going = true;
    const auto sim = cli::RunSimulation(def, script, options);
    testing::TempDir dir;
    cli::ExportSimulation(sim, dir.path());
    std::vector<std::filesystem::path> dirs;
    std::vector<TeamLogData> logs;
    for (const auto& team : sim.instance->team_ids()) {
      dirs.push_back(dir / team);
      logs.push_back(eventlog::ReadTeamLogs(dir / team));
    }
    const auto report = BuildReport(def, logs);
    const auto expected = oracle::ScanExercise(dirs, milestone_ids);
    ASSERT_EQ(report.teams.size(), expected.teams.size());
    for (std::size_t i = 0; i < report.teams.size(); ++i) {
      const auto& got = report.teams[i];
      const auto& want = expected.teams[i];
      ASSERT_EQ(got.team_id, want.team_id);
      ASSERT_EQ(got.reached.size(), want.reached_minutes.size());
      ASSERT_EQ(got.tools.total, want.tool_total);
      ASSERT_EQ(got.tools.incorrect, want.tool_incorrect);
      ASSERT_EQ(got.email_threads, static_cast<std::int64_t>(want.team_threads.size()));
      ASSERT_EQ(got.injects_received, want.injects_delivered);
      ASSERT_EQ(got.completion->percent,
                oracle::Percent(static_cast<long>(want.reached_minutes.size()), 22));
    }
    ASSERT_NEAR(*report.mean_milestones_reached, expected.mean_reached, 1e-9);
    ASSERT_EQ(report.below_average_teams, expected.below_average);
    ASSERT_EQ(report.overlooked_milestones, expected.overlooked);
  }
}

}  // namespace
}  // namespace ttx::analytics

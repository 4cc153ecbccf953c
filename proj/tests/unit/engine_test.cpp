#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <thread>

#include "fixtures.hpp"
#include "random_script.hpp"
#include "ttx/cli/botscript.hpp"
#include "ttx/cli/simulate.hpp"
#include "ttx/common/error.hpp"
#include "ttx/engine/instance.hpp"
#include "ttx/engine/milestones.hpp"
#include "ttx/engine/replay.hpp"

namespace ttx::engine {
namespace {

using eventlog::Category;
using testing::T0;

constexpr std::string_view kFixture = R"(
exercise: {name: Engine fixture, duration_minutes: 60}
actors:
  - id: manager
    email: manager@corp.example
    auto_replies:
      - {keywords: [status], reply: manager_reply, delay_minutes: 2}
injects:
  - {id: intro, body: Start, trigger: {type: at_time, minute: 0}}
  - {id: alert_b, body: B, trigger: {type: at_time, minute: 20}}
  - {id: alert_a, body: A, trigger: {type: at_time, minute: 20}}
  - {id: nag, body: Block it, trigger: {type: if_milestone_missing, milestone: blocked, deadline_minute: 30}}
  - {id: praise, sender: manager, body: Good, trigger: {type: after_milestone, milestone: blocked, delay_minutes: 5}}
  - {id: manager_reply, sender: manager, body: Thanks for the status, trigger: {type: manual}}
  - {id: hint, body: Try blocking, trigger: {type: manual}}
  - {id: too_late, body: Never seen, trigger: {type: after_milestone, milestone: reported, delay_minutes: 100}}
  - {id: unlock, body: Scanner ready, trigger: {type: on_email_to, actor: manager, delay_minutes: 1}}
tools:
  - builtin: block_traffic_from
  - builtin: dns_lookup
  - id: scanner
    name: Scanner
    arguments: [{name: host, pattern: "[a-z]+"}]
    response: "scanned {{host}}"
    unlocked_by: unlock
milestones:
  - {id: blocked, condition: {tool_used: block_traffic_from, arguments: {ip: 203\.0\.113\.7}}}
  - {id: reported, condition: {email_sent: manager}}
  - {id: both, condition: {all_of: [{tool_used: dns_lookup}, {tool_used: scanner}]}}
  - {id: hinted, condition: {inject_received: hint}}
)";

const definition::ExerciseDefinition& Fixture() {
  static const auto def = testing::MustParse(kFixture);
  return def;
}

InvokeTool Block(std::string ip = "203.0.113.7") { return {"block_traffic_from", {{"ip", std::move(ip)}}}; }

SendEmail Mail(std::vector<std::string> to, std::string body, std::string thread = {}) {
  return {std::move(thread), std::move(to), "Subject", std::move(body)};
}

class EngineTest : public ::testing::Test {
 protected:
  explicit EngineTest(std::vector<std::string> teams = {"red", "blue", "green"})
      : clock_(T0()), instance_(Fixture(), std::move(teams), clock_) {
    instance_.SetObserver([this](const Effect& effect) { observed_.push_back(effect); });
    instance_.Start();
    for (const auto& team : instance_.team_ids()) instance_.ClaimToken(team, "op");
  }

  void At(std::int64_t minutes, Duration extra = Duration{0}) {
    const Timestamp to = T0() + Minutes(minutes) + extra;
    clock_.Set(to);
    instance_.AdvanceTime(to);
  }

  std::vector<std::string> DeliveredIds(const std::string& team) {
    std::vector<std::string> ids;
    for (const auto& d : instance_.Snapshot(team).delivered) ids.push_back(d.inject_id);
    return ids;
  }

  std::optional<Timestamp> DeliveredAt(const std::string& team, const std::string& inject) {
    for (const auto& d : instance_.Snapshot(team).delivered) {
      if (d.inject_id == inject) return d.at;
    }
    return std::nullopt;
  }

  ScriptedClock clock_;
  ExerciseInstance instance_;
  Effects observed_;
};

// --- Construction -------------------------------------------------------------

TEST(StartInstance, DemoWithTwelveTeams) {
  ScriptedClock clock(T0());
  std::vector<std::string> teams;
  for (int i = 1; i <= 12; ++i) teams.push_back("team-" + std::to_string(i));
  auto instance = StartInstance(testing::LoadDemo(), teams, clock);
  EXPECT_EQ(instance->status(), Status::kRunning);
  ASSERT_EQ(instance->team_ids().size(), 12u);
  for (const auto& team : teams) {
    const auto state = instance->Snapshot(team);
    EXPECT_EQ(state.team_id, team);
    ASSERT_EQ(state.delivered.size(), 1u);
    EXPECT_EQ(state.delivered[0].inject_id, "briefing");
    EXPECT_EQ(state.delivered[0].at, T0());
  }
}

TEST(StartInstance, Preconditions) {
  ScriptedClock clock(T0());
  auto code_of = [&](std::vector<std::string> teams, definition::ExerciseDefinition def) {
    try {
      ExerciseInstance instance(std::move(def), std::move(teams), clock);
    } catch (const Error& e) {
      return std::optional<ErrorCode>(e.code());
    }
    return std::optional<ErrorCode>();
  };
  EXPECT_EQ(code_of({}, Fixture()), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of({"a", "b", "a"}, Fixture()), ErrorCode::kDuplicateTeam);
  EXPECT_EQ(code_of({"bad team"}, Fixture()), ErrorCode::kInvalidArgument);
  auto broken = Fixture();
  broken.injects[0].trigger = definition::AfterMilestone{"ghost", 0};
  EXPECT_EQ(code_of({"a"}, broken), ErrorCode::kInvalidDefinition);
  EXPECT_EQ(code_of({"a"}, Fixture()), std::nullopt);
}

TEST(StartInstance, CommandsBeforeStartFail) {
  ScriptedClock clock(T0());
  ExerciseInstance instance(Fixture(), {"a"}, clock);
  EXPECT_EQ(instance.status(), Status::kCreated);
  instance.ClaimToken("a", "op");
  try {
    instance.HandleCommand("a", "op", Block());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotRunning);
  }
  EXPECT_THROW(instance.Snapshot("nobody"), Error);
}

// --- Time triggers --------------------------------------------------------------

TEST_F(EngineTest, AtTimeZeroDeliveredAtStartToEveryTeam) {
  for (const auto& team : instance_.team_ids()) {
    EXPECT_EQ(DeliveredIds(team), (std::vector<std::string>{"intro"}));
    EXPECT_EQ(DeliveredAt(team, "intro"), T0());
  }
}

TEST_F(EngineTest, AtTimeTwentyFiresExactlyAtMinuteTwenty) {
  At(19, std::chrono::seconds(59) + Duration{999999});
  EXPECT_FALSE(DeliveredAt("red", "alert_a"));
  At(20);
  for (const auto& team : instance_.team_ids()) {
    EXPECT_EQ(DeliveredAt(team, "alert_a"), T0() + Minutes(20));
    EXPECT_EQ(DeliveredAt(team, "alert_b"), T0() + Minutes(20));
  }
}

TEST_F(EngineTest, LateAdvanceStillStampsDueTime) {
  At(45);
  EXPECT_EQ(DeliveredAt("red", "alert_a"), T0() + Minutes(20));
  EXPECT_EQ(DeliveredAt("red", "nag"), T0() + Minutes(30));
  const auto records = instance_.Records("red", Category::kInjectCategories);
  ASSERT_GE(records.size(), 4u);
  EXPECT_EQ(records[1].timestamp, T0() + Minutes(20));
  EXPECT_EQ(records[3].timestamp, T0() + Minutes(30));
}

TEST_F(EngineTest, SimultaneousInjectsInDefinitionOrder) {
  At(20);
  EXPECT_EQ(DeliveredIds("blue"), (std::vector<std::string>{"intro", "alert_b", "alert_a"}));
}

TEST_F(EngineTest, IfMilestoneMissingOnlyWhenUnreached) {
  At(12);
  ASSERT_TRUE(instance_.HandleCommand("red", "op", Block()).accepted);
  At(30);
  EXPECT_FALSE(DeliveredAt("red", "nag"));
  EXPECT_EQ(DeliveredAt("blue", "nag"), T0() + Minutes(30));
  // The resolved deadline never shows up later either.
  At(59);
  EXPECT_FALSE(DeliveredAt("red", "nag"));
}

TEST_F(EngineTest, DeadlineFiresBeforeCommandAtSameInstant) {
  At(30);
  instance_.HandleCommand("green", "op", Block());
  EXPECT_EQ(DeliveredAt("green", "nag"), T0() + Minutes(30));
  EXPECT_TRUE(instance_.Snapshot("green").IsReached("blocked"));
}

TEST_F(EngineTest, AfterMilestoneUsesDelay) {
  At(10);
  instance_.HandleCommand("red", "op", Block());
  At(14);
  EXPECT_FALSE(DeliveredAt("red", "praise"));
  At(15);
  EXPECT_EQ(DeliveredAt("red", "praise"), T0() + Minutes(15));
  EXPECT_FALSE(DeliveredAt("blue", "praise"));
}

TEST_F(EngineTest, TimeCannotMoveBackwards) {
  At(10);
  try {
    instance_.AdvanceTime(T0() + Minutes(9));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTimeBackwards);
  }
}

// --- Commands ----------------------------------------------------------------------

TEST_F(EngineTest, InvokeReachesMilestoneAtCommandTime) {
  At(7);
  const auto result = instance_.HandleCommand("red", "op", Block());
  ASSERT_TRUE(result.accepted);
  ASSERT_TRUE(result.classification);
  EXPECT_TRUE(result.classification->correct);
  EXPECT_EQ(result.invocation_id, "inv-1");
  const auto state = instance_.Snapshot("red");
  ASSERT_EQ(state.invocations.size(), 1u);
  EXPECT_EQ(state.invocations[0].trainee, "op");
  EXPECT_EQ(state.milestones.at("blocked").reached_at, T0() + Minutes(7));
  const auto records = instance_.Records("red", Category::kMilestones);
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0].timestamp, T0() + Minutes(7));
}

TEST_F(EngineTest, IncorrectInvocationIsRecordedButReachesNothing) {
  const auto result = instance_.HandleCommand("red", "op", Block("203.0.113"));
  ASSERT_TRUE(result.accepted);
  EXPECT_FALSE(result.classification->correct);
  EXPECT_EQ(result.output, "Error: ip: pattern mismatch");
  EXPECT_FALSE(instance_.Snapshot("red").IsReached("blocked"));
  const auto actions = instance_.Records("red", Category::kActionLogs);
  ASSERT_EQ(actions.size(), 1u);
  EXPECT_EQ(std::get<eventlog::ActionPayload>(actions[0].payload).classification, "incorrect");
}

TEST_F(EngineTest, EmailSchedulesAutoReplyAfterDelay) {
  At(10);
  const auto result = instance_.HandleCommand("red", "op", Mail({"manager"}, "Status update"));
  ASSERT_TRUE(result.accepted);
  EXPECT_EQ(result.thread_id, "thread-1");
  const auto state = instance_.Snapshot("red");
  std::vector<std::pair<std::string, Timestamp>> pending;
  for (const auto& event : state.pending) {
    pending.emplace_back(Fixture().injects[event.inject_index].id, event.due);
  }
  EXPECT_NE(std::find(pending.begin(), pending.end(),
                      std::make_pair(std::string("manager_reply"), T0() + Minutes(12))),
            pending.end());
  EXPECT_NE(std::find(pending.begin(), pending.end(),
                      std::make_pair(std::string("unlock"), T0() + Minutes(11))),
            pending.end());

  At(12);
  const auto after = instance_.Snapshot("red");
  const auto* thread = after.FindThread("thread-1");
  ASSERT_NE(thread, nullptr);
  ASSERT_EQ(thread->messages.size(), 2u);
  EXPECT_EQ(thread->messages[1].sender, "manager@corp.example");
  EXPECT_EQ(thread->messages[1].origin, Origin::kActor);
  EXPECT_EQ(thread->messages[1].at, T0() + Minutes(12));
  EXPECT_EQ(thread->messages[1].body, "Thanks for the status");
}

TEST_F(EngineTest, AutoReplyNeedsKeyword) {
  instance_.HandleCommand("red", "op", Mail({"manager@CORP.example"}, "Hello"));
  At(30);
  EXPECT_FALSE(DeliveredAt("red", "manager_reply"));
  EXPECT_TRUE(instance_.Snapshot("red").IsReached("reported"));
}

TEST_F(EngineTest, ReplyToThreadDefaultsToParticipants) {
  const auto first = instance_.HandleCommand("red", "op", Mail({"manager"}, "hi"));
  const auto second = instance_.HandleCommand("red", "op", Mail({}, "again", first.thread_id));
  EXPECT_EQ(second.thread_id, first.thread_id);
  const auto state = instance_.Snapshot("red");
  ASSERT_EQ(state.threads.size(), 1u);
  EXPECT_EQ(state.threads[0].messages[1].recipients,
            (std::vector<std::string>{"manager@corp.example"}));
}

TEST_F(EngineTest, EmailErrors) {
  auto code = [&](const SendEmail& email) {
    try {
      instance_.HandleCommand("red", "op", email);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kIo;  // sentinel: no error
  };
  EXPECT_EQ(code(Mail({"manager"}, "x", "thread-9")), ErrorCode::kUnknownThread);
  EXPECT_EQ(code(Mail({"not-an-address"}, "x")), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code(Mail({"outsider@else.example"}, "x")), ErrorCode::kIo);
}

TEST_F(EngineTest, TokenlessCommandIsRejectedAndLogged) {
  const TeamState before = instance_.Snapshot("red");
  const auto result = instance_.HandleCommand("red", "intruder", Block());
  EXPECT_FALSE(result.accepted);
  EXPECT_FALSE(result.message.empty());
  const TeamState after = instance_.Snapshot("red");
  std::string diff;
  EXPECT_TRUE(SameHistory(before, after, &diff)) << diff;
  EXPECT_FALSE(after.IsReached("blocked"));
  const auto actions = instance_.Records("red", Category::kActionLogs);
  ASSERT_EQ(actions.size(), 1u);
  const auto& payload = std::get<eventlog::ActionPayload>(actions[0].payload);
  EXPECT_TRUE(payload.rejected);
  EXPECT_EQ(payload.acting_trainee, "intruder");
  EXPECT_EQ(payload.classification, "not_classified");
  EXPECT_EQ(payload.invocation_id, "rej-1");

  const auto mail = instance_.HandleCommand("red", "intruder", Mail({"manager"}, "status"));
  EXPECT_FALSE(mail.accepted);
  EXPECT_TRUE(instance_.Snapshot("red").threads.empty());
  EXPECT_EQ(std::get<eventlog::ActionPayload>(
                instance_.Records("red", Category::kActionLogs)[1].payload).tool_id,
            "email");
}

TEST_F(EngineTest, TokenClaimAndRelease) {
  EXPECT_TRUE(instance_.ClaimToken("red", "op").granted);  // re-claim by holder
  const auto denied = instance_.ClaimToken("red", "other");
  EXPECT_FALSE(denied.granted);
  EXPECT_EQ(denied.holder, "op");
  EXPECT_FALSE(instance_.ReleaseToken("red", "other"));
  EXPECT_TRUE(instance_.ReleaseToken("red", "op"));
  EXPECT_TRUE(instance_.ClaimToken("red", "other").granted);
  EXPECT_TRUE(instance_.HandleCommand("red", "other", Block()).accepted);
  EXPECT_FALSE(instance_.HandleCommand("red", "op", Block()).accepted);
}

TEST_F(EngineTest, UnknownAndLockedTools) {
  try {
    instance_.HandleCommand("red", "op", InvokeTool{"teleport", {}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownTool);
  }
  try {
    instance_.HandleCommand("red", "op", InvokeTool{"scanner", {{"host", "db"}}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kToolLocked);
  }
  instance_.HandleCommand("red", "op", Mail({"manager"}, "hello"));
  At(1);
  EXPECT_TRUE(instance_.HandleCommand("red", "op", InvokeTool{"scanner", {{"host", "db"}}}).accepted);
}

TEST_F(EngineTest, AllOfNeedsEveryPart) {
  instance_.HandleCommand("red", "op", Mail({"manager"}, "hello"));
  At(2);
  instance_.HandleCommand("red", "op", InvokeTool{"scanner", {{"host", "db"}}});
  EXPECT_FALSE(instance_.Snapshot("red").IsReached("both"));
  At(3);
  instance_.HandleCommand("red", "op", InvokeTool{"dns_lookup", {{"domain", "a.example"}}});
  EXPECT_EQ(instance_.Snapshot("red").milestones.at("both").reached_at, T0() + Minutes(3));
}

TEST_F(EngineTest, MilestonesAreMonotone) {
  At(5);
  instance_.HandleCommand("red", "op", Block());
  At(9);
  instance_.HandleCommand("red", "op", Block());
  const auto state = instance_.Snapshot("red");
  EXPECT_EQ(state.milestones.at("blocked").reached_at, T0() + Minutes(5));
  EXPECT_EQ(instance_.Records("red", Category::kMilestones).size(), 1u);
  EXPECT_TRUE(EvaluateMilestones(Fixture(), state).empty());
}

// --- Instructor actions -------------------------------------------------------------

TEST_F(EngineTest, ManualInjectOnlyForTargetTeam) {
  At(8);
  instance_.Instruct("green", DeliverManualInject{"hint"});
  EXPECT_EQ(DeliveredAt("green", "hint"), T0() + Minutes(8));
  EXPECT_FALSE(DeliveredAt("red", "hint"));
  EXPECT_TRUE(instance_.Snapshot("green").IsReached("hinted"));
  EXPECT_EQ(std::get<eventlog::InjectPayload>(
                instance_.Records("green", Category::kInjectCategories).back().payload).trigger,
            "instructor");
}

TEST_F(EngineTest, ManualInjectGuards) {
  auto code = [&](const std::string& id) {
    try {
      instance_.Instruct("red", DeliverManualInject{id});
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kIo;
  };
  EXPECT_EQ(code("alert_a"), ErrorCode::kNotManualInject);
  EXPECT_EQ(code("ghost"), ErrorCode::kUnknownInject);
  EXPECT_EQ(code("hint"), ErrorCode::kIo);
  EXPECT_EQ(code("hint"), ErrorCode::kAlreadyDelivered);
}

TEST_F(EngineTest, ManualDeliveryCancelsPendingAutoReply) {
  instance_.HandleCommand("red", "op", Mail({"manager"}, "status please"));
  instance_.Instruct("red", DeliverManualInject{"manager_reply"});
  At(30);
  const auto ids = DeliveredIds("red");
  EXPECT_EQ(std::count(ids.begin(), ids.end(), "manager_reply"), 1);
}

TEST_F(EngineTest, InstructorReplyInThread) {
  const auto sent = instance_.HandleCommand("red", "op", Mail({"manager"}, "hello"));
  instance_.Instruct("red", ReplyInThread{sent.thread_id, "Keep going", ""});
  instance_.Instruct("red", ReplyInThread{sent.thread_id, "From the boss", "manager"});
  const auto state = instance_.Snapshot("red");
  const auto* thread = state.FindThread(sent.thread_id);
  ASSERT_EQ(thread->messages.size(), 3u);
  EXPECT_EQ(thread->messages[1].origin, Origin::kInstructor);
  EXPECT_EQ(thread->messages[1].sender, "instructor");
  EXPECT_EQ(thread->messages[2].sender, "manager@corp.example");
  EXPECT_EQ(thread->messages[2].recipients, (std::vector<std::string>{"red"}));
  EXPECT_THROW(instance_.Instruct("red", ReplyInThread{"thread-77", "x", ""}), Error);
}

// --- End of exercise ------------------------------------------------------------

TEST_F(EngineTest, PendingEventsDiscardedAtEnd) {
  At(10);
  instance_.HandleCommand("red", "op", Mail({"manager"}, "hello"));  // schedules too_late at 110
  At(59);
  EXPECT_EQ(instance_.status(), Status::kRunning);
  At(60);
  EXPECT_EQ(instance_.status(), Status::kEnded);
  const auto state = instance_.Snapshot("red");
  EXPECT_TRUE(state.pending.empty());
  EXPECT_TRUE(state.ended);
  const auto records = instance_.Records("red", Category::kInjectCategories);
  const auto& last = records.back();
  const auto& payload = std::get<eventlog::InjectPayload>(last.payload);
  EXPECT_EQ(payload.inject_id, "too_late");
  EXPECT_EQ(payload.status, "discarded");
  EXPECT_EQ(last.timestamp, T0() + Minutes(60));
  try {
    instance_.HandleCommand("red", "op", Block());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kExerciseEnded);
  }
}

TEST_F(EngineTest, EndNowStopsEarly) {
  At(15);
  instance_.EndNow();
  EXPECT_EQ(instance_.status(), Status::kEnded);
  EXPECT_FALSE(DeliveredAt("red", "alert_a"));
  const auto records = instance_.Records("red", Category::kInjectCategories);
  for (const auto& record : records) EXPECT_LE(record.timestamp, T0() + Minutes(15));
  std::size_t discarded = 0;
  for (const auto& record : records) {
    discarded += std::get<eventlog::InjectPayload>(record.payload).status == "discarded";
  }
  EXPECT_EQ(discarded, 3u);  // alert_b, alert_a, nag
}

// --- Effects and logs -------------------------------------------------------------

TEST_F(EngineTest, EveryEffectIsExactlyOneRecord) {
  At(3);
  instance_.HandleCommand("red", "op", Mail({"manager"}, "status"));
  instance_.HandleCommand("red", "stranger", Block());
  At(6);
  instance_.HandleCommand("red", "op", Block());
  instance_.Instruct("blue", DeliverManualInject{"hint"});
  At(60);
  std::map<std::string, std::vector<std::string>> from_effects, from_logs;
  for (const auto& effect : observed_) {
    from_effects[effect.team_id].push_back(ToLogRecord(effect, T0()).team_id + "|" +
                                           eventlog::ToLine(ToLogRecord(effect, T0())));
  }
  for (const auto& team : instance_.team_ids()) {
    std::size_t total = 0;
    for (const auto category : eventlog::kAllCategories) {
      for (const auto& record : instance_.Records(team, category)) {
        from_logs[team].push_back(record.team_id + "|" + eventlog::ToLine(record));
        ++total;
      }
    }
    auto a = from_effects[team];
    auto b = from_logs[team];
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    EXPECT_EQ(a, b) << team;
    EXPECT_GT(total, 0u);
  }
}

// --- Properties over scripted runs ------------------------------------------------------

std::map<std::string, std::string> RunAndCollect(const cli::BotScript& script,
                                                 const definition::ExerciseDefinition& def) {
  cli::SimulationOptions options;
  options.keep_going = true;
  const auto sim = cli::RunSimulation(def, script, options);
  std::map<std::string, std::string> out;
  for (const auto& team : sim.instance->team_ids()) {
    for (const auto category : eventlog::kAllCategories) {
      std::string text;
      for (const auto& record : sim.instance->Records(team, category)) {
        text += eventlog::ToLine(record) + "\n";
      }
      out[team + "/" + eventlog::FileName(category)] = text;
    }
  }
  return out;
}

TEST(EngineProperties, DeterministicAcrossRuns) {
  const auto def = testing::LoadDemo();
  std::mt19937_64 rng(99);
  for (int run = 0; run < 10; ++run) {
    const auto script = testing::RandomScript(def, rng);
    EXPECT_EQ(RunAndCollect(script, def), RunAndCollect(script, def)) << "run " << run;
  }
}

TEST(EngineProperties, TeamIsolationUnderPermutedInterleavings) {
  const auto def = testing::LoadDemo();
  std::mt19937_64 rng(5);
  for (int run = 0; run < 10; ++run) {
    const auto script = testing::RandomScript(def, rng, {4, 25});
    // Reference: every team alone.
    std::map<std::string, TeamState> alone;
    for (const auto& team : script.teams) {
      cli::BotScript single;
      single.teams.push_back(team);
      cli::SimulationOptions options;
      options.keep_going = true;
      auto sim = cli::RunSimulation(def, single, options);
      alone[team.team_id] = sim.instance->Snapshot(team.team_id);
    }
    // Shuffle the team order, which changes the interleaving at equal times.
    for (int shuffle = 0; shuffle < 3; ++shuffle) {
      cli::BotScript permuted = script;
      std::shuffle(permuted.teams.begin(), permuted.teams.end(), rng);
      cli::SimulationOptions options;
      options.keep_going = true;
      auto sim = cli::RunSimulation(def, permuted, options);
      for (const auto& team : script.teams) {
        std::string diff;
        EXPECT_TRUE(SameHistory(alone[team.team_id], sim.instance->Snapshot(team.team_id), &diff))
            << "run " << run << " team " << team.team_id << ": " << diff;
      }
    }
  }
}

TEST(EngineProperties, UniquenessMonotonicityAndNoLostEvents) {
  const auto def = testing::LoadDemo();
  std::mt19937_64 rng(17);
  for (int run = 0; run < 30; ++run) {
    const auto script = testing::RandomScript(def, rng);
    cli::SimulationOptions options;
    options.keep_going = true;
    const auto sim = cli::RunSimulation(def, script, options);
    for (const auto& team : sim.instance->team_ids()) {
      const auto state = sim.instance->Snapshot(team);
      std::set<std::string> seen;
      for (const auto& d : state.delivered) ASSERT_TRUE(seen.insert(d.inject_id).second) << d.inject_id;
      ASSERT_TRUE(state.pending.empty());

      std::set<std::string> reached;
      for (const auto& record : sim.instance->Records(team, Category::kMilestones)) {
        const auto& payload = std::get<eventlog::MilestonePayload>(record.payload);
        ASSERT_TRUE(reached.insert(payload.milestone_id).second);
        ASSERT_EQ(state.milestones.at(payload.milestone_id).reached_at, payload.reached_at);
      }
      for (const auto& [id, status] : state.milestones) {
        ASSERT_EQ(status.reached, reached.count(id) == 1);
        ASSERT_EQ(status.reached_at.has_value(), status.reached);
      }

      std::set<std::string> delivered_logged, discarded_logged;
      for (const auto& record : sim.instance->Records(team, Category::kInjectCategories)) {
        const auto& payload = std::get<eventlog::InjectPayload>(record.payload);
        auto& bucket = payload.status == "delivered" ? delivered_logged : discarded_logged;
        ASSERT_TRUE(bucket.insert(payload.inject_id).second);
        if (payload.status == "discarded") {
          ASSERT_EQ(record.timestamp, sim.instance->end_time());
        }
      }
      ASSERT_EQ(delivered_logged, seen);
      for (const auto& id : discarded_logged) ASSERT_FALSE(seen.count(id)) << id;
    }
  }
}

TEST(EngineProperties, ReplayMatchesLiveState) {
  const auto def = testing::LoadDemo();
  std::mt19937_64 rng(23);
  for (int run = 0; run < 20; ++run) {
    const auto script = testing::RandomScript(def, rng);
    cli::SimulationOptions options;
    options.keep_going = true;
    const auto sim = cli::RunSimulation(def, script, options);
    testing::TempDir dir;
    cli::ExportSimulation(sim, dir.path());
    for (const auto& team : sim.instance->team_ids()) {
      const auto logs = eventlog::ReadTeamLogs(dir / team);
      std::string diff;
      ASSERT_TRUE(SameHistory(sim.instance->Snapshot(team), ReplayFromLogs(def, logs), &diff))
          << "run " << run << " team " << team << ": " << diff;
    }
  }
}

TEST(EngineConcurrency, TeamsProgressInParallel) {
  const auto def = testing::LoadDemo();
  ScriptedClock clock(T0() + Minutes(10));
  std::vector<std::string> teams;
  for (int i = 0; i < 8; ++i) teams.push_back("t" + std::to_string(i));
  ExerciseInstance instance(def, teams, clock);
  instance.Start();
  std::vector<std::thread> workers;
  for (const auto& team : teams) {
    workers.emplace_back([&, team] {
      instance.ClaimToken(team, "op");
      for (int i = 0; i < 50; ++i) {
        instance.HandleCommand(team, "op", InvokeTool{"block_traffic_from", {{"ip", "203.0.113.45"}}});
        instance.HandleCommand(team, "op", SendEmail{"", {"head_of_it"}, "s", "summary " + std::to_string(i)});
      }
    });
  }
  for (auto& worker : workers) worker.join();
  for (const auto& team : teams) {
    const auto state = instance.Snapshot(team);
    EXPECT_EQ(state.invocations.size(), 50u);
    EXPECT_EQ(state.threads.size(), 50u);
    EXPECT_TRUE(state.IsReached("block_attacker"));
    EXPECT_EQ(state.invocations.back().id, "inv-50");
  }
}

}  // namespace
}  // namespace ttx::engine

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ttx/common/time.hpp"
#include "ttx/toolkit/toolkit.hpp"

namespace ttx::engine {

// Why an inject was delivered (or scheduled). Logged as the `trigger` field of
// inject_categories records.
enum class DeliveryCause {
  kAtTime,
  kAfterMilestone,
  kIfMilestoneMissing,
  kOnEmailTo,
  kAutoReply,
  kInstructor,
};

std::string_view ToString(DeliveryCause cause);
std::optional<DeliveryCause> DeliveryCauseFromString(std::string_view text);

enum class Origin { kTeam, kActor, kInstructor };

std::string_view ToString(Origin origin);
std::optional<Origin> OriginFromString(std::string_view text);

struct DeliveredInject {
  std::string inject_id;
  Timestamp at;
  bool operator==(const DeliveredInject&) const = default;
};

struct MilestoneStatus {
  bool reached = false;
  std::optional<Timestamp> reached_at;  // present iff reached
  bool operator==(const MilestoneStatus&) const = default;
};

struct EmailMessage {
  std::string sender;
  std::vector<std::string> recipients;
  Timestamp at;
  std::string body;
  Origin origin = Origin::kTeam;
  bool operator==(const EmailMessage&) const = default;
};

struct EmailThread {
  std::string id;
  std::string subject;
  std::vector<std::string> participants;  // first-seen order of senders and recipients
  std::vector<EmailMessage> messages;
  bool operator==(const EmailThread&) const = default;

  void Append(EmailMessage message);
};

struct ToolInvocation {
  std::string id;
  std::string tool_id;
  toolkit::Arguments args;
  toolkit::Classification classification;
  std::string output;
  Timestamp at;
  std::string trainee;
  bool operator==(const ToolInvocation&) const = default;
};

// Ordered by due time, then inject definition order, then scheduling order.
struct PendingEvent {
  Timestamp due;
  std::size_t inject_index = 0;
  std::uint64_t seq = 0;
  DeliveryCause cause = DeliveryCause::kAtTime;
  std::string context_thread;  // thread an actor reply should be appended to

  bool operator<(const PendingEvent& other) const {
    if (due != other.due) return due < other.due;
    if (inject_index != other.inject_index) return inject_index < other.inject_index;
    return seq < other.seq;
  }
};

struct TeamState {
  std::string team_id;
  std::vector<DeliveredInject> delivered;
  std::map<std::string, MilestoneStatus> milestones;
  std::vector<EmailThread> threads;
  std::vector<ToolInvocation> invocations;
  std::set<PendingEvent> pending;
  std::optional<std::string> token_holder;
  std::optional<Timestamp> token_acquired_at;
  toolkit::ToolState tool_state;

  Timestamp processed_until;  // every pending event due at or before this has fired
  bool ended = false;
  std::uint64_t next_seq = 1;

  bool IsDelivered(std::string_view inject_id) const;
  bool IsReached(std::string_view milestone_id) const;
  const EmailThread* FindThread(std::string_view thread_id) const;
  EmailThread* FindThread(std::string_view thread_id);
};

}  // namespace ttx::engine

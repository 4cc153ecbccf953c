#include "ttx/engine/team_state.hpp"

#include <algorithm>
#include <array>

namespace ttx::engine {

namespace {

constexpr std::array<std::pair<DeliveryCause, std::string_view>, 6> kCauseNames = {{
    {DeliveryCause::kAtTime, "at_time"},
    {DeliveryCause::kAfterMilestone, "after_milestone"},
    {DeliveryCause::kIfMilestoneMissing, "if_milestone_missing"},
    {DeliveryCause::kOnEmailTo, "on_email_to"},
    {DeliveryCause::kAutoReply, "auto_reply"},
    {DeliveryCause::kInstructor, "instructor"},
}};

constexpr std::array<std::pair<Origin, std::string_view>, 3> kOriginNames = {{
    {Origin::kTeam, "team"},
    {Origin::kActor, "actor"},
    {Origin::kInstructor, "instructor"},
}};

}  // namespace

std::string_view ToString(DeliveryCause cause) {
  for (const auto& [value, name] : kCauseNames) {
    if (value == cause) return name;
  }
  return "at_time";
}

std::optional<DeliveryCause> DeliveryCauseFromString(std::string_view text) {
  for (const auto& [value, name] : kCauseNames) {
    if (name == text) return value;
  }
  return std::nullopt;
}

std::string_view ToString(Origin origin) {
  for (const auto& [value, name] : kOriginNames) {
    if (value == origin) return name;
  }
  return "team";
}

std::optional<Origin> OriginFromString(std::string_view text) {
  for (const auto& [value, name] : kOriginNames) {
    if (name == text) return value;
  }
  return std::nullopt;
}

void EmailThread::Append(EmailMessage message) {
  auto add = [this](const std::string& address) {
    if (std::find(participants.begin(), participants.end(), address) == participants.end()) {
      participants.push_back(address);
    }
  };
  add(message.sender);
  for (const auto& recipient : message.recipients) add(recipient);
  messages.push_back(std::move(message));
}

bool TeamState::IsDelivered(std::string_view inject_id) const {
  return std::any_of(delivered.begin(), delivered.end(),
                     [&](const DeliveredInject& d) { return d.inject_id == inject_id; });
}

bool TeamState::IsReached(std::string_view milestone_id) const {
  const auto it = milestones.find(std::string(milestone_id));
  return it != milestones.end() && it->second.reached;
}

const EmailThread* TeamState::FindThread(std::string_view thread_id) const {
  for (const auto& thread : threads) {
    if (thread.id == thread_id) return &thread;
  }
  return nullptr;
}

EmailThread* TeamState::FindThread(std::string_view thread_id) {
  return const_cast<EmailThread*>(std::as_const(*this).FindThread(thread_id));
}

}  // namespace ttx::engine

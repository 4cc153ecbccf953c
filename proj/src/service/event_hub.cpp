#include "ttx/service/event_hub.hpp"

#include <algorithm>

namespace ttx::service {

void EventHub::Reset(std::string exercise_id) {
  {
    std::lock_guard lock(mu_);
    exercise_id_ = std::move(exercise_id);
    ++generation_;
    global_.clear();
    teams_.clear();
  }
  cv_.notify_all();
}

void EventHub::Publish(const std::string& team_id, std::string payload, bool team_visible) {
  {
    std::lock_guard lock(mu_);
    if (team_visible) {
      auto& team = teams_[team_id];
      team.push_back({team.size() + 1, team_id, payload});
    }
    global_.push_back({global_.size() + 1, team_id, std::move(payload)});
  }
  cv_.notify_all();
}

void EventHub::Close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

const std::vector<HubEvent>& EventHub::StreamLocked(
    const std::optional<std::string>& team_id) const {
  static const std::vector<HubEvent> kEmpty;
  if (!team_id) return global_;
  const auto it = teams_.find(*team_id);
  return it == teams_.end() ? kEmpty : it->second;
}

std::uint64_t EventHub::Head(const std::optional<std::string>& team_id) const {
  std::lock_guard lock(mu_);
  return StreamLocked(team_id).size();
}

PollResult EventHub::Fetch(const std::optional<std::string>& team_id, std::uint64_t cursor,
                           const std::string& exercise_id, std::chrono::milliseconds wait) {
  std::unique_lock lock(mu_);
  PollResult result;
  result.exercise_id = exercise_id_;
  result.closed = closed_;
  const bool wrong_exercise = !exercise_id.empty() && exercise_id != exercise_id_;
  if (wrong_exercise || cursor > StreamLocked(team_id).size()) {
    result.resync = true;
    result.cursor = StreamLocked(team_id).size();
    return result;
  }
  const std::uint64_t generation = generation_;
  cv_.wait_for(lock, wait, [&] {
    return closed_ || generation_ != generation || StreamLocked(team_id).size() > cursor;
  });
  if (generation_ != generation) {
    result.exercise_id = exercise_id_;
    result.resync = true;
    result.cursor = StreamLocked(team_id).size();
    return result;
  }
  result.closed = closed_;
  const auto& stream = StreamLocked(team_id);
  const std::size_t end = std::min<std::size_t>(stream.size(), cursor + kMaxBatch);
  result.events.assign(stream.begin() + static_cast<std::ptrdiff_t>(cursor),
                       stream.begin() + static_cast<std::ptrdiff_t>(end));
  result.cursor = end;
  return result;
}

}  // namespace ttx::service

#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace ttx::service {

struct HubEvent {
  std::uint64_t seq = 0;  // 1-based within the stream it was read from
  std::string team_id;
  std::string payload;  // serialized effect JSON
};

struct PollResult {
  std::string exercise_id;
  std::uint64_t cursor = 0;  // pass back to continue after the last event
  bool resync = false;       // cursor unusable; refetch views and continue from `cursor`
  bool closed = false;       // hub shut down; no further events
  std::vector<HubEvent> events;
};

// Ordered fan-out of effects. Each team has its own stream (team-local
// sequence numbers); the all-teams stream interleaves them with a global
// sequence. Everything since the last Reset is retained, so any earlier
// cursor can resume.
class EventHub {
 public:
  static constexpr std::size_t kMaxBatch = 1000;

  void Reset(std::string exercise_id);
  // `team_visible` false keeps the event off the team stream (instructor only).
  void Publish(const std::string& team_id, std::string payload, bool team_visible = true);

  // Events after `cursor` on the team stream (`team_id` set) or the global
  // stream. Blocks up to `wait` when nothing is pending. A cursor past the
  // head, or an `exercise_id` other than the current one, yields resync.
  PollResult Fetch(const std::optional<std::string>& team_id, std::uint64_t cursor,
                   const std::string& exercise_id, std::chrono::milliseconds wait);

  // Wakes every waiter; later fetches no longer block.
  void Close();

  std::uint64_t Head(const std::optional<std::string>& team_id) const;

 private:
  const std::vector<HubEvent>& StreamLocked(const std::optional<std::string>& team_id) const;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::string exercise_id_;
  std::uint64_t generation_ = 0;
  bool closed_ = false;
  std::vector<HubEvent> global_;
  std::map<std::string, std::vector<HubEvent>> teams_;
};

}  // namespace ttx::service

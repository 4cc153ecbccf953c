#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

namespace ttx::service {

enum class Role { kTrainee, kInstructor };

std::string_view ToString(Role role);

struct Session {
  std::string token;
  std::string participant_id;
  Role role = Role::kTrainee;
  std::string team_id;  // trainees only
};

// Random lowercase hex string of `length` characters.
std::string RandomHex(std::size_t length);

// Bearer-token sessions. Thread-safe.
class SessionStore {
 public:
  Session Create(std::string participant_id, Role role, std::string team_id);
  std::optional<Session> Find(std::string_view token) const;
  // Drops trainee sessions (a new exercise invalidates team membership).
  void ClearTrainees();

 private:
  mutable std::mutex mu_;
  std::map<std::string, Session, std::less<>> sessions_;
};

}  // namespace ttx::service

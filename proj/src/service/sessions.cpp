#include "ttx/service/sessions.hpp"

#include <random>

namespace ttx::service {

std::string_view ToString(Role role) {
  return role == Role::kInstructor ? "instructor" : "trainee";
}

std::string RandomHex(std::size_t length) {
  static std::mutex mu;
  static std::mt19937_64 engine{std::random_device{}()};
  static constexpr char kDigits[] = "0123456789abcdef";
  std::lock_guard lock(mu);
  std::string out(length, '0');
  for (auto& c : out) c = kDigits[engine() & 0xF];
  return out;
}

Session SessionStore::Create(std::string participant_id, Role role, std::string team_id) {
  Session session{RandomHex(32), std::move(participant_id), role, std::move(team_id)};
  std::lock_guard lock(mu_);
  sessions_[session.token] = session;
  return session;
}

std::optional<Session> SessionStore::Find(std::string_view token) const {
  std::lock_guard lock(mu_);
  const auto it = sessions_.find(token);
  if (it == sessions_.end()) return std::nullopt;
  return it->second;
}

void SessionStore::ClearTrainees() {
  std::lock_guard lock(mu_);
  std::erase_if(sessions_, [](const auto& entry) { return entry.second.role == Role::kTrainee; });
}

}  // namespace ttx::service

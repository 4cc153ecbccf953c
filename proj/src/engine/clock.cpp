#include "ttx/engine/clock.hpp"

namespace ttx::engine {

Timestamp SystemClock::Now() const {
  return std::chrono::floor<Duration>(std::chrono::system_clock::now());
}

}  // namespace ttx::engine

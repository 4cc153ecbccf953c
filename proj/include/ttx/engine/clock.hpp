#pragma once

#include <atomic>

#include "ttx/common/time.hpp"

namespace ttx::engine {

class Clock {
 public:
  virtual ~Clock() = default;
  virtual Timestamp Now() const = 0;
};

class SystemClock final : public Clock {
 public:
  Timestamp Now() const override;
};

// Manually driven clock for dry runs and tests. Safe to read from any thread.
class ScriptedClock final : public Clock {
 public:
  explicit ScriptedClock(Timestamp start) : now_(start.time_since_epoch().count()) {}

  Timestamp Now() const override { return Timestamp{Duration{now_.load()}}; }
  void Set(Timestamp t) { now_.store(t.time_since_epoch().count()); }
  void Advance(Duration d) { now_.fetch_add(d.count()); }

 private:
  std::atomic<Duration::rep> now_;
};

}  // namespace ttx::engine

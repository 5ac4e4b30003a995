#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace squatguard {

// All timestamps are UTC with second precision.
using TimePoint = std::chrono::sys_seconds;

TimePoint from_epoch(std::int64_t seconds);
std::int64_t to_epoch(TimePoint t);

// "2025-04-21T18:00:00Z"; parse accepts only that exact shape.
std::string format_rfc3339(TimePoint t);
std::optional<TimePoint> parse_rfc3339(const std::string& s);

// "HH:MM" -> minutes since midnight.
std::optional<int> parse_hhmm(const std::string& s);

// Injectable time source. Everything that needs wall time reads it from here
// so tests and the scenario harness can pin or step the clock.
class Clock {
 public:
  Clock();
  explicit Clock(std::function<TimePoint()> fn);
  TimePoint now() const { return fn_(); }
  static Clock system();
  static Clock fixed(TimePoint t);

 private:
  std::function<TimePoint()> fn_;
};

// Shared settable clock handle; clock() stays valid after the handle is copied.
class ManualClock {
 public:
  explicit ManualClock(TimePoint start);
  Clock clock() const;
  void set(TimePoint t);
  void advance(std::chrono::seconds d);
  TimePoint now() const;

 private:
  std::shared_ptr<std::atomic<std::int64_t>> epoch_;
};

}  // namespace squatguard

#include "squatguard/time_utils.hpp"

#include <atomic>
#include <cstdio>

namespace squatguard {

using namespace std::chrono;

TimePoint from_epoch(std::int64_t s) { return TimePoint{seconds{s}}; }
std::int64_t to_epoch(TimePoint t) { return t.time_since_epoch().count(); }

std::string format_rfc3339(TimePoint t) {
  auto dp = floor<days>(t);
  year_month_day ymd{dp};
  hh_mm_ss hms{t - dp};
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02lld:%02lld:%02lldZ",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()),
                static_cast<long long>(hms.hours().count()),
                static_cast<long long>(hms.minutes().count()),
                static_cast<long long>(hms.seconds().count()));
  return buf;
}

std::optional<TimePoint> parse_rfc3339(const std::string& s) {
  if (s.size() != 20) return std::nullopt;
  int y, mo, d, h, mi, se;
  char t, z;
  if (std::sscanf(s.c_str(), "%4d-%2d-%2d%c%2d:%2d:%2d%c", &y, &mo, &d, &t, &h,
                  &mi, &se, &z) != 8)
    return std::nullopt;
  if (t != 'T' || z != 'Z') return std::nullopt;
  // sscanf tolerates signs and spaces inside fixed-width fields; re-check shape.
  for (size_t i = 0; i < 20; ++i) {
    char c = s[i];
    if (i == 4 || i == 7) {
      if (c != '-') return std::nullopt;
    } else if (i == 10 || i == 13 || i == 16 || i == 19) {
      continue;  // T : : Z checked above
    } else if (c < '0' || c > '9') {
      return std::nullopt;
    }
  }
  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                     day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  if (h > 23 || mi > 59 || se > 59) return std::nullopt;
  sys_days sd{ymd};
  return TimePoint{sd.time_since_epoch() + hours{h} + minutes{mi} + seconds{se}};
}

std::optional<int> parse_hhmm(const std::string& s) {
  if (s.size() != 5 || s[2] != ':') return std::nullopt;
  for (size_t i : {0u, 1u, 3u, 4u})
    if (s[i] < '0' || s[i] > '9') return std::nullopt;
  int h = (s[0] - '0') * 10 + (s[1] - '0');
  int m = (s[3] - '0') * 10 + (s[4] - '0');
  if (h > 23 || m > 59) return std::nullopt;
  return h * 60 + m;
}

Clock::Clock()
    : fn_([] { return time_point_cast<seconds>(system_clock::now()); }) {}
Clock::Clock(std::function<TimePoint()> fn) : fn_(std::move(fn)) {}
Clock Clock::system() { return Clock{}; }
Clock Clock::fixed(TimePoint t) {
  return Clock{[t] { return t; }};
}

ManualClock::ManualClock(TimePoint start)
    : epoch_(std::make_shared<std::atomic<std::int64_t>>(to_epoch(start))) {}
Clock ManualClock::clock() const {
  auto e = epoch_;
  return Clock{[e] { return from_epoch(e->load()); }};
}
void ManualClock::set(TimePoint t) { epoch_->store(to_epoch(t)); }
void ManualClock::advance(std::chrono::seconds d) { epoch_->fetch_add(d.count()); }
TimePoint ManualClock::now() const { return from_epoch(epoch_->load()); }

}  // namespace squatguard

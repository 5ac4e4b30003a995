#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <tuple>

#include "squatguard/policy.hpp"

namespace squatguard {

// Fixed-window counters keyed by (policy, agent, window start). Windows align
// to UTC minute/hour/day boundaries.
class RateLimiter {
 public:
  struct Result {
    bool allowed = false;
    std::int64_t remaining = 0;
  };

  // Check and consume one unit atomically; never increments past the limit.
  Result consume(const std::string& policy_id, const std::string& agent_id,
                 const RateLimitSpec& spec, TimePoint at);
  // Check only.
  bool peek(const std::string& policy_id, const std::string& agent_id,
            const RateLimitSpec& spec, TimePoint at) const;
  std::int64_t used(const std::string& policy_id, const std::string& agent_id,
                    const RateLimitSpec& spec, TimePoint at) const;

  static std::int64_t window_start(TimePoint at, RateInterval interval);

 private:
  using Key = std::tuple<std::string, std::string, std::int64_t>;
  mutable std::mutex mu_;
  std::map<Key, std::int64_t> counters_;
};

}  // namespace squatguard

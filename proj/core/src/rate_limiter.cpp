#include "squatguard/rate_limiter.hpp"

namespace squatguard {

std::int64_t RateLimiter::window_start(TimePoint at, RateInterval interval) {
  std::int64_t e = to_epoch(at);
  switch (interval) {
    case RateInterval::minute: return e - e % 60;
    case RateInterval::hour: return e - e % 3600;
    case RateInterval::day: return e - e % 86400;
  }
  return e;
}

RateLimiter::Result RateLimiter::consume(const std::string& policy_id,
                                         const std::string& agent_id,
                                         const RateLimitSpec& spec,
                                         TimePoint at) {
  std::lock_guard lk(mu_);
  Key k{policy_id, agent_id, window_start(at, spec.interval)};
  auto& used = counters_[k];
  if (used >= spec.requests) return {false, 0};
  ++used;
  return {true, spec.requests - used};
}

bool RateLimiter::peek(const std::string& policy_id, const std::string& agent_id,
                       const RateLimitSpec& spec, TimePoint at) const {
  return used(policy_id, agent_id, spec, at) < spec.requests;
}

std::int64_t RateLimiter::used(const std::string& policy_id,
                               const std::string& agent_id,
                               const RateLimitSpec& spec, TimePoint at) const {
  std::lock_guard lk(mu_);
  Key k{policy_id, agent_id, window_start(at, spec.interval)};
  auto it = counters_.find(k);
  return it == counters_.end() ? 0 : it->second;
}

}  // namespace squatguard

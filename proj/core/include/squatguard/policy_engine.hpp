#pragma once

#include <vector>

#include "squatguard/policy.hpp"
#include "squatguard/rate_limiter.hpp"

namespace squatguard {

// Default-deny evaluation over the policy set. Gates run in a fixed order:
//   1. agent must be ACTIVE            -> agent_inactive
//   2. tool must be ACTIVE             -> tool_inactive
//   3. tool on the agent's allow list  -> tool_not_allowed_for_agent
//   4. candidate policies: active, same tool, principal match, scope allowed
//      (principal+tool matches without the scope -> scope_not_allowed,
//       otherwise no_policy)
//   5. candidates ordered by (priority asc, policy_id asc); the first whose
//      conditions all hold wins. Conditions check as [minimum_tool_trust_score,
//      time_of_day, rate_limit]. If none passes, DENY with the first
//      candidate's first failing condition.
//   6. winner with require_approval -> REQUIRES_APPROVAL (nothing consumed);
//      otherwise PERMIT, and the rate-limit check itself consumed the unit, so
//      permits can never outrun the limit under concurrency.
class PolicyEngine {
 public:
  explicit PolicyEngine(RateLimiter& limiter) : limiter_(limiter) {}

  AccessDecision evaluate(const AgentRecord& agent, const ToolRecord& tool,
                          const std::string& scope, TimePoint at,
                          const std::vector<AccessPolicy>& policies);

 private:
  RateLimiter& limiter_;
};

}  // namespace squatguard

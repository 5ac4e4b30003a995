#include "squatguard/policy_engine.hpp"

#include <algorithm>

namespace squatguard {

AccessDecision PolicyEngine::evaluate(const AgentRecord& agent,
                                      const ToolRecord& tool,
                                      const std::string& scope, TimePoint at,
                                      const std::vector<AccessPolicy>& policies) {
  AccessDecision d;
  d.evaluated_at = at;

  auto deny = [&](DecisionReason r) {
    d.outcome = DecisionOutcome::DENY;
    d.reason = r;
    return d;
  };

  if (agent.status != AgentStatus::ACTIVE)
    return deny(DecisionReason::agent_inactive);
  if (tool.status != ToolStatus::ACTIVE)
    return deny(DecisionReason::tool_inactive);
  if (std::find(agent.allowed_tools.begin(), agent.allowed_tools.end(),
                tool.tool_id) == agent.allowed_tools.end())
    return deny(DecisionReason::tool_not_allowed_for_agent);

  bool principal_match_without_scope = false;
  std::vector<const AccessPolicy*> candidates;
  for (const auto& p : policies) {
    if (!p.is_active || p.tool_id != tool.tool_id) continue;
    if (!p.matches_principal(agent)) continue;
    if (std::find(p.allowed_scopes.begin(), p.allowed_scopes.end(), scope) ==
        p.allowed_scopes.end()) {
      principal_match_without_scope = true;
      continue;
    }
    candidates.push_back(&p);
  }
  if (candidates.empty())
    return deny(principal_match_without_scope ? DecisionReason::scope_not_allowed
                                              : DecisionReason::no_policy);

  std::sort(candidates.begin(), candidates.end(),
            [](const AccessPolicy* a, const AccessPolicy* b) {
              if (a->priority != b->priority) return a->priority < b->priority;
              return a->policy_id < b->policy_id;
            });

  std::optional<DecisionReason> first_failure;
  for (const AccessPolicy* p : candidates) {
    std::optional<DecisionReason> failure;
    if (p->conditions.minimum_tool_trust_score &&
        tool.trust_score < *p->conditions.minimum_tool_trust_score) {
      failure = DecisionReason::trust_below_minimum;
    } else if (p->conditions.time_of_day &&
               !p->conditions.time_of_day->contains(at)) {
      failure = DecisionReason::outside_time_window;
    } else if (p->conditions.rate_limit) {
      // The consume is the check: a granted unit is already counted by the
      // time we commit to PERMIT, so concurrent permits cannot exceed the cap.
      if (p->rules.require_approval) {
        if (!limiter_.peek(p->policy_id, agent.agent_id,
                           *p->conditions.rate_limit, at))
          failure = DecisionReason::rate_limited;
      } else if (!limiter_
                      .consume(p->policy_id, agent.agent_id,
                               *p->conditions.rate_limit, at)
                      .allowed) {
        failure = DecisionReason::rate_limited;
      }
    }

    if (!failure) {
      d.matched_policy_id = p->policy_id;
      if (p->rules.require_approval) {
        d.outcome = DecisionOutcome::REQUIRES_APPROVAL;
        d.reason = DecisionReason::approval_required;
      } else {
        d.outcome = DecisionOutcome::PERMIT;
        d.reason = DecisionReason::ok;
      }
      return d;
    }
    if (!first_failure) first_failure = failure;
  }
  return deny(*first_failure);
}

}  // namespace squatguard

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "squatguard/records.hpp"

namespace squatguard {

enum class RateInterval { minute, hour, day };
std::string_view to_string(RateInterval i);
std::optional<RateInterval> parse_rate_interval(std::string_view s);

struct RateLimitSpec {
  std::int64_t requests = 0;  // > 0
  RateInterval interval = RateInterval::day;
};

// Inclusive [start, end] wall-clock window, UTC only. Start must precede end;
// windows never wrap midnight.
struct TimeWindowSpec {
  std::string start;  // "HH:MM"
  std::string end;
  std::string timezone = "UTC";
  int start_minutes = 0;
  int end_minutes = 0;

  bool contains(TimePoint at) const;
};

struct PolicyConditions {
  std::optional<RateLimitSpec> rate_limit;
  std::optional<TimeWindowSpec> time_of_day;
  std::optional<int> minimum_tool_trust_score;  // [0, 100]
};

enum class PolicyLogLevel { DEBUG, INFO, WARN };
std::string_view to_string(PolicyLogLevel l);
std::optional<PolicyLogLevel> parse_policy_log_level(std::string_view s);

struct PolicyRules {
  bool require_approval = false;
  PolicyLogLevel log_level = PolicyLogLevel::INFO;
};

// "role:<name>" or "agent:<agent_id>".
struct Principal {
  enum class Kind { role, agent };
  Kind kind = Kind::role;
  std::string value;

  static std::optional<Principal> parse(std::string_view s);
  std::string str() const;
  bool matches(const AgentRecord& a) const;
};

struct AccessPolicy {
  std::string policy_id;
  std::string name;
  std::string description;
  std::string tool_id;
  std::vector<Principal> principals;
  std::vector<std::string> allowed_scopes;
  PolicyConditions conditions;
  PolicyRules rules;
  int priority = 0;  // lower value wins
  bool is_active = true;
  TimePoint created_at{};
  TimePoint updated_at{};
  std::string created_by;

  bool matches_principal(const AgentRecord& a) const;
};

// Parses a client policy body; throws ApiError(validation_error) on any
// malformed field. Lifecycle fields are rejected as server managed.
AccessPolicy policy_from_json(const json& j);
// External shape (client-facing).
json policy_public_json(const AccessPolicy& p);
// Public view plus lifecycle fields; also the storage round trip.
json policy_admin_json(const AccessPolicy& p);
AccessPolicy policy_from_internal_json(const json& j);

enum class DecisionOutcome { PERMIT, DENY, REQUIRES_APPROVAL };
std::string_view to_string(DecisionOutcome o);

enum class DecisionReason {
  ok,
  approval_required,
  agent_inactive,
  tool_inactive,
  tool_not_allowed_for_agent,
  no_policy,
  scope_not_allowed,
  trust_below_minimum,
  outside_time_window,
  rate_limited,
};
std::string_view to_string(DecisionReason r);

struct AccessDecision {
  DecisionOutcome outcome = DecisionOutcome::DENY;
  DecisionReason reason = DecisionReason::no_policy;
  std::optional<std::string> matched_policy_id;
  TimePoint evaluated_at{};

  json to_json() const;
};

}  // namespace squatguard

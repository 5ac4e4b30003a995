#include "squatguard/policy.hpp"

#include <algorithm>

#include "squatguard/errors.hpp"

namespace squatguard {

namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw ApiError(Errc::validation_error, msg);
}

bool is_scope_name(std::string_view s) {
  if (s.empty() || s.size() > 64) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' ||
           c == '-' || c == '.' || c == ':';
  });
}

}  // namespace

std::string_view to_string(RateInterval i) {
  switch (i) {
    case RateInterval::minute: return "minute";
    case RateInterval::hour: return "hour";
    case RateInterval::day: return "day";
  }
  return "day";
}

std::optional<RateInterval> parse_rate_interval(std::string_view s) {
  if (s == "minute") return RateInterval::minute;
  if (s == "hour") return RateInterval::hour;
  if (s == "day") return RateInterval::day;
  return std::nullopt;
}

bool TimeWindowSpec::contains(TimePoint at) const {
  auto day_seconds = to_epoch(at) % 86400;
  int m = static_cast<int>(day_seconds / 60);
  return m >= start_minutes && m <= end_minutes;
}

std::string_view to_string(PolicyLogLevel l) {
  switch (l) {
    case PolicyLogLevel::DEBUG: return "DEBUG";
    case PolicyLogLevel::INFO: return "INFO";
    case PolicyLogLevel::WARN: return "WARN";
  }
  return "INFO";
}

std::optional<PolicyLogLevel> parse_policy_log_level(std::string_view s) {
  if (s == "DEBUG") return PolicyLogLevel::DEBUG;
  if (s == "INFO") return PolicyLogLevel::INFO;
  if (s == "WARN") return PolicyLogLevel::WARN;
  return std::nullopt;
}

std::optional<Principal> Principal::parse(std::string_view s) {
  if (s.starts_with("role:") && s.size() > 5)
    return Principal{Kind::role, std::string(s.substr(5))};
  if (s.starts_with("agent:") && s.size() > 6)
    return Principal{Kind::agent, std::string(s.substr(6))};
  return std::nullopt;
}

std::string Principal::str() const {
  return (kind == Kind::role ? "role:" : "agent:") + value;
}

bool Principal::matches(const AgentRecord& a) const {
  if (kind == Kind::agent) return value == a.agent_id;
  return std::find(a.roles.begin(), a.roles.end(), value) != a.roles.end();
}

bool AccessPolicy::matches_principal(const AgentRecord& a) const {
  return std::any_of(principals.begin(), principals.end(),
                     [&](const Principal& p) { return p.matches(a); });
}

AccessPolicy policy_from_json(const json& j) {
  if (!j.is_object()) fail("policy body must be an object");
  static constexpr const char* kAllowed[] = {
      "policy_id", "name",  "description", "tool_id",  "principals",
      "allowed_scopes", "conditions", "rules", "priority", "is_active"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    if (std::any_of(std::begin(kAllowed), std::end(kAllowed),
                    [&](const char* a) { return k == a; }))
      continue;
    if (k == "created_at" || k == "updated_at" || k == "created_by")
      fail("field is server managed: " + k);
    fail("unknown field: " + k);
  }

  AccessPolicy p;
  auto get_string = [&](const char* key) -> std::string {
    if (!j.contains(key) || !j.at(key).is_string())
      fail(std::string("field must be a string: ") + key);
    return j.at(key).get<std::string>();
  };
  p.policy_id = get_string("policy_id");
  if (!is_valid_tool_id(p.policy_id)) fail("policy_id must match [a-z0-9_]{1,64}");
  p.name = get_string("name");
  if (p.name.empty()) fail("name must be non-empty");
  p.description = j.contains("description") ? get_string("description") : "";
  p.tool_id = get_string("tool_id");
  if (!is_valid_tool_id(p.tool_id)) fail("tool_id must match [a-z0-9_]{1,64}");

  if (!j.contains("principals") || !j.at("principals").is_array() ||
      j.at("principals").empty())
    fail("principals must be a non-empty array");
  for (const auto& e : j.at("principals")) {
    if (!e.is_string()) fail("principals must be strings");
    auto pr = Principal::parse(e.get<std::string>());
    if (!pr) fail("principals must be role:<name> or agent:<id>: " +
                  e.get<std::string>());
    p.principals.push_back(*pr);
  }

  if (!j.contains("allowed_scopes") || !j.at("allowed_scopes").is_array() ||
      j.at("allowed_scopes").empty())
    fail("allowed_scopes must be a non-empty array");
  for (const auto& e : j.at("allowed_scopes")) {
    if (!e.is_string() || !is_scope_name(e.get<std::string>()))
      fail("allowed_scopes entries must be scope names");
    p.allowed_scopes.push_back(e.get<std::string>());
  }

  if (j.contains("conditions")) {
    const json& c = j.at("conditions");
    if (!c.is_object()) fail("conditions must be an object");
    for (auto it = c.begin(); it != c.end(); ++it) {
      const std::string& k = it.key();
      if (k != "rate_limit" && k != "time_of_day" &&
          k != "minimum_tool_trust_score")
        fail("unknown condition: " + k);
    }
    if (c.contains("rate_limit")) {
      const json& rl = c.at("rate_limit");
      if (!rl.is_object() || !rl.contains("requests") ||
          !rl.at("requests").is_number_integer() ||
          !rl.contains("interval") || !rl.at("interval").is_string())
        fail("rate_limit must be {requests, interval}");
      RateLimitSpec spec;
      spec.requests = rl.at("requests").get<std::int64_t>();
      if (spec.requests <= 0) fail("rate_limit.requests must be positive");
      auto iv = parse_rate_interval(rl.at("interval").get<std::string>());
      if (!iv) fail("rate_limit.interval must be minute, hour, or day");
      spec.interval = *iv;
      p.conditions.rate_limit = spec;
    }
    if (c.contains("time_of_day")) {
      const json& tw = c.at("time_of_day");
      if (!tw.is_object() || !tw.contains("start") ||
          !tw.at("start").is_string() || !tw.contains("end") ||
          !tw.at("end").is_string() || !tw.contains("timezone"))
        fail("time_of_day must be {start, end, timezone}");
      TimeWindowSpec spec;
      spec.start = tw.at("start").get<std::string>();
      spec.end = tw.at("end").get<std::string>();
      if (tw.contains("timezone")) {
        if (!tw.at("timezone").is_string())
          fail("time_of_day.timezone must be a string");
        spec.timezone = tw.at("timezone").get<std::string>();
      }
      if (spec.timezone != "UTC") fail("time_of_day.timezone must be UTC");
      auto s = parse_hhmm(spec.start);
      auto e = parse_hhmm(spec.end);
      if (!s || !e) fail("time_of_day start/end must be HH:MM");
      if (*s >= *e) fail("time_of_day start must precede end");
      spec.start_minutes = *s;
      spec.end_minutes = *e;
      p.conditions.time_of_day = spec;
    }
    if (c.contains("minimum_tool_trust_score")) {
      const json& m = c.at("minimum_tool_trust_score");
      if (!m.is_number_integer())
        fail("minimum_tool_trust_score must be an integer");
      int v = m.get<int>();
      if (v < 0 || v > 100)
        fail("minimum_tool_trust_score must be within [0, 100]");
      p.conditions.minimum_tool_trust_score = v;
    }
  }

  if (j.contains("rules")) {
    const json& r = j.at("rules");
    if (!r.is_object()) fail("rules must be an object");
    for (auto it = r.begin(); it != r.end(); ++it) {
      const std::string& k = it.key();
      if (k != "require_approval" && k != "log_level") fail("unknown rule: " + k);
    }
    if (r.contains("require_approval")) {
      if (!r.at("require_approval").is_boolean())
        fail("rules.require_approval must be a boolean");
      p.rules.require_approval = r.at("require_approval").get<bool>();
    }
    if (r.contains("log_level")) {
      if (!r.at("log_level").is_string())
        fail("rules.log_level must be a string");
      auto l = parse_policy_log_level(r.at("log_level").get<std::string>());
      if (!l) fail("rules.log_level must be DEBUG, INFO, or WARN");
      p.rules.log_level = *l;
    }
  }

  if (j.contains("priority")) {
    if (!j.at("priority").is_number_integer())
      fail("priority must be an integer");
    p.priority = j.at("priority").get<int>();
  }
  if (j.contains("is_active")) {
    if (!j.at("is_active").is_boolean()) fail("is_active must be a boolean");
    p.is_active = j.at("is_active").get<bool>();
  }
  return p;
}

json policy_public_json(const AccessPolicy& p) {
  json principals = json::array();
  for (const auto& pr : p.principals) principals.push_back(pr.str());

  json conditions = json::object();
  if (p.conditions.rate_limit) {
    conditions["rate_limit"] =
        json{{"requests", p.conditions.rate_limit->requests},
             {"interval", std::string(to_string(p.conditions.rate_limit->interval))}};
  }
  if (p.conditions.time_of_day) {
    conditions["time_of_day"] = json{{"start", p.conditions.time_of_day->start},
                                     {"end", p.conditions.time_of_day->end},
                                     {"timezone", p.conditions.time_of_day->timezone}};
  }
  if (p.conditions.minimum_tool_trust_score)
    conditions["minimum_tool_trust_score"] = *p.conditions.minimum_tool_trust_score;

  return json{{"policy_id", p.policy_id},
              {"name", p.name},
              {"description", p.description},
              {"tool_id", p.tool_id},
              {"principals", principals},
              {"allowed_scopes", p.allowed_scopes},
              {"conditions", conditions},
              {"rules",
               json{{"require_approval", p.rules.require_approval},
                    {"log_level", std::string(to_string(p.rules.log_level))}}},
              {"priority", p.priority},
              {"is_active", p.is_active}};
}

json policy_admin_json(const AccessPolicy& p) {
  json j = policy_public_json(p);
  j["created_at"] = format_rfc3339(p.created_at);
  j["updated_at"] = format_rfc3339(p.updated_at);
  j["created_by"] = p.created_by;
  return j;
}

AccessPolicy policy_from_internal_json(const json& j) {
  json body = j;
  body.erase("created_at");
  body.erase("updated_at");
  body.erase("created_by");
  AccessPolicy p = policy_from_json(body);
  p.created_at = *parse_rfc3339(j.at("created_at").get<std::string>());
  p.updated_at = *parse_rfc3339(j.at("updated_at").get<std::string>());
  p.created_by = j.at("created_by").get<std::string>();
  return p;
}

std::string_view to_string(DecisionOutcome o) {
  switch (o) {
    case DecisionOutcome::PERMIT: return "PERMIT";
    case DecisionOutcome::DENY: return "DENY";
    case DecisionOutcome::REQUIRES_APPROVAL: return "REQUIRES_APPROVAL";
  }
  return "DENY";
}

std::string_view to_string(DecisionReason r) {
  switch (r) {
    case DecisionReason::ok: return "ok";
    case DecisionReason::approval_required: return "approval_required";
    case DecisionReason::agent_inactive: return "agent_inactive";
    case DecisionReason::tool_inactive: return "tool_inactive";
    case DecisionReason::tool_not_allowed_for_agent:
      return "tool_not_allowed_for_agent";
    case DecisionReason::no_policy: return "no_policy";
    case DecisionReason::scope_not_allowed: return "scope_not_allowed";
    case DecisionReason::trust_below_minimum: return "trust_below_minimum";
    case DecisionReason::outside_time_window: return "outside_time_window";
    case DecisionReason::rate_limited: return "rate_limited";
  }
  return "no_policy";
}

json AccessDecision::to_json() const {
  return json{{"outcome", std::string(to_string(outcome))},
              {"reason", std::string(to_string(reason))},
              {"matched_policy_id",
               matched_policy_id ? json(*matched_policy_id) : json(nullptr)},
              {"evaluated_at", format_rfc3339(evaluated_at)}};
}

}  // namespace squatguard

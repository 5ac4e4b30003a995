#pragma once

// Shared fixtures, a deterministic service harness, and independent oracles.
// The oracles re-derive expected values with their own arithmetic and state
// so a defect in the production path cannot hide inside the expectation.

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "squatguard/audit_log.hpp"
#include "squatguard/canonical.hpp"
#include "squatguard/config.hpp"
#include "squatguard/crypto.hpp"
#include "squatguard/errors.hpp"
#include "squatguard/policy.hpp"
#include "squatguard/records.hpp"
#include "squatguard/registry_service.hpp"
#include "squatguard/store.hpp"
#include "squatguard/time_utils.hpp"
#include "squatguard/vuln_feed.hpp"

namespace sgtest {

using namespace squatguard;

inline const char* kAdminA = "admin-a";
inline const char* kAdminB = "admin-b";
inline const char* kKeyA = "test-key-admin-a";
inline const char* kKeyB = "test-key-admin-b";

// A Monday, 14:00 UTC: inside the canonical 09:00-17:00 policy window.
inline TimePoint t0() { return *parse_rfc3339("2025-06-02T14:00:00Z"); }

inline ServiceKeys test_keys(std::uint64_t seed = 7) {
  ServiceKeys keys;
  keys.signing = Ed25519KeyPair::from_seed(
      sha256("test-signing:" + std::to_string(seed)));
  auto h = sha256("test-hmac:" + std::to_string(seed));
  keys.hmac_key.assign(h.begin(), h.end());
  return keys;
}

inline ServiceConfig test_config(bool dual_approval = true) {
  ServiceConfig cfg;
  cfg.dual_approval = dual_approval;
  cfg.admins = {{kAdminA, kKeyA}, {kAdminB, kKeyB}};
  return cfg;
}

// In-memory registry pinned to a manual clock and seeded ids.
struct TestService {
  ManualClock clock;
  RegistryService svc;

  explicit TestService(ServiceConfig cfg = test_config(),
                       std::uint64_t seed = 7)
      : clock(t0()),
        svc(std::move(cfg), test_keys(seed), make_backend(""), clock.clock(),
            seed) {}

  ToolRecord register_active_tool(const json& registration) {
    ToolRecord r = svc.register_tool(kAdminA, registration);
    if (svc.config().dual_approval) r = svc.approve_tool(kAdminB, r.tool_id);
    return r;
  }

  std::pair<AgentRecord, std::string> register_agent(const json& spec) {
    return svc.register_agent(kAdminA, spec);
  }
};

// The canonical summarizer tool, as a client registration body. Lifecycle and
// trust fields are server managed and belong in responses, not requests.
inline json summarizer_registration(
    const std::string& endpoint = "https://api.example.com/summarize/v1") {
  return json{
      {"tool_id", "tool_text_summarizer_v1"},
      {"name", "Text Summarizer"},
      {"description", "Summarizes long text documents..."},
      {"api_endpoint", endpoint},
      {"auth_method", "api_key"},
      {"auth_config",
       {{"mechanism", "header"},
        {"header_name", "X-API-Key"},
        {"credential_placeholder", "${JIT_API_KEY}"}}},
      {"parameters", json::object()},
      {"version", "1.0.0"},
      {"dependencies",
       json::array({{{"component", "summarization-sdk"}, {"version", "2.5.0"}},
                    {{"component", "logging-lib"}, {"version", "4.0.0"}}})},
      {"owner", "nlp-team@example.com"},
      {"tags", json::array({"text", "summarization", "nlp"})}};
}

// The canonical access policy over the summarizer.
inline json summarizer_policy() {
  return json{
      {"policy_id", "pol_basic_summarizer_access"},
      {"name", "Basic Summarizer Access"},
      {"description", "Allows read/execute on Summarizer tool..."},
      {"tool_id", "tool_text_summarizer_v1"},
      {"principals", json::array({"role:analyst", "agent:agent_id_123"})},
      {"allowed_scopes", json::array({"read", "execute"})},
      {"conditions",
       {{"rate_limit", {{"requests", 1000}, {"interval", "day"}}},
        {"time_of_day",
         {{"start", "09:00"}, {"end", "17:00"}, {"timezone", "UTC"}}},
        {"minimum_tool_trust_score", 75}}},
      {"rules", {{"require_approval", false}, {"log_level", "INFO"}}},
      {"priority", 10},
      {"is_active", true}};
}

inline json analyst_agent_spec(
    const std::vector<std::string>& allowed_tools = {
        "tool_text_summarizer_v1"}) {
  return json{{"name", "analyst-agent"},
              {"description", "Summarizes reports for the desk."},
              {"roles", json::array({"analyst"})},
              {"allowed_tools", allowed_tools}};
}

// Feed that drives the summarizer to exactly 60: one 9.8 CVSS vulnerability
// with a known exploit on summarization-sdk 2.5.0 (19.6 + 15), and a newer
// 2.6.0 release making that dependency stale (5). 100 - 39.6 rounds to 60.
inline std::string summarizer_feed_json() {
  json feed = {
      {"feed_timestamp", "2025-06-02T12:00:00Z"},
      {"entries",
       json::array({{{"id", "CVE-2025-0001"},
                     {"component", "summarization-sdk"},
                     {"affected_versions", json::array({"2.5.0"})},
                     {"cvss", 9.8},
                     {"exploit_known", true}}})},
      {"components", {{"summarization-sdk", "2.6.0"}}}};
  return feed.dump();
}

// ---------------------------------------------------------------------------
// Trust oracle: recomputes the score from the scoring rules using its own
// version comparison and clamping, sharing no code with the scored path.

inline std::vector<int> oracle_parse_version(const std::string& v) {
  std::vector<int> parts;
  std::string cur;
  for (char c : v) {
    if (c == '.') {
      parts.push_back(cur.empty() ? 0 : std::atoi(cur.c_str()));
      cur.clear();
    } else if (c >= '0' && c <= '9') {
      cur += c;
    } else {
      break;  // ignore pre-release and build suffixes
    }
  }
  parts.push_back(cur.empty() ? 0 : std::atoi(cur.c_str()));
  while (parts.size() < 3) parts.push_back(0);
  return parts;
}

inline bool oracle_version_less(const std::string& a, const std::string& b) {
  return oracle_parse_version(a) < oracle_parse_version(b);
}

inline int oracle_trust_score(const std::vector<Dependency>& deps,
                              const VulnFeed& feed) {
  double vuln = 0.0;
  double exploit = 0.0;
  double stale = 0.0;
  // Each feed entry penalizes once, however many dependencies it matches.
  for (const auto& entry : feed.entries) {
    bool matched = false;
    for (const auto& dep : deps) {
      if (entry.component != dep.component) continue;
      for (const auto& v : entry.affected_versions)
        if (v == dep.version) matched = true;
    }
    if (!matched) continue;
    vuln += 2.0 * entry.cvss;
    if (entry.exploit_known) exploit += 15.0;
  }
  for (const auto& dep : deps) {
    auto latest = feed.components.find(dep.component);
    if (latest != feed.components.end() &&
        oracle_version_less(dep.version, latest->second))
      stale += 5.0;
  }
  if (vuln > 60.0) vuln = 60.0;
  if (exploit > 30.0) exploit = 30.0;
  if (stale > 20.0) stale = 20.0;
  double raw = 100.0 - vuln - exploit - stale;
  int score = static_cast<int>(std::floor(raw + 0.5));
  if (score < 0) score = 0;
  if (score > 100) score = 100;
  return score;
}

// ---------------------------------------------------------------------------
// Access oracle: an independent walk of the decision rules with its own rate
// counters. Outcomes and reasons are compared as strings.

struct OracleDecision {
  std::string outcome;
  std::string reason;
  std::optional<std::string> policy_id;
};

struct AccessOracle {
  // (policy, agent, window start) -> granted units
  std::map<std::tuple<std::string, std::string, std::int64_t>, std::int64_t>
      used;

  static std::int64_t interval_seconds(RateInterval iv) {
    switch (iv) {
      case RateInterval::minute: return 60;
      case RateInterval::hour: return 3600;
      case RateInterval::day: return 86400;
    }
    return 86400;
  }

  static bool principal_matches(const Principal& p, const AgentRecord& a) {
    if (p.kind == Principal::Kind::agent) return p.value == a.agent_id;
    for (const auto& r : a.roles)
      if (r == p.value) return true;
    return false;
  }

  OracleDecision evaluate(const AgentRecord& agent, const ToolRecord& tool,
                          const std::string& scope, TimePoint at,
                          const std::vector<AccessPolicy>& policies) {
    if (agent.status != AgentStatus::ACTIVE)
      return {"DENY", "agent_inactive", std::nullopt};
    if (tool.status != ToolStatus::ACTIVE)
      return {"DENY", "tool_inactive", std::nullopt};
    bool allowed = false;
    for (const auto& t : agent.allowed_tools)
      if (t == tool.tool_id) allowed = true;
    if (!allowed) return {"DENY", "tool_not_allowed_for_agent", std::nullopt};

    bool principal_hit_without_scope = false;
    std::vector<const AccessPolicy*> candidates;
    for (const auto& p : policies) {
      if (!p.is_active || p.tool_id != tool.tool_id) continue;
      bool principal_hit = false;
      for (const auto& pr : p.principals)
        if (principal_matches(pr, agent)) principal_hit = true;
      if (!principal_hit) continue;
      bool scope_hit = false;
      for (const auto& s : p.allowed_scopes)
        if (s == scope) scope_hit = true;
      if (!scope_hit) {
        principal_hit_without_scope = true;
        continue;
      }
      candidates.push_back(&p);
    }
    if (candidates.empty())
      return {"DENY",
              principal_hit_without_scope ? "scope_not_allowed" : "no_policy",
              std::nullopt};

    std::sort(candidates.begin(), candidates.end(),
              [](const AccessPolicy* a, const AccessPolicy* b) {
                if (a->priority != b->priority)
                  return a->priority < b->priority;
                return a->policy_id < b->policy_id;
              });

    std::optional<std::string> first_failure;
    for (const AccessPolicy* p : candidates) {
      std::optional<std::string> failure;
      if (p->conditions.minimum_tool_trust_score &&
          tool.trust_score < *p->conditions.minimum_tool_trust_score)
        failure = "trust_below_minimum";
      if (!failure && p->conditions.time_of_day) {
        int minute = static_cast<int>((to_epoch(at) % 86400) / 60);
        if (minute < p->conditions.time_of_day->start_minutes ||
            minute > p->conditions.time_of_day->end_minutes)
          failure = "outside_time_window";
      }
      std::optional<std::tuple<std::string, std::string, std::int64_t>> key;
      if (!failure && p->conditions.rate_limit) {
        std::int64_t iv = interval_seconds(p->conditions.rate_limit->interval);
        std::int64_t window = to_epoch(at) - to_epoch(at) % iv;
        key = std::make_tuple(p->policy_id, agent.agent_id, window);
        if (used[*key] >= p->conditions.rate_limit->requests)
          failure = "rate_limited";
      }
      if (!failure) {
        if (p->rules.require_approval)
          return {"REQUIRES_APPROVAL", "approval_required", p->policy_id};
        if (key) used[*key] += 1;
        return {"PERMIT", "ok", p->policy_id};
      }
      if (!first_failure) first_failure = failure;
    }
    return {"DENY", *first_failure, std::nullopt};
  }
};

// ---------------------------------------------------------------------------
// Randomized decision instances for the engine-versus-oracle property run.
// Everything derives from one seeded rng so failures replay exactly.

struct PropertyGen {
  std::mt19937_64 rng{987654321};
  std::vector<std::string> roles{"analyst", "dev", "ops"};
  std::vector<std::string> scopes{"read", "write", "execute", "admin"};

  int irand(int lo, int hi) {
    return lo + static_cast<int>(rng() % (hi - lo + 1));
  }
  bool chance(int pct) { return irand(1, 100) <= pct; }
  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v[rng() % v.size()];
  }

  AgentRecord make_agent(int idx) {
    AgentRecord a;
    a.agent_id = "agent-" + std::to_string(idx);
    a.name = a.agent_id;
    a.status = chance(85) ? AgentStatus::ACTIVE : AgentStatus::DEACTIVATED;
    for (const auto& r : roles)
      if (chance(50)) a.roles.push_back(r);
    if (a.roles.empty()) a.roles.push_back(pick(roles));
    if (chance(85)) a.allowed_tools.push_back("tool_prop");
    return a;
  }

  ToolRecord make_tool() {
    ToolRecord t = tool_from_registration_json(summarizer_registration());
    t.tool_id = "tool_prop";
    int statuses = irand(1, 100);
    t.status = statuses <= 80   ? ToolStatus::ACTIVE
               : statuses <= 90 ? ToolStatus::PENDING
                                : ToolStatus::DEACTIVATED;
    t.trust_score = irand(0, 100);
    return t;
  }

  AccessPolicy make_policy(int idx, const std::vector<AgentRecord>& agents) {
    AccessPolicy p;
    p.policy_id = "pol_prop_" + std::to_string(idx);
    p.name = p.policy_id;
    p.tool_id = chance(90) ? "tool_prop" : "tool_other";
    int nprin = irand(1, 2);
    for (int i = 0; i < nprin; ++i) {
      Principal pr;
      if (chance(70)) {
        pr.kind = Principal::Kind::role;
        pr.value = pick(roles);
      } else {
        pr.kind = Principal::Kind::agent;
        pr.value = pick(agents).agent_id;
      }
      p.principals.push_back(pr);
    }
    for (const auto& s : scopes)
      if (chance(45)) p.allowed_scopes.push_back(s);
    if (p.allowed_scopes.empty()) p.allowed_scopes.push_back(pick(scopes));
    if (chance(45))
      p.conditions.minimum_tool_trust_score = pick<int>({40, 61, 75, 90});
    if (chance(40)) {
      TimeWindowSpec w;
      int variant = irand(1, 3);
      if (variant == 1) {
        w.start = "09:00";
        w.end = "17:00";
        w.start_minutes = 540;
        w.end_minutes = 1020;
      } else if (variant == 2) {
        w.start = "00:00";
        w.end = "08:59";
        w.start_minutes = 0;
        w.end_minutes = 539;
      } else {
        w.start = "13:30";
        w.end = "14:30";
        w.start_minutes = 810;
        w.end_minutes = 870;
      }
      p.conditions.time_of_day = w;
    }
    if (chance(50))
      p.conditions.rate_limit =
          RateLimitSpec{irand(1, 3), chance(70) ? RateInterval::minute
                                                : RateInterval::hour};
    p.rules.require_approval = chance(20);
    p.priority = irand(0, 3);
    p.is_active = chance(85);
    return p;
  }
};

// ---------------------------------------------------------------------------
// Process helpers for the CLI tests.

struct CmdResult {
  int exit_code = -1;
  std::string out;
};

// Runs through /bin/sh, captures stdout byte for byte; stderr goes to the
// given file so assertions on stdout stay exact.
inline CmdResult run_cmd(const std::string& cmd,
                         const std::string& stderr_path = "/dev/null") {
  CmdResult r;
  std::string full = cmd + " 2>" + stderr_path;
  FILE* pipe = ::popen(full.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = ::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  int status = ::pclose(pipe);
  if (WIFEXITED(status)) r.exit_code = WEXITSTATUS(status);
  return r;
}

inline std::string read_file_or_empty(const std::string& path) {
  FILE* f = ::fopen(path.c_str(), "rb");
  if (!f) return {};
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = ::fread(buf, 1, sizeof buf, f)) > 0) out.append(buf, n);
  ::fclose(f);
  return out;
}

}  // namespace sgtest

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "squatguard/base64.hpp"
#include "squatguard/errors.hpp"
#include "squatguard/policy.hpp"
#include "squatguard/policy_engine.hpp"
#include "squatguard/rate_limiter.hpp"
#include "squatguard/token.hpp"
#include "squatguard/trust_score.hpp"
#include "squatguard/vuln_feed.hpp"
#include "support.hpp"

using namespace squatguard;
using namespace sgtest;

TEST_CASE("vuln feed parsing") {
  VulnFeed feed = parse_vuln_feed(summarizer_feed_json());
  CHECK(format_rfc3339(feed.feed_timestamp) == "2025-06-02T12:00:00Z");
  REQUIRE(feed.entries.size() == 1);
  CHECK(feed.entries[0].id == "CVE-2025-0001");
  CHECK(feed.entries[0].component == "summarization-sdk");
  CHECK(feed.entries[0].affected_versions ==
        std::vector<std::string>{"2.5.0"});
  CHECK(feed.entries[0].cvss == doctest::Approx(9.8));
  CHECK(feed.entries[0].exploit_known);
  CHECK(feed.components.at("summarization-sdk") == "2.6.0");
}

TEST_CASE("vuln feed rejects malformed input") {
  auto expect = [](const std::string& body, Errc code) {
    try {
      parse_vuln_feed(body);
      FAIL("expected ApiError for: " << body);
    } catch (const ApiError& e) {
      CHECK(e.code() == code);
    }
  };
  expect("{not json", Errc::parse_error);
  expect("[]", Errc::validation_error);

  json base = json::parse(summarizer_feed_json());
  json j = base;
  j["entries"].push_back(j["entries"][0]);  // duplicate id
  expect(j.dump(), Errc::duplicate_entry_id);
  j = base;
  j["entries"][0]["cvss"] = 10.1;
  expect(j.dump(), Errc::validation_error);
  j = base;
  j["entries"][0]["cvss"] = -0.5;
  expect(j.dump(), Errc::validation_error);
  j = base;
  j["feed_timestamp"] = "yesterday";
  expect(j.dump(), Errc::validation_error);
  j = base;
  j["entries"][0]["affected_versions"] = json::array({"two.five"});
  expect(j.dump(), Errc::validation_error);
  j = base;
  j["components"]["summarization-sdk"] = "not-semver";
  expect(j.dump(), Errc::validation_error);
  j = base;
  j["entries"][0].erase("component");
  expect(j.dump(), Errc::validation_error);
}

TEST_CASE("trust score matches the canonical worked example") {
  ToolRecord tool = tool_from_registration_json(summarizer_registration());
  VulnFeed feed = parse_vuln_feed(summarizer_feed_json());
  TrustScoreReport rep = compute_trust_score(tool, feed, t0());
  // 100 - (2 * 9.8) - 15 - 5 = 60.4, rounded half up.
  CHECK(rep.score == 60);
  CHECK(rep.vuln_penalty == doctest::Approx(19.6));
  CHECK(rep.exploit_penalty == doctest::Approx(15.0));
  CHECK(rep.staleness_penalty == doctest::Approx(5.0));
  CHECK(rep.matched_vuln_ids == std::vector<std::string>{"CVE-2025-0001"});
  CHECK(rep.outdated_components ==
        std::vector<std::string>{"summarization-sdk"});
  CHECK(rep.score == oracle_trust_score(tool.dependencies, feed));
}

TEST_CASE("trust score caps and boundaries") {
  ToolRecord tool = tool_from_registration_json(summarizer_registration());
  VulnFeed empty;
  CHECK(compute_trust_score(tool, empty, t0()).score == 100);

  // Many critical exploited vulnerabilities saturate all caps: 100-60-30-20.
  json j = {{"feed_timestamp", "2025-06-02T12:00:00Z"},
            {"entries", json::array()},
            {"components",
             {{"summarization-sdk", "9.9.9"}, {"logging-lib", "9.9.9"}}}};
  for (int i = 0; i < 6; ++i)
    j["entries"].push_back({{"id", "CVE-2025-10" + std::to_string(i)},
                            {"component", "summarization-sdk"},
                            {"affected_versions", json::array({"2.5.0"})},
                            {"cvss", 10.0},
                            {"exploit_known", true}});
  VulnFeed sat = parse_vuln_feed(j.dump());
  TrustScoreReport rep = compute_trust_score(tool, sat, t0());
  CHECK(rep.vuln_penalty == doctest::Approx(60.0));
  CHECK(rep.exploit_penalty == doctest::Approx(30.0));
  CHECK(rep.staleness_penalty == doctest::Approx(10.0));
  CHECK(rep.score == 0);
  CHECK(rep.score == oracle_trust_score(tool.dependencies, sat));

  // A vulnerability on a version the tool does not use scores nothing.
  json miss = json::parse(summarizer_feed_json());
  miss["entries"][0]["affected_versions"] = json::array({"2.4.0"});
  miss["components"].erase("summarization-sdk");
  VulnFeed vf = parse_vuln_feed(miss.dump());
  CHECK(compute_trust_score(tool, vf, t0()).score == 100);
}

TEST_CASE("trust score agrees with the oracle over random feeds") {
  std::mt19937_64 rng(20250602);
  std::vector<std::string> components{"summarization-sdk", "logging-lib",
                                      "http-core", "yaml-parse"};
  std::vector<std::string> versions{"1.0.0", "2.5.0", "2.6.0", "4.0.0",
                                    "4.1.0"};
  auto pick = [&](const auto& v) { return v[rng() % v.size()]; };

  for (int round = 0; round < 300; ++round) {
    ToolRecord tool = tool_from_registration_json(summarizer_registration());
    tool.dependencies.clear();
    int ndeps = 1 + static_cast<int>(rng() % 4);
    for (int i = 0; i < ndeps; ++i)
      tool.dependencies.push_back({pick(components), pick(versions)});

    VulnFeed feed;
    int nentries = static_cast<int>(rng() % 8);
    for (int i = 0; i < nentries; ++i) {
      VulnEntry e;
      e.id = "CVE-2025-" + std::to_string(1000 + round * 10 + i);
      e.component = pick(components);
      int naff = 1 + static_cast<int>(rng() % 3);
      for (int k = 0; k < naff; ++k) e.affected_versions.push_back(pick(versions));
      e.cvss = static_cast<double>(rng() % 101) / 10.0;
      e.exploit_known = rng() % 2 == 0;
      feed.entries.push_back(e);
    }
    for (const auto& c : components)
      if (rng() % 2 == 0) feed.components[c] = pick(versions);

    TrustScoreReport rep = compute_trust_score(tool, feed, t0());
    int expected = oracle_trust_score(tool.dependencies, feed);
    REQUIRE_MESSAGE(rep.score == expected,
                    "round " << round << ": got " << rep.score << " want "
                             << expected);
  }
}

TEST_CASE("policy parsing keeps the canonical example intact") {
  AccessPolicy p = policy_from_json(summarizer_policy());
  CHECK(p.policy_id == "pol_basic_summarizer_access");
  CHECK(p.name == "Basic Summarizer Access");
  CHECK(p.tool_id == "tool_text_summarizer_v1");
  REQUIRE(p.principals.size() == 2);
  CHECK(p.principals[0].kind == Principal::Kind::role);
  CHECK(p.principals[0].value == "analyst");
  CHECK(p.principals[1].kind == Principal::Kind::agent);
  CHECK(p.principals[1].value == "agent_id_123");
  CHECK(p.allowed_scopes == std::vector<std::string>{"read", "execute"});
  REQUIRE(p.conditions.rate_limit.has_value());
  CHECK(p.conditions.rate_limit->requests == 1000);
  CHECK(p.conditions.rate_limit->interval == RateInterval::day);
  REQUIRE(p.conditions.time_of_day.has_value());
  CHECK(p.conditions.time_of_day->start_minutes == 540);
  CHECK(p.conditions.time_of_day->end_minutes == 1020);
  CHECK(p.conditions.minimum_tool_trust_score == 75);
  CHECK_FALSE(p.rules.require_approval);
  CHECK(p.rules.log_level == PolicyLogLevel::INFO);
  CHECK(p.priority == 10);
  CHECK(p.is_active);

  json round = policy_public_json(p);
  CHECK(round["policy_id"] == "pol_basic_summarizer_access");
  CHECK(round["conditions"]["rate_limit"]["interval"] == "day");
  CHECK(round["conditions"]["time_of_day"]["start"] == "09:00");
  CHECK(round["conditions"]["minimum_tool_trust_score"] == 75);
  CHECK(round["rules"]["log_level"] == "INFO");
}

TEST_CASE("policy parsing rejects malformed bodies") {
  auto expect_invalid = [](json body) {
    CHECK_THROWS_AS((void)policy_from_json(body), ApiError);
  };
  json base = summarizer_policy();
  json j = base;
  j["principals"] = json::array();
  expect_invalid(j);
  j = base;
  j["principals"] = json::array({"user:alice"});
  expect_invalid(j);
  j = base;
  j["allowed_scopes"] = json::array();
  expect_invalid(j);
  j = base;
  j["conditions"]["rate_limit"]["interval"] = "week";
  expect_invalid(j);
  j = base;
  j["conditions"]["rate_limit"]["requests"] = 0;
  expect_invalid(j);
  j = base;
  j["conditions"]["time_of_day"]["start"] = "17:00";
  j["conditions"]["time_of_day"]["end"] = "09:00";
  expect_invalid(j);
  j = base;
  j["conditions"]["time_of_day"]["timezone"] = "America/New_York";
  expect_invalid(j);
  j = base;
  j["conditions"]["time_of_day"].erase("timezone");
  expect_invalid(j);
  j = base;
  j["conditions"]["minimum_tool_trust_score"] = 101;
  expect_invalid(j);
  j = base;
  j["rules"]["log_level"] = "TRACE";
  expect_invalid(j);
  j = base;
  j["policy_id"] = "Pol Basic";
  expect_invalid(j);
  j = base;
  j["created_at"] = "2025-06-02T00:00:00Z";
  expect_invalid(j);
  j = base;
  j["unknown_condition_key"] = true;
  expect_invalid(j);
}

TEST_CASE("time window containment is inclusive") {
  AccessPolicy p = policy_from_json(summarizer_policy());
  const auto& w = *p.conditions.time_of_day;
  auto at = [](const char* s) { return *parse_rfc3339(s); };
  CHECK(w.contains(at("2025-06-02T09:00:00Z")));
  CHECK(w.contains(at("2025-06-02T17:00:59Z")));
  CHECK(w.contains(at("2025-06-02T12:30:00Z")));
  CHECK_FALSE(w.contains(at("2025-06-02T08:59:59Z")));
  CHECK_FALSE(w.contains(at("2025-06-02T17:01:00Z")));
  CHECK_FALSE(w.contains(at("2025-06-02T03:00:00Z")));
}

TEST_CASE("rate limiter windows and exhaustion") {
  RateLimiter rl;
  RateLimitSpec spec{3, RateInterval::minute};
  TimePoint at = *parse_rfc3339("2025-06-02T14:00:30Z");

  CHECK(RateLimiter::window_start(at, RateInterval::minute) ==
        to_epoch(*parse_rfc3339("2025-06-02T14:00:00Z")));
  CHECK(RateLimiter::window_start(at, RateInterval::hour) ==
        to_epoch(*parse_rfc3339("2025-06-02T14:00:00Z")));
  CHECK(RateLimiter::window_start(at, RateInterval::day) ==
        to_epoch(*parse_rfc3339("2025-06-02T00:00:00Z")));

  CHECK(rl.peek("p", "a", spec, at));
  CHECK(rl.used("p", "a", spec, at) == 0);
  for (int i = 0; i < 3; ++i) {
    auto r = rl.consume("p", "a", spec, at);
    CHECK(r.allowed);
    CHECK(r.remaining == 2 - i);
  }
  CHECK_FALSE(rl.consume("p", "a", spec, at).allowed);
  CHECK_FALSE(rl.peek("p", "a", spec, at));
  CHECK(rl.used("p", "a", spec, at) == 3);

  // Other keys are unaffected; the next window starts clean.
  CHECK(rl.consume("p", "b", spec, at).allowed);
  CHECK(rl.consume("q", "a", spec, at).allowed);
  TimePoint next = *parse_rfc3339("2025-06-02T14:01:00Z");
  CHECK(rl.consume("p", "a", spec, next).allowed);
  CHECK(rl.used("p", "a", spec, next) == 1);
}

TEST_CASE("token codec round trip and window edges") {
  auto key = test_keys().hmac_key;
  TokenCodec codec(key);
  TokenClaims claims;
  claims.jti = "jti-1";
  claims.sub = "agent-1";
  claims.aud = "tool_text_summarizer_v1";
  claims.scopes = {"execute"};
  claims.iat = 1000;
  claims.exp = 1300;
  std::string token = codec.encode(claims);
  CHECK(std::count(token.begin(), token.end(), '.') == 2);

  auto d = codec.verify(token, from_epoch(1000));
  REQUIRE(d.valid);
  CHECK(d.claims->jti == "jti-1");
  CHECK(d.claims->aud == "tool_text_summarizer_v1");
  CHECK(d.claims->scopes == std::vector<std::string>{"execute"});

  CHECK(codec.verify(token, from_epoch(1299)).valid);
  // Validity is [iat, exp): dead exactly at exp, not yet live before iat.
  auto at_exp = codec.verify(token, from_epoch(1300));
  CHECK_FALSE(at_exp.valid);
  CHECK(at_exp.failure == TokenFailure::expired);
  CHECK_FALSE(codec.verify(token, from_epoch(999)).valid);

  auto peeked = TokenCodec::peek_claims(token);
  REQUIRE(peeked.has_value());
  CHECK(peeked->jti == "jti-1");

  auto other = test_keys(99).hmac_key;
  auto cross = TokenCodec(other).verify(token, from_epoch(1100));
  CHECK(cross.failure == TokenFailure::bad_signature);

  CHECK(codec.verify("garbage", from_epoch(1100)).failure ==
        TokenFailure::malformed);
  CHECK(codec.verify("a.b", from_epoch(1100)).failure ==
        TokenFailure::malformed);
}

TEST_CASE("tampering with any token part breaks the signature") {
  TokenCodec codec(test_keys().hmac_key);
  TokenClaims claims;
  claims.jti = "jti-2";
  claims.sub = "agent-1";
  claims.aud = "tool_a";
  claims.scopes = {"read"};
  claims.iat = 1000;
  claims.exp = 2000;
  std::string token = codec.encode(claims);

  // Swap the audience inside the payload but keep the original signature.
  auto dot1 = token.find('.');
  auto dot2 = token.find('.', dot1 + 1);
  auto payload = *base64url_decode_string(
      token.substr(dot1 + 1, dot2 - dot1 - 1));
  json j = json::parse(payload);
  j["aud"] = "tool_b";
  std::string forged = token.substr(0, dot1 + 1) +
                       base64url_encode(j.dump()) + token.substr(dot2);
  auto d = codec.verify(forged, from_epoch(1500));
  CHECK_FALSE(d.valid);
  CHECK(d.failure == TokenFailure::bad_signature);
}

TEST_CASE("policy engine agrees with the oracle over random instances") {
  PropertyGen gen;
  int total = 0;
  for (int round = 0; round < 40; ++round) {
    std::vector<AgentRecord> agents;
    for (int i = 0; i < 3; ++i) agents.push_back(gen.make_agent(i));
    ToolRecord tool = gen.make_tool();
    std::vector<AccessPolicy> policies;
    int npol = gen.irand(1, 6);
    for (int i = 0; i < npol; ++i)
      policies.push_back(gen.make_policy(i, agents));

    RateLimiter limiter;
    PolicyEngine engine(limiter);
    AccessOracle oracle;
    TimePoint at = t0();

    for (int step = 0; step < 40; ++step, ++total) {
      const AgentRecord& agent = gen.pick(agents);
      std::string scope = gen.pick(gen.scopes);
      if (gen.chance(30)) at += std::chrono::seconds(gen.irand(1, 50));
      if (gen.chance(5)) at += std::chrono::seconds(3600);

      AccessDecision got = engine.evaluate(agent, tool, scope, at, policies);
      OracleDecision want = oracle.evaluate(agent, tool, scope, at, policies);

      REQUIRE_MESSAGE(
          std::string(to_string(got.outcome)) == want.outcome,
          "round " << round << " step " << step << ": outcome "
                   << to_string(got.outcome) << " want " << want.outcome
                   << " (reason " << to_string(got.reason) << ")");
      REQUIRE_MESSAGE(std::string(to_string(got.reason)) == want.reason,
                      "round " << round << " step " << step << ": reason "
                               << to_string(got.reason) << " want "
                               << want.reason);
      REQUIRE(got.matched_policy_id == want.policy_id);
    }
  }
  CHECK(total >= 1000);
}

#include <benchmark/benchmark.h>

#include "squatguard/audit_log.hpp"
#include "squatguard/canonical.hpp"
#include "squatguard/crypto.hpp"
#include "squatguard/policy.hpp"
#include "squatguard/policy_engine.hpp"
#include "squatguard/store.hpp"
#include "squatguard/token.hpp"
#include "squatguard/trust_score.hpp"

namespace sg = squatguard;

namespace {

sg::TimePoint bench_now() { return *sg::parse_rfc3339("2025-06-02T14:00:00Z"); }

sg::ToolRecord bench_tool() {
  sg::ToolRecord t;
  t.tool_id = "tool_text_summarizer_v1";
  t.name = "Text Summarizer";
  t.description = "Summarizes long text documents...";
  t.api_endpoint = "https://api.example.com/summarize/v1";
  t.auth_config = {sg::AuthMechanism::header, "X-API-Key", "${JIT_API_KEY}"};
  t.version = "1.0.0";
  t.dependencies = {{"summarization-sdk", "2.5.0"}, {"logging-lib", "4.0.0"}};
  t.trust_score = 92;
  t.last_trust_score_update = bench_now();
  t.owner = "nlp-team@example.com";
  t.tags = {"text", "summarization", "nlp"};
  t.status = sg::ToolStatus::ACTIVE;
  return t;
}

sg::AgentRecord bench_agent() {
  sg::AgentRecord a;
  a.agent_id = "9e4c1a2b-0000-4000-8000-000000000001";
  a.name = "analyst-agent";
  a.roles = {"analyst"};
  a.allowed_tools = {"tool_text_summarizer_v1"};
  return a;
}

std::vector<sg::AccessPolicy> bench_policies(int n) {
  std::vector<sg::AccessPolicy> out;
  for (int i = 0; i < n; ++i) {
    sg::json body = {
        {"policy_id", "pol_" + std::to_string(i)},
        {"name", "Bench Policy " + std::to_string(i)},
        {"tool_id",
         i + 1 == n ? "tool_text_summarizer_v1" : "tool_other_" + std::to_string(i)},
        {"principals", sg::json::array({"role:analyst"})},
        {"allowed_scopes", sg::json::array({"read", "execute"})},
        {"conditions",
         {{"time_of_day",
           {{"start", "09:00"}, {"end", "17:00"}, {"timezone", "UTC"}}},
          {"minimum_tool_trust_score", 75}}},
        {"priority", 10 + i},
        {"is_active", true}};
    out.push_back(sg::policy_from_json(body));
  }
  return out;
}

sg::VulnFeed bench_feed() {
  return sg::parse_vuln_feed(
      sg::json{
          {"feed_timestamp", "2025-06-01T00:00:00Z"},
          {"entries",
           sg::json::array({{{"id", "CVE-2025-0001"},
                             {"component", "summarization-sdk"},
                             {"affected_versions", sg::json::array({"2.5.0"})},
                             {"cvss", 9.8},
                             {"exploit_known", true}}})},
          {"components", {{"summarization-sdk", "2.6.0"}}}}
          .dump());
}

void bm_policy_evaluate(benchmark::State& state) {
  sg::RateLimiter limiter;
  sg::PolicyEngine engine(limiter);
  auto agent = bench_agent();
  auto tool = bench_tool();
  auto policies = bench_policies(static_cast<int>(state.range(0)));
  auto now = bench_now();
  for (auto _ : state) {
    auto d = engine.evaluate(agent, tool, "execute", now, policies);
    benchmark::DoNotOptimize(d);
  }
}
BENCHMARK(bm_policy_evaluate)->Arg(1)->Arg(16)->Arg(128);

void bm_trust_score(benchmark::State& state) {
  auto tool = bench_tool();
  auto feed = bench_feed();
  auto now = bench_now();
  for (auto _ : state) {
    auto r = sg::compute_trust_score(tool, feed, now, {});
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(bm_trust_score);

void bm_canonical_dump(benchmark::State& state) {
  auto record = sg::tool_public_json(bench_tool());
  for (auto _ : state) {
    auto s = sg::canonical_dump(record);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(bm_canonical_dump);

void bm_token_encode(benchmark::State& state) {
  sg::TokenCodec codec(std::vector<std::uint8_t>(32, 0x5a));
  sg::TokenClaims claims{"jti-1", "agent-1", "tool_text_summarizer_v1",
                         {"execute"}, 1000, 1300};
  for (auto _ : state) {
    auto t = codec.encode(claims);
    benchmark::DoNotOptimize(t);
  }
}
BENCHMARK(bm_token_encode);

void bm_token_verify(benchmark::State& state) {
  sg::TokenCodec codec(std::vector<std::uint8_t>(32, 0x5a));
  sg::TokenClaims claims{"jti-1", "agent-1", "tool_text_summarizer_v1",
                         {"execute"}, 1000, 1300};
  auto token = codec.encode(claims);
  auto now = sg::from_epoch(1100);
  for (auto _ : state) {
    auto d = codec.verify(token, now);
    benchmark::DoNotOptimize(d);
  }
}
BENCHMARK(bm_token_verify);

void bm_ed25519_sign(benchmark::State& state) {
  auto kp = sg::Ed25519KeyPair::from_seed(sg::sha256("bench-seed"));
  auto payload = sg::canonical_dump(sg::tool_public_json(bench_tool()));
  for (auto _ : state) {
    auto sig = sg::ed25519_sign_b64(kp, payload);
    benchmark::DoNotOptimize(sig);
  }
}
BENCHMARK(bm_ed25519_sign);

void bm_ed25519_verify(benchmark::State& state) {
  auto kp = sg::Ed25519KeyPair::from_seed(sg::sha256("bench-seed"));
  auto payload = sg::canonical_dump(sg::tool_public_json(bench_tool()));
  auto sig = sg::ed25519_sign_b64(kp, payload);
  for (auto _ : state) {
    bool ok = sg::ed25519_verify_b64(kp.public_key, payload, sig);
    benchmark::DoNotOptimize(ok);
  }
}
BENCHMARK(bm_ed25519_verify);

void bm_audit_append(benchmark::State& state) {
  sg::MemoryBackend backend;
  sg::AuditLog log(backend);
  auto now = bench_now();
  sg::PendingEvent e;
  e.type = sg::AuditEventType::DISCOVERY_QUERY;
  e.actor = {sg::ActorKind::agent, "agent-1"};
  // A fresh actor id per append keeps the flood rule from alerting mid-bench.
  std::uint64_t i = 0;
  for (auto _ : state) {
    e.actor.id = "agent-" + std::to_string(i++ / 8);
    auto ev = log.record(e, now);
    benchmark::DoNotOptimize(ev);
  }
}
BENCHMARK(bm_audit_append);

}  // namespace

BENCHMARK_MAIN();

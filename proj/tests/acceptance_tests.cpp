// Acceptance gate: every criterion below exercises the system end to end and
// prints exactly one PASS or FAIL line. The process exits with the number of
// failed criteria, so a zero exit means the whole gate held.

#include <atomic>
#include <chrono>
#include <functional>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>

#include "squatguard/client_verify.hpp"
#include "squatguard/policy_engine.hpp"
#include "squatguard/rate_limiter.hpp"
#include "squatguard/registry_service.hpp"
#include "squatguard/scenarios.hpp"
#include "squatguard/stub_tool_server.hpp"
#include "support.hpp"

using namespace squatguard;
using namespace sgtest;

namespace {

struct Checks {
  std::vector<std::string> notes;
  void expect(bool cond, const std::string& what) {
    if (!cond) notes.push_back(what);
  }
};

const AuditEvent* first_of(const std::vector<AuditEvent>& evs,
                           AuditEventType type) {
  for (const auto& e : evs)
    if (e.type == type) return &e;
  return nullptr;
}

// Deterministic string mutation that always changes its input.
std::string mutate_string(std::mt19937_64& rng, std::string s) {
  if (s.empty()) return "x";
  switch (rng() % 3) {
    case 0:
      s += 'x';
      break;
    case 1: {
      std::size_t i = rng() % s.size();
      char c = static_cast<char>('a' + rng() % 26);
      if (c == s[i]) c = (c == 'z') ? 'a' : static_cast<char>(c + 1);
      s[i] = c;
      break;
    }
    default:
      s.erase(rng() % s.size(), 1);
      break;
  }
  return s;
}

const ScenarioStep* step_named(const ScenarioReport& r,
                               const std::string& name) {
  for (const auto& s : r.steps)
    if (s.name == name) return &s;
  return nullptr;
}

ScenarioOptions scn(const std::string& mode, const std::string& variant,
                    const std::string& ablation = "none") {
  ScenarioOptions o;
  o.mode = mode;
  o.variant = variant;
  o.ablation = ablation;
  return o;
}

// ---------------------------------------------------------------------------

std::vector<std::string> check_end_to_end() {
  Checks c;
  auto started = std::chrono::steady_clock::now();

  TestService ts;
  ToolRecord tool = ts.svc.register_tool(kAdminA, summarizer_registration());
  c.expect(tool.status == ToolStatus::PENDING, "registration did not pend");
  tool = ts.svc.approve_tool(kAdminB, tool.tool_id);
  c.expect(tool.status == ToolStatus::ACTIVE, "approval did not activate");

  auto [agent, agent_credential] = ts.register_agent(analyst_agent_spec());
  c.expect(!agent_credential.empty(), "agent credential missing");
  ts.svc.upsert_policy(kAdminA, summarizer_policy());

  auto entries = ts.svc.discover_tools(agent, {});
  c.expect(entries.size() == 1 &&
               entries[0].tool.tool_id == "tool_text_summarizer_v1",
           "discovery did not return the tool");
  if (!entries.empty()) {
    auto v = verify_signed_record(ts.svc.public_key(),
                                  tool_public_json(entries[0].tool),
                                  entries[0].signed_record);
    c.expect(v.ok, "discovery record signature did not verify");
  }

  AccessResponse resp =
      ts.svc.request_access(agent, tool.tool_id, "execute");
  c.expect(resp.decision.outcome == DecisionOutcome::PERMIT,
           "expected PERMIT, got " +
               std::string(to_string(resp.decision.outcome)));
  c.expect(resp.credential.has_value(), "no credential minted");
  if (resp.credential) {
    auto v = ts.svc.verify_credential(resp.credential->token, tool.tool_id);
    c.expect(v.valid, "minted credential did not verify");
  }

  auto evs = ts.svc.query_events({});
  const AuditEvent* granted = first_of(evs, AuditEventType::ACCESS_GRANTED);
  const AuditEvent* issued = first_of(evs, AuditEventType::CREDENTIAL_ISSUED);
  c.expect(granted && issued && granted->seq + 1 == issued->seq,
           "grant and issue events are not adjacent");

  auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - started);
  c.expect(elapsed.count() < 5000,
           "flow took " + std::to_string(elapsed.count()) + "ms");
  return c.notes;
}

std::vector<std::string> check_trust_scoring() {
  Checks c;
  TestService ts;
  ToolRecord tool = ts.register_active_tool(summarizer_registration());
  auto [agent, _] = ts.register_agent(analyst_agent_spec());
  ts.svc.upsert_policy(kAdminA, summarizer_policy());

  FeedLoadResult loaded = ts.svc.load_feed(kAdminA, summarizer_feed_json());
  c.expect(loaded.reports.size() == 1, "expected one scored tool");
  if (!loaded.reports.empty())
    c.expect(loaded.reports[0].score == 60,
             "score " + std::to_string(loaded.reports[0].score) + " != 60");

  VulnFeed feed = parse_vuln_feed(summarizer_feed_json());
  int oracle = oracle_trust_score(tool.dependencies, feed);
  c.expect(oracle == 60, "oracle disagrees: " + std::to_string(oracle));

  auto entries = ts.svc.discover_tools(agent, {});
  c.expect(entries.size() == 1 && entries[0].tool.trust_score == 60,
           "published record does not carry the new score");

  AccessResponse resp = ts.svc.request_access(agent, tool.tool_id, "execute");
  c.expect(resp.decision.outcome == DecisionOutcome::DENY &&
               resp.decision.reason == DecisionReason::trust_below_minimum,
           "expected DENY trust_below_minimum, got " +
               std::string(to_string(resp.decision.outcome)) + "/" +
               std::string(to_string(resp.decision.reason)));
  c.expect(!resp.credential.has_value(), "credential minted despite denial");
  return c.notes;
}

std::vector<std::string> check_rate_limits() {
  Checks c;
  {
    TestService ts;
    ToolRecord tool = ts.register_active_tool(summarizer_registration());
    auto [agent, _] = ts.register_agent(analyst_agent_spec());
    ts.svc.upsert_policy(kAdminA, summarizer_policy());

    int permits = 0, rate_denials = 0, other = 0;
    for (int i = 0; i < 1005; ++i) {
      AccessResponse r = ts.svc.request_access(agent, tool.tool_id, "execute");
      if (r.decision.outcome == DecisionOutcome::PERMIT)
        ++permits;
      else if (r.decision.reason == DecisionReason::rate_limited)
        ++rate_denials;
      else
        ++other;
    }
    c.expect(permits == 1000,
             "sequential permits " + std::to_string(permits) + " != 1000");
    c.expect(rate_denials == 5,
             "sequential denials " + std::to_string(rate_denials) + " != 5");
    c.expect(other == 0, "unexpected non-rate denials");
  }
  {
    TestService ts;
    ToolRecord tool = ts.register_active_tool(summarizer_registration());
    auto [agent, _] = ts.register_agent(analyst_agent_spec());
    ts.svc.upsert_policy(kAdminA, summarizer_policy());

    for (int i = 0; i < 990; ++i) {
      AccessResponse r = ts.svc.request_access(agent, tool.tool_id, "execute");
      if (r.decision.outcome != DecisionOutcome::PERMIT) {
        c.expect(false, "warmup request denied at " + std::to_string(i));
        return c.notes;
      }
    }

    std::atomic<int> permits{0}, denials{0};
    std::vector<std::thread> workers;
    workers.reserve(50);
    for (int i = 0; i < 50; ++i)
      workers.emplace_back([&] {
        AccessResponse r =
            ts.svc.request_access(agent, tool.tool_id, "execute");
        if (r.decision.outcome == DecisionOutcome::PERMIT)
          ++permits;
        else
          ++denials;
      });
    for (auto& w : workers) w.join();
    c.expect(permits.load() == 10, "concurrent permits " +
                                       std::to_string(permits.load()) +
                                       " != 10");
    c.expect(denials.load() == 40, "concurrent denials " +
                                       std::to_string(denials.load()) +
                                       " != 40");
  }
  return c.notes;
}

std::vector<std::string> check_credential_lifecycle() {
  Checks c;
  TestService ts;

  StubToolServer::Options opts;
  opts.descriptor = {{"tool_id", "tool_text_summarizer_v1"},
                     {"name", "Text Summarizer"},
                     {"description", "Summarizes long text documents..."},
                     {"version", "1.0.0"}};
  opts.mechanism = AuthMechanism::header;
  opts.header_name = "X-API-Key";
  opts.verifier = [&ts](const std::string& token) {
    return ts.svc.verify_credential(token, "tool_text_summarizer_v1").valid;
  };
  StubToolServer stub(std::move(opts));
  int port = stub.start("127.0.0.1", 0);
  c.expect(port > 0, "stub did not start");

  ToolRecord tool =
      ts.register_active_tool(summarizer_registration(stub.base_url()));
  json other = summarizer_registration();
  other["tool_id"] = "tool_other_v1";
  other["name"] = "Other";
  ts.register_active_tool(other);
  auto [agent, _] = ts.register_agent(
      analyst_agent_spec({"tool_text_summarizer_v1", "tool_other_v1"}));
  ts.svc.upsert_policy(kAdminA, summarizer_policy());
  json other_policy = summarizer_policy();
  other_policy["policy_id"] = "pol_other";
  other_policy["tool_id"] = "tool_other_v1";
  ts.svc.upsert_policy(kAdminA, other_policy);

  AccessResponse resp = ts.svc.request_access(agent, tool.tool_id, "execute");
  if (!resp.credential) {
    c.expect(false, "no credential minted");
    return c.notes;
  }
  std::string token = resp.credential->token;

  httplib::Client cli(stub.base_url());
  auto call = [&](const std::string& tok) {
    httplib::Headers h{{"X-API-Key", tok}};
    auto res = cli.Post("/invoke", h, "{}", "application/json");
    return res ? res->status : -1;
  };

  c.expect(call(token) == 200, "tool rejected a fresh credential");

  std::string tampered = token;
  tampered[tampered.size() / 2] =
      tampered[tampered.size() / 2] == 'A' ? 'B' : 'A';
  c.expect(call(tampered) == 401, "tool accepted a tampered credential");

  // Validity is [iat, exp): the last valid second is exp - 1.
  ts.clock.advance(std::chrono::seconds(299));
  c.expect(call(token) == 200, "credential died before its expiry");
  auto at_exp = ts.svc.verify_credential(token, tool.tool_id);
  c.expect(at_exp.valid, "verify failed one second before expiry");

  ts.clock.advance(std::chrono::seconds(1));
  c.expect(call(token) == 401, "tool accepted an expired credential");
  auto expired = ts.svc.verify_credential(token, tool.tool_id);
  c.expect(!expired.valid && expired.failure == TokenFailure::expired,
           "expiry was not reported as expired");

  AccessResponse second = ts.svc.request_access(agent, tool.tool_id, "execute");
  if (!second.credential) {
    c.expect(false, "no second credential minted");
    return c.notes;
  }
  std::string token2 = second.credential->token;
  c.expect(call(token2) == 200, "tool rejected the replacement credential");
  ts.svc.admin_revoke(kAdminA,
                      json{{"jti", second.credential->credential_id}});
  c.expect(call(token2) == 401, "tool accepted a revoked credential");
  auto revoked = ts.svc.verify_credential(token2, tool.tool_id);
  c.expect(!revoked.valid && revoked.failure == TokenFailure::revoked,
           "revocation was not reported as revoked");

  // A credential minted for another tool must not open this one.
  AccessResponse cross = ts.svc.request_access(agent, "tool_other_v1", "execute");
  if (!cross.credential) {
    c.expect(false, "no cross-tool credential minted");
    return c.notes;
  }
  const std::string cross_token = cross.credential->token;
  c.expect(call(cross_token) == 401,
           "tool accepted a credential issued for another tool");
  auto cross_v = ts.svc.verify_credential(cross_token, tool.tool_id);
  c.expect(!cross_v.valid && cross_v.failure == TokenFailure::wrong_audience,
           "wrong audience was not reported");

  // Revoking by tool kills its live credentials and nothing else.
  AccessResponse third = ts.svc.request_access(agent, tool.tool_id, "execute");
  if (!third.credential) {
    c.expect(false, "no third credential minted");
    return c.notes;
  }
  const std::string token3 = third.credential->token;
  c.expect(call(token3) == 200, "tool rejected the third credential");
  ts.svc.admin_revoke(kAdminA, json{{"tool_id", tool.tool_id}});
  c.expect(call(token3) == 401,
           "tool accepted a credential after its audience was revoked");
  auto aud_rev = ts.svc.verify_credential(token3, tool.tool_id);
  c.expect(!aud_rev.valid && aud_rev.failure == TokenFailure::revoked,
           "audience revocation was not reported as revoked");
  auto untouched = ts.svc.verify_credential(cross_token, "tool_other_v1");
  c.expect(untouched.valid, "audience revocation hit an unrelated tool");
  return c.notes;
}

std::vector<std::string> check_description_poisoning() {
  Checks c;
  ScenarioReport attack = run_scenario("S1", scn("dual_approval", "attack"));
  c.expect(attack.overall_pass, "poisoning scenario did not hold");
  ScenarioReport control = run_scenario("S1", scn("dual_approval", "control"));
  c.expect(control.overall_pass, "honest-tool control raised a false alarm");

  TestService ts;
  ToolRecord tool = ts.register_active_tool(summarizer_registration());
  auto [agent, _] = ts.register_agent(analyst_agent_spec());
  ts.svc.upsert_policy(kAdminA, summarizer_policy());
  auto entries = ts.svc.discover_tools(agent, {});
  if (entries.size() != 1) {
    c.expect(false, "discovery fixture broken");
    return c.notes;
  }
  json record = tool_public_json(entries[0].tool);
  const SignedRecord& signed_rec = entries[0].signed_record;
  json honest = {{"tool_id", record["tool_id"]},
                 {"name", record["name"]},
                 {"description", record["description"]},
                 {"version", record["version"]}};
  const char* fields[] = {"tool_id", "name", "description", "version"};

  std::mt19937_64 rng(13579);
  int missed = 0, false_alarms = 0;
  for (int i = 0; i < 100; ++i) {
    json poisoned = honest;
    const char* field = fields[rng() % 4];
    poisoned[field] =
        mutate_string(rng, honest[field].get<std::string>());
    if (verify_live_description(record, poisoned).ok) ++missed;
  }
  c.expect(missed == 0,
           std::to_string(missed) + " poisoned descriptions slipped through");

  static const char kB64[] =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-_";
  int forged = 0;
  for (int i = 0; i < 100; ++i) {
    json rec = record;
    SignedRecord sr = signed_rec;
    switch (rng() % 3) {
      case 0:
        sr.canonical_payload = mutate_string(rng, sr.canonical_payload);
        break;
      case 1: {
        std::size_t p = rng() % sr.signature.size();
        char repl = kB64[rng() % 64];
        if (repl == sr.signature[p]) repl = repl == 'A' ? 'B' : 'A';
        sr.signature[p] = repl;
        break;
      }
      default:
        rec["description"] =
            mutate_string(rng, rec["description"].get<std::string>());
        break;
    }
    if (verify_signed_record(ts.svc.public_key(), rec, sr).ok) ++forged;
  }
  c.expect(forged == 0,
           std::to_string(forged) + " forged records slipped through");

  for (int i = 0; i < 100; ++i) {
    if (!verify_live_description(record, honest).ok) ++false_alarms;
    if (!verify_signed_record(ts.svc.public_key(), record, signed_rec).ok)
      ++false_alarms;
  }
  c.expect(false_alarms == 0,
           std::to_string(false_alarms) + " false alarms on honest data");
  return c.notes;
}

std::vector<std::string> check_squat_containment() {
  Checks c;
  ScenarioReport dual = run_scenario("S2", scn("dual_approval", "attack"));
  c.expect(dual.overall_pass, "dual-approval squat scenario did not hold");
  ScenarioReport single = run_scenario("S2", scn("single_admin", "attack"));
  c.expect(single.overall_pass, "single-admin squat scenario did not hold");
  ScenarioReport control = run_scenario("S2", scn("dual_approval", "control"));
  c.expect(control.overall_pass, "legitimate v2 control did not hold");

  // Each ablation must flip a step that held in the un-ablated run.
  struct Flip {
    const char* id;
    ScenarioOptions with;
    const ScenarioReport* baseline;
    const char* step;
  };
  ScenarioReport s1 = run_scenario("S1", scn("dual_approval", "attack"));
  std::vector<Flip> flips = {
      {"S2", scn("dual_approval", "attack", "dual_approval"), &dual,
       "squat_stays_pending"},
      {"S2", scn("single_admin", "attack", "trust_floor"), &single,
       "trust_floor_blocks_access"},
      {"S1", scn("dual_approval", "attack", "signing"), &s1,
       "client_refuses_poisoned_endpoint"},
  };
  for (const auto& f : flips) {
    const ScenarioStep* before = step_named(*f.baseline, f.step);
    if (!before || !before->pass) {
      c.expect(false, std::string(f.step) + " did not hold before ablation");
      continue;
    }
    ScenarioReport ablated = run_scenario(f.id, f.with);
    const ScenarioStep* after = step_named(ablated, f.step);
    c.expect(after && !after->pass,
             std::string(f.step) + " did not flip under ablation " +
                 f.with.ablation);
    c.expect(!ablated.overall_pass,
             std::string("ablation ") + f.with.ablation +
                 " left the scenario green");
  }
  return c.notes;
}

std::vector<std::string> check_decision_oracle() {
  Checks c;
  PropertyGen gen;
  gen.rng.seed(1122334455);
  int total = 0, mismatches = 0;
  for (int round = 0; round < 30; ++round) {
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
      bool same = std::string(to_string(got.outcome)) == want.outcome &&
                  std::string(to_string(got.reason)) == want.reason &&
                  got.matched_policy_id == want.policy_id;
      if (!same && ++mismatches == 1)
        c.expect(false, "first mismatch at round " + std::to_string(round) +
                            " step " + std::to_string(step) + ": engine " +
                            std::string(to_string(got.outcome)) + "/" +
                            std::string(to_string(got.reason)) + ", oracle " +
                            want.outcome + "/" + want.reason);
    }
  }
  c.expect(total >= 1000, "only " + std::to_string(total) + " instances");
  c.expect(mismatches == 0,
           std::to_string(mismatches) + " of " + std::to_string(total) +
               " decisions disagreed with the oracle");
  return c.notes;
}

std::vector<std::string> check_audit_completeness() {
  Checks c;
  TestService ts;
  std::vector<AuditEventType> expected;

  ToolRecord tool = ts.svc.register_tool(kAdminA, summarizer_registration());
  expected.push_back(AuditEventType::TOOL_REGISTERED);
  ts.svc.approve_tool(kAdminB, tool.tool_id);
  expected.push_back(AuditEventType::TOOL_APPROVED);
  auto [agent, _] = ts.register_agent(analyst_agent_spec());
  expected.push_back(AuditEventType::AGENT_REGISTERED);

  json policy = summarizer_policy();
  policy.erase("conditions");  // no floor: the feed load must stay an update
  ts.svc.upsert_policy(kAdminA, policy);
  expected.push_back(AuditEventType::POLICY_UPSERTED);

  ts.svc.discover_tools(agent, {});
  expected.push_back(AuditEventType::DISCOVERY_QUERY);

  AccessResponse ok = ts.svc.request_access(agent, tool.tool_id, "execute");
  expected.push_back(AuditEventType::ACCESS_GRANTED);
  expected.push_back(AuditEventType::CREDENTIAL_ISSUED);
  c.expect(ok.decision.outcome == DecisionOutcome::PERMIT, "scripted permit failed");

  AccessResponse denied =
      ts.svc.request_access(agent, tool.tool_id, "delete");
  expected.push_back(AuditEventType::ACCESS_DENIED);
  c.expect(denied.decision.outcome == DecisionOutcome::DENY, "scripted deny failed");

  ts.svc.load_feed(kAdminA, summarizer_feed_json());
  expected.push_back(AuditEventType::TRUST_SCORE_UPDATED);

  if (ok.credential) {
    ts.svc.admin_revoke(kAdminA, json{{"jti", ok.credential->credential_id}});
    expected.push_back(AuditEventType::CREDENTIAL_REVOKED);
  }

  auto evs = ts.svc.query_events({});
  c.expect(evs.size() == expected.size(),
           "event count " + std::to_string(evs.size()) + " != scripted " +
               std::to_string(expected.size()));
  for (std::size_t i = 0; i < evs.size() && i < expected.size(); ++i) {
    c.expect(evs[i].seq == i + 1,
             "seq gap at index " + std::to_string(i));
    c.expect(evs[i].type == expected[i],
             "event " + std::to_string(i + 1) + " is " +
                 std::string(to_string(evs[i].type)) + ", scripted " +
                 std::string(to_string(expected[i])));
  }
  c.expect(!AuditLog::verify_chain(evs).has_value(), "hash chain broken");

  std::string export1 = ts.svc.export_events_jsonl(0, 0);
  std::string export2 = ts.svc.export_events_jsonl(0, 0);
  c.expect(export1 == export2, "export is not deterministic");
  std::size_t lines = 0;
  for (char ch : export1)
    if (ch == '\n') ++lines;
  c.expect(lines == evs.size(), "export line count mismatch");

  std::size_t pos = 0;
  std::uint64_t want_seq = 1;
  while (pos < export1.size()) {
    std::size_t nl = export1.find('\n', pos);
    json line = json::parse(export1.substr(pos, nl - pos), nullptr, false);
    if (line.is_discarded() || line.value("seq", std::uint64_t{0}) != want_seq)
      c.expect(false, "export line " + std::to_string(want_seq) + " malformed");
    ++want_seq;
    pos = nl + 1;
  }
  return c.notes;
}

std::vector<std::string> check_signature_soundness() {
  Checks c;
  TestService ts;
  ToolRecord tool = ts.register_active_tool(summarizer_registration());
  auto [agent, _] = ts.register_agent(analyst_agent_spec());
  ts.svc.upsert_policy(kAdminA, summarizer_policy());

  auto entries = ts.svc.discover_tools(agent, {});
  if (entries.size() != 1) {
    c.expect(false, "discovery fixture broken");
    return c.notes;
  }
  const json record = tool_public_json(entries[0].tool);
  const SignedRecord honest = entries[0].signed_record;
  c.expect(verify_signed_record(ts.svc.public_key(), record, honest).ok,
           "honest record did not verify before mutation");

  // One byte anywhere in payload or signature, replaced by any other byte,
  // must break verification.
  std::mt19937_64 rng(97531);
  const std::size_t payload_len = honest.canonical_payload.size();
  const std::size_t total = payload_len + honest.signature.size();
  int record_survivors = 0;
  for (int i = 0; i < 10000; ++i) {
    SignedRecord mutant = honest;
    std::size_t pos = rng() % total;
    std::string& target = pos < payload_len ? mutant.canonical_payload
                                            : mutant.signature;
    std::size_t at = pos < payload_len ? pos : pos - payload_len;
    char original = target[at];
    char replacement;
    do {
      replacement = static_cast<char>(rng() % 256);
    } while (replacement == original);
    target[at] = replacement;
    if (verify_signed_record(ts.svc.public_key(), record, mutant).ok)
      ++record_survivors;
  }
  c.expect(record_survivors == 0,
           std::to_string(record_survivors) + " mutated records verified");
  c.expect(verify_signed_record(ts.svc.public_key(), record, honest).ok,
           "the unmutated record stopped verifying");

  // Credential tokens get the same treatment.
  AccessResponse resp = ts.svc.request_access(agent, tool.tool_id, "execute");
  if (!resp.credential) {
    c.expect(false, "no credential minted");
    return c.notes;
  }
  const std::string token = resp.credential->token;
  int token_survivors = 0;
  for (int i = 0; i < 10000; ++i) {
    std::string mutant = token;
    std::size_t pos = rng() % mutant.size();
    char original = mutant[pos];
    char replacement;
    do {
      replacement = static_cast<char>(rng() % 256);
    } while (replacement == original);
    mutant[pos] = replacement;
    if (ts.svc.verify_credential(mutant, tool.tool_id).valid)
      ++token_survivors;
  }
  c.expect(token_survivors == 0,
           std::to_string(token_survivors) + " mutated tokens verified");
  c.expect(ts.svc.verify_credential(token, tool.tool_id).valid,
           "the unmutated token stopped verifying");
  return c.notes;
}

}  // namespace

int main() {
  struct Criterion {
    const char* title;
    std::function<std::vector<std::string>()> run;
  };
  std::vector<Criterion> criteria = {
      {"registration, approval, discovery, and credential issue complete end "
       "to end",
       check_end_to_end},
      {"vulnerability feed drives the published trust score and the policy "
       "floor denies",
       check_trust_scoring},
      {"rate limits hold exactly under sequential and concurrent load",
       check_rate_limits},
      {"credentials expire on the boundary and die on tamper and revocation",
       check_credential_lifecycle},
      {"description poisoning is always refused and honest tools never "
       "flagged",
       check_description_poisoning},
      {"registry squatting stays contained and each removed control reopens "
       "it",
       check_squat_containment},
      {"policy decisions match an independent oracle across random instances",
       check_decision_oracle},
      {"every scripted action lands in the hash chain once and exports "
       "verbatim",
       check_audit_completeness},
      {"every single-byte mutation of a signed record or token fails "
       "verification",
       check_signature_soundness},
  };

  int failed = 0;
  for (const auto& cr : criteria) {
    std::vector<std::string> notes;
    try {
      notes = cr.run();
    } catch (const std::exception& e) {
      notes.push_back(std::string("exception: ") + e.what());
    }
    if (notes.empty()) {
      std::cout << "PASS  " << cr.title << "\n";
    } else {
      std::cout << "FAIL  " << cr.title << "\n";
      ++failed;
      for (const auto& n : notes) std::cerr << "      - " << n << "\n";
    }
  }
  return failed;
}

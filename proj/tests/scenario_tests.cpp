#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "squatguard/errors.hpp"
#include "squatguard/scenarios.hpp"
#include "support.hpp"

using namespace squatguard;

namespace {

const ScenarioStep* find_step(const ScenarioReport& r, const std::string& name) {
  for (const auto& s : r.steps)
    if (s.name == name) return &s;
  return nullptr;
}

void check_step(const ScenarioReport& r, const std::string& name,
                const std::string& expected, bool pass) {
  const ScenarioStep* s = find_step(r, name);
  REQUIRE_MESSAGE(s != nullptr, "missing step " << name << " in "
                                                << r.to_json().dump(2));
  CHECK_MESSAGE(s->expected == expected, name << ": " << s->actual);
  CHECK_MESSAGE(s->pass == pass, name << ": " << s->actual);
}

ScenarioOptions opts(std::string mode, std::string variant,
                     std::string ablation = "none", bool clean_sbom = false) {
  ScenarioOptions o;
  o.mode = std::move(mode);
  o.variant = std::move(variant);
  o.ablation = std::move(ablation);
  o.clean_sbom = clean_sbom;
  return o;
}

}  // namespace

TEST_CASE("scenario ids and option validation") {
  CHECK(scenario_ids() == std::vector<std::string>{"S1", "S2"});
  CHECK_THROWS_AS((void)run_scenario("S9", {}), ApiError);
  CHECK_THROWS_AS((void)run_scenario("S1", opts("triple", "attack")), ApiError);
  CHECK_THROWS_AS((void)run_scenario("S1", opts("dual_approval", "replay")),
                  ApiError);
  CHECK_THROWS_AS(
      (void)run_scenario("S1", opts("dual_approval", "attack", "everything")),
      ApiError);
}

TEST_CASE("poisoned description attack is refused and alerted") {
  ScenarioReport r = run_scenario("S1", opts("dual_approval", "attack"));
  CHECK(r.scenario_id == "S1_description_poisoning");
  REQUIRE(r.steps.size() == 5);
  check_step(r, "anonymous_description_update", "blocked", true);
  check_step(r, "agent_credential_description_update", "blocked", true);
  check_step(r, "client_refuses_poisoned_endpoint", "detected", true);
  check_step(r, "mismatch_alert_recorded", "detected", true);
  check_step(r, "registry_record_intact", "blocked", true);
  CHECK(r.overall_pass);
  CHECK_FALSE(r.related_audit_seqs.empty());
}

TEST_CASE("honest endpoint control run stays clean") {
  ScenarioReport r = run_scenario("S1", opts("dual_approval", "control"));
  REQUIRE(r.steps.size() == 2);
  check_step(r, "verified_invoke_succeeds", "allowed", true);
  check_step(r, "no_false_alerts", "allowed", true);
  CHECK(r.overall_pass);
}

TEST_CASE("disabling client verification lets the poisoned endpoint through") {
  ScenarioReport r =
      run_scenario("S1", opts("dual_approval", "attack", "signing"));
  check_step(r, "client_refuses_poisoned_endpoint", "detected", false);
  check_step(r, "mismatch_alert_recorded", "detected", false);
  // The write path is independent of client verification and still holds.
  check_step(r, "anonymous_description_update", "blocked", true);
  check_step(r, "registry_record_intact", "blocked", true);
  CHECK_FALSE(r.overall_pass);
}

TEST_CASE("rogue admin is contained by dual approval") {
  ScenarioReport r = run_scenario("S2", opts("dual_approval", "attack"));
  CHECK(r.scenario_id == "S2_rogue_registration");
  check_step(r, "nonadmin_registration", "blocked", true);
  check_step(r, "admin_registration_accepted", "allowed", true);
  check_step(r, "self_approval", "blocked", true);
  check_step(r, "squat_stays_pending", "blocked", true);
  check_step(r, "squat_hidden_from_discovery", "blocked", true);
  check_step(r, "squat_access_denied", "blocked", true);
  check_step(r, "registration_attributed", "detected", true);
  check_step(r, "rogue_policy_attributed", "detected", true);
  check_step(r, "legit_tool_unaffected", "allowed", true);
  CHECK(r.overall_pass);
  CHECK_FALSE(r.related_audit_seqs.empty());
}

TEST_CASE("single admin mode falls back to the trust floor") {
  ScenarioReport r = run_scenario("S2", opts("single_admin", "attack"));
  check_step(r, "squat_activates_without_second_approver", "allowed", true);
  check_step(r, "squat_discoverable", "allowed", true);
  check_step(r, "trust_floor_blocks_access", "blocked", true);
  const ScenarioStep* floor = find_step(r, "trust_floor_blocks_access");
  REQUIRE(floor != nullptr);
  CHECK(floor->actual.find("trust_score=60") != std::string::npos);
  CHECK(floor->actual.find("trust_below_minimum") != std::string::npos);
  check_step(r, "registration_attributed", "detected", true);
  check_step(r, "legit_tool_unaffected", "allowed", true);
  CHECK(r.overall_pass);
  CHECK(find_step(r, "self_approval") == nullptr);
}

TEST_CASE("a clean sbom clears the floor and exposes the residual risk") {
  ScenarioReport r =
      run_scenario("S2", opts("single_admin", "attack", "none", true));
  check_step(r, "clean_sbom_access_permitted", "allowed", true);
  CHECK(find_step(r, "trust_floor_blocks_access") == nullptr);
  check_step(r, "registration_attributed", "detected", true);
  CHECK(r.overall_pass);
}

TEST_CASE("rogue scenario control run stays clean") {
  ScenarioReport r = run_scenario("S2", opts("dual_approval", "control"));
  check_step(r, "admin_registration_accepted", "allowed", true);
  check_step(r, "approved_v2_discoverable", "allowed", true);
  check_step(r, "approved_v2_access_permitted", "allowed", true);
  check_step(r, "no_false_alerts", "allowed", true);
  CHECK(r.overall_pass);
  CHECK(find_step(r, "nonadmin_registration") == nullptr);
}

TEST_CASE("removing dual approval flips the containment steps") {
  ScenarioReport r =
      run_scenario("S2", opts("dual_approval", "attack", "dual_approval"));
  check_step(r, "squat_stays_pending", "blocked", false);
  check_step(r, "squat_hidden_from_discovery", "blocked", false);
  check_step(r, "self_approval", "blocked", false);
  // Defense in depth: the floor still denies the vulnerable look-alike.
  check_step(r, "squat_access_denied", "blocked", true);
  CHECK_FALSE(r.overall_pass);
}

TEST_CASE("removing the trust floor flips the last line of defense") {
  ScenarioReport r =
      run_scenario("S2", opts("single_admin", "attack", "trust_floor"));
  check_step(r, "squat_activates_without_second_approver", "allowed", true);
  check_step(r, "trust_floor_blocks_access", "blocked", false);
  const ScenarioStep* floor = find_step(r, "trust_floor_blocks_access");
  REQUIRE(floor != nullptr);
  CHECK(floor->actual.find("outcome=PERMIT") != std::string::npos);
  CHECK_FALSE(r.overall_pass);
}

TEST_CASE("same options and seed reproduce the report byte for byte") {
  for (const char* id : {"S1", "S2"}) {
    ScenarioOptions o = opts("dual_approval", "attack");
    o.seed = 1234;
    std::string a = run_scenario(id, o).to_json().dump(2);
    std::string b = run_scenario(id, o).to_json().dump(2);
    CHECK_MESSAGE(a == b, "non-deterministic report for " << id);
  }
  ScenarioOptions o = opts("single_admin", "attack");
  o.seed = 77;
  CHECK(run_scenario("S2", o).to_json() == run_scenario("S2", o).to_json());
}

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "squatguard/canonical.hpp"

namespace squatguard {

struct ScenarioOptions {
  std::string mode = "dual_approval";  // dual_approval | single_admin
  std::string variant = "attack";      // attack | control
  // none | signing | dual_approval | trust_floor: disables one defense while
  // keeping the attack-run expectations, so the failing step names which
  // control was load-bearing.
  std::string ablation = "none";
  bool clean_sbom = false;  // S2: the look-alike ships a clean dependency set
  std::uint64_t seed = 42;
};

struct ScenarioStep {
  std::string name;
  std::string expected;  // blocked | detected | allowed
  std::string actual;    // what the run observed
  bool pass = false;

  json to_json() const;
};

// One replay of a squatting attack against a live in-process registry,
// gateway, and (for S1) tool endpoint. Runs are deterministic for a given
// options struct: seeded ids and keys, pinned clock.
struct ScenarioReport {
  std::string scenario_id;  // S1_description_poisoning | S2_rogue_registration
  std::string title;
  ScenarioOptions options;
  std::vector<ScenarioStep> steps;
  std::vector<std::uint64_t> related_audit_seqs;
  bool overall_pass = false;  // true iff every step passed

  json to_json() const;
};

std::vector<std::string> scenario_ids();  // short aliases: S1, S2
ScenarioReport run_scenario(const std::string& scenario_id,
                            const ScenarioOptions& opts);

}  // namespace squatguard

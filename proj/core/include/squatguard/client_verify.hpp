#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "squatguard/canonical.hpp"
#include "squatguard/records.hpp"

namespace squatguard {

struct VerificationIssue {
  std::string rule_id;  // signature_mismatch | payload_mismatch | description_mismatch
  std::string message;
};

struct VerificationResult {
  bool ok = true;
  std::vector<VerificationIssue> issues;
};

// Registry-side checks: the Ed25519 signature must verify against the
// registry's public key, and the served record must re-serialize to exactly
// the signed canonical payload.
VerificationResult verify_signed_record(
    const std::array<std::uint8_t, 32>& public_key, const json& record,
    const SignedRecord& signed_record);

// Live cross-check: what the endpoint claims to be via /describe must match
// the registry record on tool_id, name, description, and version. A mismatch
// is the squatting signal the client refuses on.
VerificationResult verify_live_description(const json& registry_record,
                                           const json& describe_response);

// End-to-end client flow against a registry and a tool endpoint:
//   fetch public key -> fetch signed record -> verify signature ->
//   GET /describe -> cross-check -> report detections -> request access ->
//   deliver the credential to POST /invoke.
// verify=false skips both verification steps (the ablation arm).
struct InvokeOutcome {
  bool invoked = false;       // the tool accepted the call
  bool refused_by_client = false;
  bool denied_by_policy = false;
  std::string decision_outcome;  // PERMIT / DENY / REQUIRES_APPROVAL / ""
  std::string decision_reason;
  std::vector<VerificationIssue> issues;
  int tool_status = 0;  // HTTP status from the tool endpoint, 0 if never called
  json tool_response;
};

InvokeOutcome verified_invoke(const std::string& registry_url,
                              const std::string& agent_credential,
                              const std::string& tool_id,
                              const std::string& scope, const json& payload,
                              bool verify = true);

}  // namespace squatguard

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "squatguard/credential_service.hpp"
#include "squatguard/policy.hpp"
#include "squatguard/records.hpp"
#include "squatguard/trust_score.hpp"
#include "squatguard/vuln_feed.hpp"

namespace squatguard {

struct CallerIdentity {
  enum class Role { admin, agent };
  Role role = Role::agent;
  std::string id;
};

struct DiscoveryFilters {
  std::vector<std::string> tags;  // every requested tag must be present
  std::optional<int> min_trust;
};

// A discoverable tool: the public record plus a detached signature over its
// canonical form, so clients can verify what the registry vouched for.
struct DiscoveryEntry {
  ToolRecord tool;
  SignedRecord signed_record;

  json to_json() const;
};

struct AccessResponse {
  AccessDecision decision;
  std::optional<EphemeralCredential> credential;

  json to_json() const;
};

struct FeedLoadResult {
  VulnFeed feed;
  std::vector<TrustScoreReport> reports;
};

}  // namespace squatguard

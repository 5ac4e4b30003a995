#pragma once

#include <string>
#include <vector>

#include "squatguard/records.hpp"
#include "squatguard/vuln_feed.hpp"

namespace squatguard {

struct TrustWeights {
  double cvss_weight = 2.0;
  double vuln_penalty_cap = 60.0;
  double exploit_penalty_unit = 15.0;
  double exploit_penalty_cap = 30.0;
  double staleness_penalty_unit = 5.0;
  double staleness_penalty_cap = 20.0;
};

struct TrustScoreReport {
  std::string tool_id;
  int score = 100;
  double vuln_penalty = 0.0;
  double exploit_penalty = 0.0;
  double staleness_penalty = 0.0;
  std::vector<std::string> matched_vuln_ids;      // feed order
  std::vector<std::string> outdated_components;   // dependency order
  TimePoint computed_at{};

  json to_json() const;
};

// A feed entry matches when (component, one of affected_versions) equals a
// dependency (component, version) pair; versions compare as parsed semver.
std::vector<const VulnEntry*> match_vulnerabilities(const ToolRecord& tool,
                                                    const VulnFeed& feed);

// score = clamp(0, 100, round_half_up(100 - vuln - exploit - staleness))
//   vuln      = min(cap, sum(weight * cvss)) over matched entries
//   exploit   = min(cap, unit * count(matched with exploit_known))
//   staleness = min(cap, unit * count(deps listed in feed.components whose
//               version differs from the latest))
TrustScoreReport compute_trust_score(const ToolRecord& tool,
                                     const VulnFeed& feed, TimePoint now,
                                     const TrustWeights& w = {});

}  // namespace squatguard

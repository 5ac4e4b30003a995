#include "squatguard/trust_score.hpp"

#include <algorithm>
#include <cmath>

#include "squatguard/semver.hpp"

namespace squatguard {

std::vector<const VulnEntry*> match_vulnerabilities(const ToolRecord& tool,
                                                    const VulnFeed& feed) {
  std::vector<const VulnEntry*> out;
  for (const auto& e : feed.entries) {
    bool hit = false;
    for (const auto& d : tool.dependencies) {
      if (d.component != e.component) continue;
      auto dv = SemVer::parse(d.version);
      for (const auto& av : e.affected_versions) {
        if (dv && SemVer::parse(av) == dv) {
          hit = true;
          break;
        }
      }
      if (hit) break;
    }
    if (hit) out.push_back(&e);
  }
  return out;
}

TrustScoreReport compute_trust_score(const ToolRecord& tool,
                                     const VulnFeed& feed, TimePoint now,
                                     const TrustWeights& w) {
  TrustScoreReport r;
  r.tool_id = tool.tool_id;
  r.computed_at = now;

  double vuln_sum = 0.0;
  int exploited = 0;
  for (const VulnEntry* e : match_vulnerabilities(tool, feed)) {
    r.matched_vuln_ids.push_back(e->id);
    vuln_sum += w.cvss_weight * e->cvss;
    if (e->exploit_known) ++exploited;
  }
  r.vuln_penalty = std::min(w.vuln_penalty_cap, vuln_sum);
  r.exploit_penalty =
      std::min(w.exploit_penalty_cap, w.exploit_penalty_unit * exploited);

  for (const auto& d : tool.dependencies) {
    auto it = feed.components.find(d.component);
    if (it == feed.components.end()) continue;
    auto dep = SemVer::parse(d.version);
    auto latest = SemVer::parse(it->second);
    if (dep && latest && *dep < *latest)
      r.outdated_components.push_back(d.component);
  }
  r.staleness_penalty =
      std::min(w.staleness_penalty_cap,
               w.staleness_penalty_unit *
                   static_cast<double>(r.outdated_components.size()));

  double raw = 100.0 - r.vuln_penalty - r.exploit_penalty - r.staleness_penalty;
  int rounded = static_cast<int>(std::floor(raw + 0.5));
  r.score = std::clamp(rounded, 0, 100);
  return r;
}

json TrustScoreReport::to_json() const {
  return json{{"tool_id", tool_id},
              {"score", score},
              {"vuln_penalty", vuln_penalty},
              {"exploit_penalty", exploit_penalty},
              {"staleness_penalty", staleness_penalty},
              {"matched_vuln_ids", matched_vuln_ids},
              {"outdated_components", outdated_components},
              {"computed_at", format_rfc3339(computed_at)}};
}

}  // namespace squatguard

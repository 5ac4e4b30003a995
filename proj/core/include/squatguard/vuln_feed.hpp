#pragma once

#include <map>
#include <string>
#include <vector>

#include "squatguard/canonical.hpp"
#include "squatguard/time_utils.hpp"

namespace squatguard {

struct VulnEntry {
  std::string id;
  std::string component;
  std::vector<std::string> affected_versions;  // exact semver strings
  double cvss = 0.0;                           // [0.0, 10.0]
  bool exploit_known = false;
};

struct VulnFeed {
  TimePoint feed_timestamp{};
  // component -> latest known good version; only listed components can count
  // as outdated.
  std::map<std::string, std::string> components;
  std::vector<VulnEntry> entries;
};

// Parses and validates feed bytes. Throws ApiError: parse_error on malformed
// JSON, duplicate_entry_id on repeated entry ids, validation_error otherwise.
VulnFeed parse_vuln_feed(std::string_view bytes);
json feed_to_json(const VulnFeed& f);

}  // namespace squatguard

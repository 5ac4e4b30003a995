#include "squatguard/vuln_feed.hpp"

#include <set>

#include "squatguard/errors.hpp"
#include "squatguard/semver.hpp"

namespace squatguard {

VulnFeed parse_vuln_feed(std::string_view bytes) {
  json j = json::parse(bytes, nullptr, false);
  if (j.is_discarded())
    throw ApiError(Errc::parse_error, "feed is not valid JSON");
  if (!j.is_object())
    throw ApiError(Errc::validation_error, "feed must be a JSON object");

  VulnFeed f;
  if (!j.contains("feed_timestamp") || !j.at("feed_timestamp").is_string())
    throw ApiError(Errc::validation_error, "feed_timestamp must be a string");
  auto ts = parse_rfc3339(j.at("feed_timestamp").get<std::string>());
  if (!ts)
    throw ApiError(Errc::validation_error,
                   "feed_timestamp must be RFC 3339 UTC");
  f.feed_timestamp = *ts;

  if (j.contains("components")) {
    if (!j.at("components").is_object())
      throw ApiError(Errc::validation_error, "components must be an object");
    for (const auto& [comp, ver] : j.at("components").items()) {
      if (comp.empty())
        throw ApiError(Errc::validation_error,
                       "component names must be non-empty");
      if (!ver.is_string() || !is_semver(ver.get<std::string>()))
        throw ApiError(Errc::validation_error,
                       "component latest version must be semver: " + comp);
      f.components[comp] = ver.get<std::string>();
    }
  }

  if (!j.contains("entries") || !j.at("entries").is_array())
    throw ApiError(Errc::validation_error, "entries must be an array");
  std::set<std::string> seen;
  for (const auto& e : j.at("entries")) {
    if (!e.is_object())
      throw ApiError(Errc::validation_error, "entries must be objects");
    VulnEntry v;
    if (!e.contains("id") || !e.at("id").is_string() ||
        e.at("id").get<std::string>().empty())
      throw ApiError(Errc::validation_error, "entry id must be non-empty");
    v.id = e.at("id").get<std::string>();
    if (!seen.insert(v.id).second)
      throw ApiError(Errc::duplicate_entry_id, "duplicate entry id: " + v.id);
    if (!e.contains("component") || !e.at("component").is_string() ||
        e.at("component").get<std::string>().empty())
      throw ApiError(Errc::validation_error,
                     "entry component must be non-empty: " + v.id);
    v.component = e.at("component").get<std::string>();
    if (!e.contains("affected_versions") ||
        !e.at("affected_versions").is_array())
      throw ApiError(Errc::validation_error,
                     "affected_versions must be an array: " + v.id);
    for (const auto& av : e.at("affected_versions")) {
      if (!av.is_string() || !is_semver(av.get<std::string>()))
        throw ApiError(Errc::validation_error,
                       "affected_versions must be semver strings: " + v.id);
      v.affected_versions.push_back(av.get<std::string>());
    }
    if (!e.contains("cvss") || !e.at("cvss").is_number())
      throw ApiError(Errc::validation_error, "cvss must be a number: " + v.id);
    v.cvss = e.at("cvss").get<double>();
    if (v.cvss < 0.0 || v.cvss > 10.0)
      throw ApiError(Errc::validation_error,
                     "cvss must be within [0.0, 10.0]: " + v.id);
    if (!e.contains("exploit_known") || !e.at("exploit_known").is_boolean())
      throw ApiError(Errc::validation_error,
                     "exploit_known must be a boolean: " + v.id);
    v.exploit_known = e.at("exploit_known").get<bool>();
    f.entries.push_back(std::move(v));
  }
  return f;
}

json feed_to_json(const VulnFeed& f) {
  json entries = json::array();
  for (const auto& e : f.entries) {
    entries.push_back(json{{"id", e.id},
                           {"component", e.component},
                           {"affected_versions", e.affected_versions},
                           {"cvss", e.cvss},
                           {"exploit_known", e.exploit_known}});
  }
  json comps = json::object();
  for (const auto& [c, v] : f.components) comps[c] = v;
  return json{{"feed_timestamp", format_rfc3339(f.feed_timestamp)},
              {"components", comps},
              {"entries", entries}};
}

}  // namespace squatguard

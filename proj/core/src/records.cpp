#include "squatguard/records.hpp"

#include <algorithm>
#include <set>

#include "squatguard/errors.hpp"
#include "squatguard/semver.hpp"

namespace squatguard {

std::string_view to_string(ToolStatus s) {
  switch (s) {
    case ToolStatus::PENDING: return "PENDING";
    case ToolStatus::ACTIVE: return "ACTIVE";
    case ToolStatus::DEACTIVATED: return "DEACTIVATED";
  }
  return "PENDING";
}

std::string_view to_string(AgentStatus s) {
  return s == AgentStatus::ACTIVE ? "ACTIVE" : "DEACTIVATED";
}

std::string_view to_string(AuthMethod m) {
  switch (m) {
    case AuthMethod::api_key: return "api_key";
    case AuthMethod::oauth: return "oauth";
    case AuthMethod::jwt: return "jwt";
  }
  return "api_key";
}

std::string_view to_string(AuthMechanism m) {
  switch (m) {
    case AuthMechanism::header: return "header";
    case AuthMechanism::query: return "query";
    case AuthMechanism::bearer: return "bearer";
  }
  return "header";
}

std::optional<ToolStatus> parse_tool_status(std::string_view s) {
  if (s == "PENDING") return ToolStatus::PENDING;
  if (s == "ACTIVE") return ToolStatus::ACTIVE;
  if (s == "DEACTIVATED") return ToolStatus::DEACTIVATED;
  return std::nullopt;
}

std::optional<AgentStatus> parse_agent_status(std::string_view s) {
  if (s == "ACTIVE") return AgentStatus::ACTIVE;
  if (s == "DEACTIVATED") return AgentStatus::DEACTIVATED;
  return std::nullopt;
}

std::optional<AuthMethod> parse_auth_method(std::string_view s) {
  if (s == "api_key") return AuthMethod::api_key;
  if (s == "oauth") return AuthMethod::oauth;
  if (s == "jwt") return AuthMethod::jwt;
  return std::nullopt;
}

std::optional<AuthMechanism> parse_auth_mechanism(std::string_view s) {
  if (s == "header") return AuthMechanism::header;
  if (s == "query") return AuthMechanism::query;
  if (s == "bearer") return AuthMechanism::bearer;
  return std::nullopt;
}

bool is_valid_tool_id(std::string_view s) {
  if (s.empty() || s.size() > 64) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
  });
}

bool is_valid_url(std::string_view s) {
  std::string_view rest;
  if (s.starts_with("https://"))
    rest = s.substr(8);
  else if (s.starts_with("http://"))
    rest = s.substr(7);
  else
    return false;
  if (rest.empty() || rest[0] == '/') return false;
  return s.find(' ') == std::string_view::npos;
}

int placeholder_site_count(std::string_view s) {
  int count = 0;
  std::size_t pos = 0;
  while ((pos = s.find("${", pos)) != std::string_view::npos) {
    auto close = s.find('}', pos + 2);
    if (close == std::string_view::npos) return -1;  // unterminated site
    if (close == pos + 2) return -1;                 // empty name
    ++count;
    pos = close + 1;
  }
  return count;
}

namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw ApiError(Errc::validation_error, msg);
}

const json& require_field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) fail(std::string("missing field: ") + key);
  return *it;
}

std::string require_string(const json& j, const char* key) {
  const json& v = require_field(j, key);
  if (!v.is_string()) fail(std::string("field must be a string: ") + key);
  return v.get<std::string>();
}

std::string optional_string(const json& j, const char* key,
                            const std::string& def = "") {
  auto it = j.find(key);
  if (it == j.end()) return def;
  if (!it->is_string()) fail(std::string("field must be a string: ") + key);
  return it->get<std::string>();
}

std::vector<std::string> string_array(const json& v, const char* key) {
  if (!v.is_array()) fail(std::string("field must be an array: ") + key);
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string() || e.get<std::string>().empty())
      fail(std::string("entries must be non-empty strings: ") + key);
    out.push_back(e.get<std::string>());
  }
  return out;
}

void reject_keys(const json& j, std::initializer_list<const char*> allowed,
                 std::initializer_list<const char*> server_managed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    bool known = std::any_of(allowed.begin(), allowed.end(),
                             [&](const char* a) { return k == a; });
    if (known) continue;
    bool managed = std::any_of(server_managed.begin(), server_managed.end(),
                               [&](const char* a) { return k == a; });
    if (managed) fail("field is server managed: " + k);
    fail("unknown field: " + k);
  }
}

AuthConfig auth_config_from_json(const json& v) {
  if (!v.is_object()) fail("auth_config must be an object");
  AuthConfig c;
  auto mech = parse_auth_mechanism(require_string(v, "mechanism"));
  if (!mech) fail("auth_config.mechanism must be header, query, or bearer");
  c.mechanism = *mech;
  if (v.contains("header_name")) c.header_name = require_string(v, "header_name");
  c.credential_placeholder = require_string(v, "credential_placeholder");
  return c;
}

json auth_config_to_json(const AuthConfig& c) {
  json v = json::object();
  v["mechanism"] = std::string(to_string(c.mechanism));
  if (c.header_name) v["header_name"] = *c.header_name;
  v["credential_placeholder"] = c.credential_placeholder;
  return v;
}

std::vector<Dependency> dependencies_from_json(const json& v) {
  if (!v.is_array()) fail("dependencies must be an array");
  std::vector<Dependency> out;
  for (const auto& e : v) {
    if (!e.is_object()) fail("dependency entries must be objects");
    Dependency d{require_string(e, "component"), require_string(e, "version")};
    out.push_back(std::move(d));
  }
  return out;
}

json dependencies_to_json(const std::vector<Dependency>& deps) {
  json v = json::array();
  for (const auto& d : deps)
    v.push_back(json{{"component", d.component}, {"version", d.version}});
  return v;
}

constexpr std::initializer_list<const char*> kToolRegistrationKeys = {
    "tool_id",     "name",  "description",  "api_endpoint", "auth_method",
    "auth_config", "parameters", "version", "dependencies", "owner", "tags"};
constexpr std::initializer_list<const char*> kToolServerManagedKeys = {
    "trust_score", "last_trust_score_update", "status",     "registered_by",
    "approved_by", "created_at",              "updated_at"};

}  // namespace

ToolRecord tool_from_registration_json(const json& j) {
  if (!j.is_object()) fail("tool registration body must be an object");
  reject_keys(j, kToolRegistrationKeys, kToolServerManagedKeys);
  ToolRecord r;
  r.tool_id = require_string(j, "tool_id");
  r.name = require_string(j, "name");
  r.description = require_string(j, "description");
  r.api_endpoint = require_string(j, "api_endpoint");
  auto method = parse_auth_method(require_string(j, "auth_method"));
  if (!method) fail("auth_method must be api_key, oauth, or jwt");
  r.auth_method = *method;
  r.auth_config = auth_config_from_json(require_field(j, "auth_config"));
  if (j.contains("parameters")) {
    if (!j.at("parameters").is_object()) fail("parameters must be an object");
    r.parameters = j.at("parameters");
  }
  r.version = require_string(j, "version");
  if (j.contains("dependencies"))
    r.dependencies = dependencies_from_json(j.at("dependencies"));
  r.owner = optional_string(j, "owner");
  if (j.contains("tags")) r.tags = string_array(j.at("tags"), "tags");
  validate_tool_record(r);
  return r;
}

void validate_tool_record(const ToolRecord& r) {
  if (!is_valid_tool_id(r.tool_id))
    fail("tool_id must match [a-z0-9_]{1,64}");
  if (r.name.empty()) fail("name must be non-empty");
  if (!is_valid_url(r.api_endpoint))
    fail("api_endpoint must be an http(s) URL");
  if (r.auth_config.mechanism == AuthMechanism::header &&
      (!r.auth_config.header_name || r.auth_config.header_name->empty()))
    fail("auth_config.header_name is required for the header mechanism");
  if (placeholder_site_count(r.auth_config.credential_placeholder) != 1)
    fail("auth_config.credential_placeholder must contain exactly one ${...} site");
  if (!is_semver(r.version)) fail("version must be MAJOR.MINOR.PATCH");
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& d : r.dependencies) {
    if (d.component.empty()) fail("dependency component must be non-empty");
    if (!is_semver(d.version))
      fail("dependency version must be MAJOR.MINOR.PATCH: " + d.component);
    if (!seen.insert({d.component, d.version}).second)
      fail("duplicate dependency: " + d.component + "@" + d.version);
  }
  for (const auto& t : r.tags)
    if (t.empty()) fail("tags must be non-empty strings");
}

json tool_public_json(const ToolRecord& r) {
  json j = json::object();
  j["tool_id"] = r.tool_id;
  j["name"] = r.name;
  j["description"] = r.description;
  j["api_endpoint"] = r.api_endpoint;
  j["auth_method"] = std::string(to_string(r.auth_method));
  j["auth_config"] = auth_config_to_json(r.auth_config);
  j["parameters"] = r.parameters;
  j["version"] = r.version;
  j["dependencies"] = dependencies_to_json(r.dependencies);
  j["trust_score"] = r.trust_score;
  j["last_trust_score_update"] = format_rfc3339(r.last_trust_score_update);
  j["owner"] = r.owner;
  j["tags"] = r.tags;
  j["status"] = std::string(to_string(r.status));
  return j;
}

json tool_admin_json(const ToolRecord& r) {
  json j = tool_public_json(r);
  j["registered_by"] = r.registered_by;
  j["approved_by"] = r.approved_by ? json(*r.approved_by) : json(nullptr);
  j["created_at"] = format_rfc3339(r.created_at);
  j["updated_at"] = format_rfc3339(r.updated_at);
  return j;
}

json tool_internal_json(const ToolRecord& r) { return tool_admin_json(r); }

ToolRecord tool_from_internal_json(const json& j) {
  ToolRecord r;
  r.tool_id = j.at("tool_id").get<std::string>();
  r.name = j.at("name").get<std::string>();
  r.description = j.at("description").get<std::string>();
  r.api_endpoint = j.at("api_endpoint").get<std::string>();
  r.auth_method = *parse_auth_method(j.at("auth_method").get<std::string>());
  r.auth_config = auth_config_from_json(j.at("auth_config"));
  r.parameters = j.at("parameters");
  r.version = j.at("version").get<std::string>();
  r.dependencies = dependencies_from_json(j.at("dependencies"));
  r.trust_score = j.at("trust_score").get<int>();
  r.last_trust_score_update =
      *parse_rfc3339(j.at("last_trust_score_update").get<std::string>());
  r.owner = j.at("owner").get<std::string>();
  r.tags = j.at("tags").get<std::vector<std::string>>();
  r.status = *parse_tool_status(j.at("status").get<std::string>());
  r.registered_by = j.at("registered_by").get<std::string>();
  if (!j.at("approved_by").is_null())
    r.approved_by = j.at("approved_by").get<std::string>();
  r.created_at = *parse_rfc3339(j.at("created_at").get<std::string>());
  r.updated_at = *parse_rfc3339(j.at("updated_at").get<std::string>());
  return r;
}

AgentRecord agent_from_registration_json(const json& j) {
  if (!j.is_object()) fail("agent registration body must be an object");
  reject_keys(j, {"name", "description", "roles", "allowed_tools"},
              {"agent_id", "creator", "request_count", "status", "created_at",
               "updated_at", "auth_token_hash"});
  AgentRecord r;
  r.name = require_string(j, "name");
  r.description = optional_string(j, "description");
  if (j.contains("roles")) r.roles = string_array(j.at("roles"), "roles");
  if (j.contains("allowed_tools"))
    r.allowed_tools = string_array(j.at("allowed_tools"), "allowed_tools");
  validate_agent_fields(r);
  return r;
}

void validate_agent_fields(const AgentRecord& r) {
  if (r.name.empty()) fail("name must be non-empty");
  if (r.roles.empty()) fail("roles must be non-empty");
  for (const auto& t : r.allowed_tools)
    if (!is_valid_tool_id(t))
      fail("allowed_tools entries must match [a-z0-9_]{1,64}: " + t);
}

json agent_public_json(const AgentRecord& r) {
  json j = json::object();
  j["agent_id"] = r.agent_id;
  j["name"] = r.name;
  j["description"] = r.description;
  j["creator"] = r.creator;
  j["roles"] = r.roles;
  j["allowed_tools"] = r.allowed_tools;
  j["request_count"] = r.request_count;
  j["status"] = std::string(to_string(r.status));
  j["created_at"] = format_rfc3339(r.created_at);
  j["updated_at"] = format_rfc3339(r.updated_at);
  return j;
}

json agent_internal_json(const AgentRecord& r) {
  json j = agent_public_json(r);
  j["auth_token_hash"] = r.auth_token_hash;
  return j;
}

AgentRecord agent_from_internal_json(const json& j) {
  AgentRecord r;
  r.agent_id = j.at("agent_id").get<std::string>();
  r.name = j.at("name").get<std::string>();
  r.description = j.at("description").get<std::string>();
  r.creator = j.at("creator").get<std::string>();
  r.roles = j.at("roles").get<std::vector<std::string>>();
  r.allowed_tools = j.at("allowed_tools").get<std::vector<std::string>>();
  r.request_count = j.at("request_count").get<std::uint64_t>();
  r.status = *parse_agent_status(j.at("status").get<std::string>());
  r.created_at = *parse_rfc3339(j.at("created_at").get<std::string>());
  r.updated_at = *parse_rfc3339(j.at("updated_at").get<std::string>());
  r.auth_token_hash = j.at("auth_token_hash").get<std::string>();
  return r;
}

json signed_record_json(const SignedRecord& s) {
  return json{{"payload", s.canonical_payload},
              {"signature", s.signature},
              {"key_id", s.key_id}};
}

SignedRecord signed_record_from_json(const json& j) {
  SignedRecord s;
  s.canonical_payload = j.at("payload").get<std::string>();
  s.signature = j.at("signature").get<std::string>();
  s.key_id = j.at("key_id").get<std::string>();
  return s;
}

}  // namespace squatguard

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "squatguard/canonical.hpp"
#include "squatguard/time_utils.hpp"

namespace squatguard {

enum class ToolStatus { PENDING, ACTIVE, DEACTIVATED };
enum class AgentStatus { ACTIVE, DEACTIVATED };
enum class AuthMethod { api_key, oauth, jwt };
enum class AuthMechanism { header, query, bearer };

std::string_view to_string(ToolStatus s);
std::string_view to_string(AgentStatus s);
std::string_view to_string(AuthMethod m);
std::string_view to_string(AuthMechanism m);
std::optional<ToolStatus> parse_tool_status(std::string_view s);
std::optional<AgentStatus> parse_agent_status(std::string_view s);
std::optional<AuthMethod> parse_auth_method(std::string_view s);
std::optional<AuthMechanism> parse_auth_mechanism(std::string_view s);

// How a short-lived credential is delivered to the tool endpoint. The
// placeholder must contain exactly one ${...} substitution site; issuance
// renders the real token into it.
struct AuthConfig {
  AuthMechanism mechanism = AuthMechanism::header;
  std::optional<std::string> header_name;  // required when mechanism=header
  std::string credential_placeholder;
};

struct Dependency {
  std::string component;
  std::string version;
  bool operator==(const Dependency&) const = default;
};

struct ToolRecord {
  std::string tool_id;
  std::string name;
  std::string description;
  std::string api_endpoint;
  AuthMethod auth_method = AuthMethod::api_key;
  AuthConfig auth_config;
  json parameters = json::object();  // opaque input/output schema blob
  std::string version;
  std::vector<Dependency> dependencies;
  int trust_score = 100;
  TimePoint last_trust_score_update{};
  std::string owner;
  std::vector<std::string> tags;
  ToolStatus status = ToolStatus::PENDING;
  std::string registered_by;
  std::optional<std::string> approved_by;
  TimePoint created_at{};
  TimePoint updated_at{};
};

struct AgentRecord {
  std::string agent_id;  // UUID v4, server-assigned
  std::string name;
  std::string description;
  std::string creator;
  std::vector<std::string> roles;
  std::vector<std::string> allowed_tools;  // tool_id slugs
  std::uint64_t request_count = 0;
  AgentStatus status = AgentStatus::ACTIVE;
  TimePoint created_at{};
  TimePoint updated_at{};
  std::string auth_token_hash;  // SHA-256 hex of the registration credential
};

// Detached signature over the canonical public view of a record.
struct SignedRecord {
  std::string canonical_payload;
  std::string signature;  // base64
  std::string key_id;     // first 8 hex of SHA-256(public key)
};

bool is_valid_tool_id(std::string_view s);  // [a-z0-9_]{1,64}
bool is_valid_url(std::string_view s);      // http(s)://host[...]
// Counts ${...} substitution sites; valid placeholders have exactly one.
int placeholder_site_count(std::string_view s);

// Builds a record from a client registration body. Unknown keys and
// server-managed fields are rejected; throws ApiError(validation_error).
ToolRecord tool_from_registration_json(const json& j);
// Re-validates a full record (used after update merges).
void validate_tool_record(const ToolRecord& r);

// Public (discovery) view: exactly the externally fixed schema, nothing else.
json tool_public_json(const ToolRecord& r);
// Admin view: public view plus lifecycle fields.
json tool_admin_json(const ToolRecord& r);
// Full storage round trip.
json tool_internal_json(const ToolRecord& r);
ToolRecord tool_from_internal_json(const json& j);

AgentRecord agent_from_registration_json(const json& j);
void validate_agent_fields(const AgentRecord& r);
json agent_public_json(const AgentRecord& r);  // no credential hash
json agent_internal_json(const AgentRecord& r);
AgentRecord agent_from_internal_json(const json& j);

json signed_record_json(const SignedRecord& s);
SignedRecord signed_record_from_json(const json& j);

}  // namespace squatguard

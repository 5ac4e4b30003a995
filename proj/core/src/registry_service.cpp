#include "squatguard/registry_service.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "squatguard/crypto.hpp"

namespace squatguard {

namespace {
constexpr const char* kTools = "tools";
constexpr const char* kAgents = "agents";
constexpr const char* kPolicies = "policies";
constexpr const char* kSystem = "system";

Severity severity_for(PolicyLogLevel l) {
  switch (l) {
    case PolicyLogLevel::DEBUG: return Severity::DEBUG;
    case PolicyLogLevel::INFO: return Severity::INFO;
    case PolicyLogLevel::WARN: return Severity::WARN;
  }
  return Severity::INFO;
}

std::string join_csv(const std::vector<std::string>& items) {
  std::ostringstream out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out << ",";
    out << items[i];
  }
  return out.str();
}
}  // namespace

json DiscoveryEntry::to_json() const {
  return json{{"record", tool_public_json(tool)},
              {"signed", signed_record_json(signed_record)}};
}

json AccessResponse::to_json() const {
  return json{{"decision", decision.to_json()},
              {"credential",
               credential ? credential->public_json() : json(nullptr)}};
}

RegistryService::RegistryService(ServiceConfig cfg, ServiceKeys keys,
                                 std::unique_ptr<StorageBackend> backend,
                                 Clock clock,
                                 std::optional<std::uint64_t> id_seed)
    : cfg_(std::move(cfg)),
      keys_(std::move(keys)),
      backend_(backend ? std::move(backend)
                       : std::make_unique<MemoryBackend>()),
      clock_(std::move(clock)),
      ids_(id_seed ? IdGenerator(*id_seed) : IdGenerator()),
      credentials_(std::make_unique<CredentialService>(
          keys_.hmac_key, ids_, cfg_.default_ttl_s, cfg_.max_ttl_s,
          backend_.get())),
      audit_(std::make_unique<AuditLog>(*backend_, cfg_.anomaly)),
      engine_(limiter_) {
  if (auto f = backend_->get(kSystem, "feed"))
    feed_ = parse_vuln_feed(canonical_dump(*f));
  // Providers read through their own locks; never back into mu_.
  audit_->set_providers(
      [this](const std::string& tool_id) {
        return strictest_policy_minimum(tool_id);
      },
      [this](const std::string& tool_id, TimePoint at) {
        return credentials_->has_live_credentials(tool_id, at);
      });
}

AuditEvent RegistryService::audit_record(PendingEvent e) {
  return audit_->record(std::move(e), clock_.now());
}

std::optional<CallerIdentity> RegistryService::authenticate(
    const std::string& bearer) const {
  if (bearer.empty()) return std::nullopt;
  for (const auto& a : cfg_.admins)
    if (constant_time_equal(bearer, a.api_key))
      return CallerIdentity{CallerIdentity::Role::admin, a.admin_id};
  std::string h = sha256_hex(bearer);
  for (const auto& [id, v] : backend_->scan(kAgents)) {
    if (v.at("auth_token_hash").get<std::string>() == h &&
        v.at("status").get<std::string>() == "ACTIVE")
      return CallerIdentity{CallerIdentity::Role::agent, id};
  }
  return std::nullopt;
}

ToolRecord RegistryService::load_tool_locked(const std::string& tool_id) const {
  auto v = backend_->get(kTools, tool_id);
  if (!v) throw ApiError(Errc::not_found, "unknown tool: " + tool_id);
  return tool_from_internal_json(*v);
}

AgentRecord RegistryService::load_agent_locked(
    const std::string& agent_id) const {
  auto v = backend_->get(kAgents, agent_id);
  if (!v) throw ApiError(Errc::not_found, "unknown agent: " + agent_id);
  return agent_from_internal_json(*v);
}

void RegistryService::store_tool_locked(const ToolRecord& r) {
  backend_->put(kTools, r.tool_id, tool_internal_json(r));
}

void RegistryService::store_agent_locked(const AgentRecord& r) {
  backend_->put(kAgents, r.agent_id, agent_internal_json(r));
}

std::vector<AccessPolicy> RegistryService::load_policies_locked() const {
  std::vector<AccessPolicy> out;
  for (const auto& [id, v] : backend_->scan(kPolicies))
    out.push_back(policy_from_internal_json(v));
  return out;
}

std::optional<int> RegistryService::strictest_policy_minimum(
    const std::string& tool_id) const {
  std::optional<int> strictest;
  for (const auto& [id, v] : backend_->scan(kPolicies)) {
    AccessPolicy p = policy_from_internal_json(v);
    if (!p.is_active || p.tool_id != tool_id) continue;
    if (!p.conditions.minimum_tool_trust_score) continue;
    if (!strictest || *p.conditions.minimum_tool_trust_score > *strictest)
      strictest = *p.conditions.minimum_tool_trust_score;
  }
  return strictest;
}

ToolRecord RegistryService::register_tool(const std::string& admin_id,
                                          const json& spec) {
  std::lock_guard lk(mu_);
  ToolRecord r = tool_from_registration_json(spec);
  if (backend_->get(kTools, r.tool_id))
    throw ApiError(Errc::duplicate_tool_id,
                   "tool_id already registered: " + r.tool_id);
  TimePoint at = clock_.now();
  r.registered_by = admin_id;
  r.status = cfg_.dual_approval ? ToolStatus::PENDING : ToolStatus::ACTIVE;
  r.created_at = r.updated_at = at;
  VulnFeed feed = feed_.value_or(VulnFeed{});
  auto report = compute_trust_score(r, feed, at, cfg_.trust_weights);
  r.trust_score = report.score;
  r.last_trust_score_update = at;
  store_tool_locked(r);

  PendingEvent e;
  e.type = AuditEventType::TOOL_REGISTERED;
  e.actor = {ActorKind::admin, admin_id};
  e.subject.tool_id = r.tool_id;
  e.detail["name"] = r.name;
  e.detail["status"] = std::string(to_string(r.status));
  e.detail["trust_score"] = std::to_string(r.trust_score);
  audit_record(std::move(e));
  return r;
}

ToolRecord RegistryService::approve_tool(const std::string& admin_id,
                                         const std::string& tool_id) {
  std::lock_guard lk(mu_);
  ToolRecord r = load_tool_locked(tool_id);
  if (r.status != ToolStatus::PENDING)
    throw ApiError(Errc::not_pending, "tool is not pending approval: " + tool_id);
  if (admin_id == r.registered_by)
    throw ApiError(Errc::self_approval_forbidden,
                   "approval requires a second admin");
  r.status = ToolStatus::ACTIVE;
  r.approved_by = admin_id;
  r.updated_at = clock_.now();
  store_tool_locked(r);

  PendingEvent e;
  e.type = AuditEventType::TOOL_APPROVED;
  e.actor = {ActorKind::admin, admin_id};
  e.subject.tool_id = tool_id;
  e.detail["registered_by"] = r.registered_by;
  e.detail["approved_by"] = admin_id;
  audit_record(std::move(e));
  return r;
}

ToolRecord RegistryService::update_tool(const std::string& admin_id,
                                        const std::string& tool_id,
                                        const json& patch) {
  std::lock_guard lk(mu_);
  if (!patch.is_object())
    throw ApiError(Errc::validation_error, "patch must be an object");
  ToolRecord old = load_tool_locked(tool_id);
  ToolRecord merged = old;

  static const std::set<std::string> kMutable = {
      "name",       "description", "api_endpoint", "auth_method", "auth_config",
      "parameters", "version",     "dependencies", "owner",       "tags"};
  static const std::set<std::string> kManaged = {
      "trust_score", "last_trust_score_update", "status",     "registered_by",
      "approved_by", "created_at",              "updated_at"};
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string& k = it.key();
    if (k == "tool_id")
      throw ApiError(Errc::immutable_field, "tool_id is immutable");
    if (kManaged.count(k))
      throw ApiError(Errc::validation_error, "field is server managed: " + k);
    if (!kMutable.count(k))
      throw ApiError(Errc::validation_error, "unknown field: " + k);
  }

  // Re-parse via the registration path so every rule applies to the merge.
  json body = tool_public_json(old);
  body.erase("trust_score");
  body.erase("last_trust_score_update");
  body.erase("status");
  for (auto it = patch.begin(); it != patch.end(); ++it)
    body[it.key()] = it.value();
  ToolRecord parsed = tool_from_registration_json(body);
  merged.name = parsed.name;
  merged.description = parsed.description;
  merged.api_endpoint = parsed.api_endpoint;
  merged.auth_method = parsed.auth_method;
  merged.auth_config = parsed.auth_config;
  merged.parameters = parsed.parameters;
  merged.version = parsed.version;
  merged.dependencies = parsed.dependencies;
  merged.owner = parsed.owner;
  merged.tags = parsed.tags;

  std::vector<std::string> changed;
  if (merged.name != old.name) changed.push_back("name");
  if (merged.description != old.description) changed.push_back("description");
  if (merged.api_endpoint != old.api_endpoint) changed.push_back("api_endpoint");
  if (merged.auth_method != old.auth_method) changed.push_back("auth_method");
  if (tool_public_json(merged)["auth_config"] !=
      tool_public_json(old)["auth_config"])
    changed.push_back("auth_config");
  if (merged.parameters != old.parameters) changed.push_back("parameters");
  if (merged.version != old.version) changed.push_back("version");
  if (merged.dependencies != old.dependencies) changed.push_back("dependencies");
  if (merged.owner != old.owner) changed.push_back("owner");
  if (merged.tags != old.tags) changed.push_back("tags");

  TimePoint at = clock_.now();
  merged.updated_at = at;

  bool deps_changed =
      std::find(changed.begin(), changed.end(), "dependencies") != changed.end();
  std::optional<TrustScoreReport> new_trust;
  if (deps_changed) {
    VulnFeed feed = feed_.value_or(VulnFeed{});
    new_trust = compute_trust_score(merged, feed, at, cfg_.trust_weights);
    if (new_trust->score != old.trust_score) {
      merged.trust_score = new_trust->score;
      merged.last_trust_score_update = at;
    }
  }
  store_tool_locked(merged);

  PendingEvent e;
  e.type = AuditEventType::TOOL_UPDATED;
  e.actor = {ActorKind::admin, admin_id};
  e.subject.tool_id = tool_id;
  e.detail["changed_fields"] = join_csv(changed);
  if (merged.version != old.version) {
    e.detail["old_version"] = old.version;
    e.detail["new_version"] = merged.version;
  }
  audit_record(std::move(e));

  if (new_trust && new_trust->score != old.trust_score) {
    PendingEvent t;
    t.type = AuditEventType::TRUST_SCORE_UPDATED;
    t.actor = {ActorKind::system, "trust-engine"};
    t.subject.tool_id = tool_id;
    t.detail["old_score"] = std::to_string(old.trust_score);
    t.detail["new_score"] = std::to_string(new_trust->score);
    t.detail["cause"] = "dependencies_changed";
    audit_record(std::move(t));
  }
  return merged;
}

ToolRecord RegistryService::set_tool_status(const std::string& admin_id,
                                            const std::string& tool_id,
                                            ToolStatus target) {
  std::lock_guard lk(mu_);
  ToolRecord r = load_tool_locked(tool_id);
  ToolStatus old = r.status;
  if (target == ToolStatus::PENDING)
    throw ApiError(Errc::validation_error, "tools cannot return to PENDING");
  if (target == ToolStatus::ACTIVE && old == ToolStatus::PENDING &&
      cfg_.dual_approval &&
      (!r.approved_by || *r.approved_by == r.registered_by))
    throw ApiError(Errc::validation_error,
                   "pending tools activate through approval");
  TimePoint at = clock_.now();
  r.status = target;
  r.updated_at = at;
  store_tool_locked(r);

  PendingEvent e;
  e.type = AuditEventType::TOOL_STATUS_CHANGED;
  e.actor = {ActorKind::admin, admin_id};
  e.subject.tool_id = tool_id;
  e.detail["old_status"] = std::string(to_string(old));
  e.detail["new_status"] = std::string(to_string(target));
  audit_record(std::move(e));

  if (target == ToolStatus::DEACTIVATED) {
    for (const auto& jti : credentials_->revoke_by_audience(tool_id, at)) {
      PendingEvent c;
      c.type = AuditEventType::CREDENTIAL_REVOKED;
      c.actor = {ActorKind::admin, admin_id};
      c.subject.tool_id = tool_id;
      c.subject.credential_id = jti;
      c.severity = Severity::WARN;
      c.detail["reason"] = "tool_deactivated";
      audit_record(std::move(c));
    }
  }
  return r;
}

std::vector<ToolRecord> RegistryService::list_tools() const {
  std::vector<ToolRecord> out;
  for (const auto& [id, v] : backend_->scan(kTools))
    out.push_back(tool_from_internal_json(v));
  return out;
}

ToolRecord RegistryService::get_tool(const std::string& tool_id) const {
  std::lock_guard lk(mu_);
  return load_tool_locked(tool_id);
}

std::vector<DiscoveryEntry> RegistryService::discover_tools(
    const AgentRecord& agent, const DiscoveryFilters& filters) {
  std::vector<AccessPolicy> policies;
  std::vector<ToolRecord> tools;
  {
    std::lock_guard lk(mu_);
    policies = load_policies_locked();
    tools = list_tools();
  }

  std::vector<DiscoveryEntry> out;
  for (const auto& tool : tools) {
    if (tool.status != ToolStatus::ACTIVE) continue;
    if (std::find(agent.allowed_tools.begin(), agent.allowed_tools.end(),
                  tool.tool_id) == agent.allowed_tools.end())
      continue;
    bool covered = std::any_of(
        policies.begin(), policies.end(), [&](const AccessPolicy& p) {
          return p.is_active && p.tool_id == tool.tool_id &&
                 p.matches_principal(agent);
        });
    if (!covered) continue;
    if (filters.min_trust && tool.trust_score < *filters.min_trust) continue;
    bool tags_ok = std::all_of(
        filters.tags.begin(), filters.tags.end(), [&](const std::string& t) {
          return std::find(tool.tags.begin(), tool.tags.end(), t) !=
                 tool.tags.end();
        });
    if (!tags_ok) continue;
    out.push_back(DiscoveryEntry{tool, sign_tool_record(tool)});
  }

  PendingEvent e;
  e.type = AuditEventType::DISCOVERY_QUERY;
  e.actor = {ActorKind::agent, agent.agent_id};
  e.subject.agent_id = agent.agent_id;
  e.detail["result_count"] = std::to_string(out.size());
  if (!filters.tags.empty()) e.detail["tags"] = join_csv(filters.tags);
  if (filters.min_trust)
    e.detail["min_trust"] = std::to_string(*filters.min_trust);
  audit_record(std::move(e));
  return out;
}

DiscoveryEntry RegistryService::get_tool_for_agent(const AgentRecord& agent,
                                                   const std::string& tool_id) {
  (void)agent;
  ToolRecord tool = get_tool(tool_id);
  if (tool.status != ToolStatus::ACTIVE)
    throw ApiError(Errc::not_found, "unknown tool: " + tool_id);
  return DiscoveryEntry{tool, sign_tool_record(tool)};
}

SignedRecord RegistryService::sign_tool_record(const ToolRecord& r) const {
  SignedRecord s;
  s.canonical_payload = canonical_dump(tool_public_json(r));
  s.signature = ed25519_sign_b64(keys_.signing, s.canonical_payload);
  s.key_id = keys_.signing.key_id();
  return s;
}

bool RegistryService::verify_record(
    const std::array<std::uint8_t, 32>& public_key, const SignedRecord& s) {
  return ed25519_verify_b64(public_key, s.canonical_payload, s.signature);
}

std::pair<AgentRecord, std::string> RegistryService::register_agent(
    const std::string& admin_id, const json& spec) {
  std::lock_guard lk(mu_);
  AgentRecord r = agent_from_registration_json(spec);
  TimePoint at = clock_.now();
  r.agent_id = ids_.uuid4();
  r.creator = admin_id;
  r.status = AgentStatus::ACTIVE;
  r.created_at = r.updated_at = at;
  std::string credential = ids_.credential_token();
  r.auth_token_hash = sha256_hex(credential);
  store_agent_locked(r);

  PendingEvent e;
  e.type = AuditEventType::AGENT_REGISTERED;
  e.actor = {ActorKind::admin, admin_id};
  e.subject.agent_id = r.agent_id;
  e.detail["name"] = r.name;
  e.detail["roles"] = join_csv(r.roles);
  audit_record(std::move(e));
  return {r, credential};
}

AgentRecord RegistryService::update_agent(const std::string& admin_id,
                                          const std::string& agent_id,
                                          const json& patch) {
  std::lock_guard lk(mu_);
  if (!patch.is_object())
    throw ApiError(Errc::validation_error, "patch must be an object");
  AgentRecord old = load_agent_locked(agent_id);
  AgentRecord merged = old;

  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string& k = it.key();
    if (k == "agent_id")
      throw ApiError(Errc::immutable_field, "agent_id is immutable");
    if (k == "creator" || k == "request_count" || k == "status" ||
        k == "created_at" || k == "updated_at" || k == "auth_token_hash")
      throw ApiError(Errc::validation_error, "field is server managed: " + k);
    if (k != "name" && k != "description" && k != "roles" &&
        k != "allowed_tools")
      throw ApiError(Errc::validation_error, "unknown field: " + k);
  }
  json body = json::object();
  body["name"] = merged.name;
  body["description"] = merged.description;
  body["roles"] = merged.roles;
  body["allowed_tools"] = merged.allowed_tools;
  for (auto it = patch.begin(); it != patch.end(); ++it)
    body[it.key()] = it.value();
  AgentRecord parsed = agent_from_registration_json(body);
  merged.name = parsed.name;
  merged.description = parsed.description;
  merged.roles = parsed.roles;
  merged.allowed_tools = parsed.allowed_tools;

  std::vector<std::string> changed;
  if (merged.name != old.name) changed.push_back("name");
  if (merged.description != old.description) changed.push_back("description");
  if (merged.roles != old.roles) changed.push_back("roles");
  if (merged.allowed_tools != old.allowed_tools)
    changed.push_back("allowed_tools");
  merged.updated_at = clock_.now();
  store_agent_locked(merged);

  PendingEvent e;
  e.type = AuditEventType::AGENT_STATUS_CHANGED;
  e.actor = {ActorKind::admin, admin_id};
  e.subject.agent_id = agent_id;
  e.detail["action"] = "updated";
  e.detail["changed_fields"] = join_csv(changed);
  audit_record(std::move(e));
  return merged;
}

AgentRecord RegistryService::set_agent_status(const std::string& admin_id,
                                              const std::string& agent_id,
                                              AgentStatus target) {
  std::lock_guard lk(mu_);
  AgentRecord r = load_agent_locked(agent_id);
  AgentStatus old = r.status;
  TimePoint at = clock_.now();
  r.status = target;
  r.updated_at = at;
  store_agent_locked(r);

  PendingEvent e;
  e.type = AuditEventType::AGENT_STATUS_CHANGED;
  e.actor = {ActorKind::admin, admin_id};
  e.subject.agent_id = agent_id;
  e.detail["action"] = "status";
  e.detail["old_status"] = std::string(to_string(old));
  e.detail["new_status"] = std::string(to_string(target));
  audit_record(std::move(e));

  if (target == AgentStatus::DEACTIVATED) {
    for (const auto& jti : credentials_->revoke_by_subject(agent_id, at)) {
      PendingEvent c;
      c.type = AuditEventType::CREDENTIAL_REVOKED;
      c.actor = {ActorKind::admin, admin_id};
      c.subject.agent_id = agent_id;
      c.subject.credential_id = jti;
      c.severity = Severity::WARN;
      c.detail["reason"] = "agent_deactivated";
      audit_record(std::move(c));
    }
  }
  return r;
}

std::vector<AgentRecord> RegistryService::list_agents() const {
  std::vector<AgentRecord> out;
  for (const auto& [id, v] : backend_->scan(kAgents))
    out.push_back(agent_from_internal_json(v));
  return out;
}

AgentRecord RegistryService::get_agent(const std::string& agent_id) const {
  std::lock_guard lk(mu_);
  return load_agent_locked(agent_id);
}

RegistryService::PolicyUpsert RegistryService::upsert_policy(
    const std::string& admin_id, const json& body) {
  std::lock_guard lk(mu_);
  AccessPolicy p = policy_from_json(body);
  TimePoint at = clock_.now();
  auto existing = backend_->get(kPolicies, p.policy_id);
  bool created = !existing.has_value();
  if (existing) {
    AccessPolicy prev = policy_from_internal_json(*existing);
    p.created_at = prev.created_at;
    p.created_by = prev.created_by;
  } else {
    p.created_at = at;
    p.created_by = admin_id;
  }
  p.updated_at = at;
  backend_->put(kPolicies, p.policy_id, policy_admin_json(p));

  PendingEvent e;
  e.type = AuditEventType::POLICY_UPSERTED;
  e.actor = {ActorKind::admin, admin_id};
  e.subject.policy_id = p.policy_id;
  e.subject.tool_id = p.tool_id;
  e.detail["action"] = created ? "created" : "updated";
  audit_record(std::move(e));
  return {p, created};
}

AccessPolicy RegistryService::deactivate_policy(const std::string& admin_id,
                                                const std::string& policy_id) {
  std::lock_guard lk(mu_);
  auto existing = backend_->get(kPolicies, policy_id);
  if (!existing)
    throw ApiError(Errc::not_found, "unknown policy: " + policy_id);
  AccessPolicy p = policy_from_internal_json(*existing);
  p.is_active = false;
  p.updated_at = clock_.now();
  backend_->put(kPolicies, policy_id, policy_admin_json(p));

  PendingEvent e;
  e.type = AuditEventType::POLICY_UPSERTED;
  e.actor = {ActorKind::admin, admin_id};
  e.subject.policy_id = policy_id;
  e.subject.tool_id = p.tool_id;
  e.detail["action"] = "deactivated";
  audit_record(std::move(e));
  return p;
}

std::vector<AccessPolicy> RegistryService::list_policies() const {
  std::lock_guard lk(mu_);
  return load_policies_locked();
}

FeedLoadResult RegistryService::load_feed(const std::string& admin_id,
                                          std::string_view bytes) {
  (void)admin_id;
  VulnFeed feed = parse_vuln_feed(bytes);
  std::lock_guard lk(mu_);
  feed_ = feed;
  backend_->put(kSystem, "feed", feed_to_json(feed));
  FeedLoadResult result;
  result.feed = feed;
  refresh_trust_locked(clock_.now());
  for (const auto& tool : list_tools()) {
    if (tool.status == ToolStatus::DEACTIVATED) continue;
    result.reports.push_back(
        compute_trust_score(tool, feed, clock_.now(), cfg_.trust_weights));
  }
  return result;
}

void RegistryService::refresh_trust_locked(TimePoint at) {
  VulnFeed feed = feed_.value_or(VulnFeed{});
  for (const auto& tool : list_tools()) {
    if (tool.status == ToolStatus::DEACTIVATED) continue;
    auto report = compute_trust_score(tool, feed, at, cfg_.trust_weights);
    if (report.score == tool.trust_score) continue;
    ToolRecord updated = tool;
    updated.trust_score = report.score;
    updated.last_trust_score_update = at;
    updated.updated_at = at;
    store_tool_locked(updated);

    PendingEvent e;
    e.type = AuditEventType::TRUST_SCORE_UPDATED;
    e.actor = {ActorKind::system, "trust-engine"};
    e.subject.tool_id = tool.tool_id;
    e.detail["old_score"] = std::to_string(tool.trust_score);
    e.detail["new_score"] = std::to_string(report.score);
    e.detail["feed_timestamp"] = format_rfc3339(feed.feed_timestamp);
    audit_record(std::move(e));
  }
}

std::vector<TrustScoreReport> RegistryService::refresh_trust_scores() {
  std::lock_guard lk(mu_);
  TimePoint at = clock_.now();
  refresh_trust_locked(at);
  std::vector<TrustScoreReport> reports;
  VulnFeed feed = feed_.value_or(VulnFeed{});
  for (const auto& tool : list_tools()) {
    if (tool.status == ToolStatus::DEACTIVATED) continue;
    reports.push_back(compute_trust_score(tool, feed, at, cfg_.trust_weights));
  }
  return reports;
}

std::optional<VulnFeed> RegistryService::current_feed() const {
  std::lock_guard lk(mu_);
  return feed_;
}

AccessResponse RegistryService::request_access(const AgentRecord& agent,
                                               const std::string& tool_id,
                                               const std::string& scope) {
  TimePoint at = clock_.now();
  ToolRecord tool;
  std::vector<AccessPolicy> policies;
  {
    std::lock_guard lk(mu_);
    tool = load_tool_locked(tool_id);  // unknown tool propagates as 404
    policies = load_policies_locked();
  }

  AccessDecision decision = engine_.evaluate(agent, tool, scope, at, policies);
  AccessResponse resp{decision, std::nullopt};

  if (decision.outcome == DecisionOutcome::PERMIT) {
    Severity sev = Severity::INFO;
    {
      std::lock_guard lk(mu_);
      AgentRecord fresh = load_agent_locked(agent.agent_id);
      fresh.request_count += 1;
      store_agent_locked(fresh);
      for (const auto& p : policies)
        if (decision.matched_policy_id &&
            p.policy_id == *decision.matched_policy_id)
          sev = severity_for(p.rules.log_level);
    }
    PendingEvent g;
    g.type = AuditEventType::ACCESS_GRANTED;
    g.actor = {ActorKind::agent, agent.agent_id};
    g.subject.tool_id = tool_id;
    g.subject.agent_id = agent.agent_id;
    g.subject.policy_id = decision.matched_policy_id;
    g.severity = sev;
    g.detail["scope"] = scope;
    audit_record(std::move(g));

    EphemeralCredential cred =
        credentials_->issue(agent.agent_id, tool, {scope}, at);
    PendingEvent c;
    c.type = AuditEventType::CREDENTIAL_ISSUED;
    c.actor = {ActorKind::system, "credential-service"};
    c.subject.tool_id = tool_id;
    c.subject.agent_id = agent.agent_id;
    c.subject.credential_id = cred.credential_id;
    c.detail["scope"] = scope;
    c.detail["expires_at"] = format_rfc3339(cred.expires_at);
    audit_record(std::move(c));
    resp.credential = cred;
  } else {
    // REQUIRES_APPROVAL also lands here: nothing was granted yet, and the
    // trail needs the pending request visible.
    PendingEvent d;
    d.type = AuditEventType::ACCESS_DENIED;
    d.actor = {ActorKind::agent, agent.agent_id};
    d.subject.tool_id = tool_id;
    d.subject.agent_id = agent.agent_id;
    d.subject.policy_id = decision.matched_policy_id;
    d.outcome = AuditOutcome::denied;
    d.severity = Severity::WARN;
    d.detail["scope"] = scope;
    d.detail["reason"] = std::string(to_string(decision.reason));
    audit_record(std::move(d));
  }
  return resp;
}

CredentialVerifyResult RegistryService::verify_credential(
    const std::string& token, const std::string& audience) const {
  return credentials_->verify(token, audience, clock_.now());
}

std::size_t RegistryService::admin_revoke(const std::string& admin_id,
                                          const json& body) {
  if (!body.is_object())
    throw ApiError(Errc::validation_error, "revoke body must be an object");
  int keys = 0;
  for (const char* k : {"jti", "agent_id", "tool_id"})
    if (body.contains(k)) ++keys;
  if (keys != 1 || body.size() != 1)
    throw ApiError(Errc::validation_error,
                   "revoke body must carry exactly one of jti, agent_id, tool_id");

  TimePoint at = clock_.now();
  std::vector<std::string> revoked;
  AuditSubject base_subject;
  std::string reason = "admin_revoked";
  if (body.contains("jti")) {
    const std::string jti = body.at("jti").get<std::string>();
    if (credentials_->revoke_token(jti)) revoked.push_back(jti);
  } else if (body.contains("agent_id")) {
    const std::string agent_id = body.at("agent_id").get<std::string>();
    {
      std::lock_guard lk(mu_);
      load_agent_locked(agent_id);  // 404 on unknown agent
    }
    revoked = credentials_->revoke_by_subject(agent_id, at);
    base_subject.agent_id = agent_id;
  } else {
    const std::string tool_id = body.at("tool_id").get<std::string>();
    {
      std::lock_guard lk(mu_);
      load_tool_locked(tool_id);  // 404 on unknown tool
    }
    revoked = credentials_->revoke_by_audience(tool_id, at);
    base_subject.tool_id = tool_id;
  }

  for (const auto& jti : revoked) {
    PendingEvent e;
    e.type = AuditEventType::CREDENTIAL_REVOKED;
    e.actor = {ActorKind::admin, admin_id};
    e.subject = base_subject;
    e.subject.credential_id = jti;
    e.severity = Severity::WARN;
    e.detail["reason"] = reason;
    audit_record(std::move(e));
  }
  return revoked.size();
}

std::size_t RegistryService::purge_expired_credentials() {
  return credentials_->purge_expired(clock_.now());
}

std::vector<AuditEvent> RegistryService::query_events(
    const AuditLog::EventFilter& f) const {
  return audit_->query(f);
}

std::string RegistryService::export_events_jsonl(std::uint64_t from,
                                                 std::uint64_t to) const {
  return audit_->export_jsonl(from, to);
}

void RegistryService::record_role_denied(const CallerIdentity& caller,
                                         const std::string& route) {
  PendingEvent e;
  e.type = AuditEventType::ACCESS_DENIED;
  e.actor = {caller.role == CallerIdentity::Role::admin ? ActorKind::admin
                                                        : ActorKind::agent,
             caller.id};
  if (caller.role == CallerIdentity::Role::agent) e.subject.agent_id = caller.id;
  e.outcome = AuditOutcome::denied;
  e.severity = Severity::WARN;
  e.detail["route"] = route;
  e.detail["reason"] = "forbidden";
  audit_record(std::move(e));
}

void RegistryService::record_client_detection(const std::string& tool_id,
                                              const std::string& rule_id,
                                              const std::string& message) {
  PendingEvent e;
  e.type = AuditEventType::ALERT;
  e.actor = {ActorKind::system, "client-verify"};
  e.subject.tool_id = tool_id;
  e.severity = Severity::CRITICAL;
  e.detail["rule_id"] = rule_id;
  e.detail["message"] = message;
  audit_record(std::move(e));
}

}  // namespace squatguard

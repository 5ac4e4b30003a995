#pragma once

#include <memory>
#include <mutex>
#include <optional>

#include "squatguard/audit_log.hpp"
#include "squatguard/config.hpp"
#include "squatguard/credential_service.hpp"
#include "squatguard/errors.hpp"
#include "squatguard/ids.hpp"
#include "squatguard/policy_engine.hpp"
#include "squatguard/records.hpp"
#include "squatguard/registry_types.hpp"
#include "squatguard/store.hpp"
#include "squatguard/trust_score.hpp"
#include "squatguard/vuln_feed.hpp"

namespace squatguard {

// The registry control plane: admin-gated registration with dual approval,
// policy-filtered discovery over signed records, policy-driven access
// decisions, JIT credentials, trust scoring, and the audit trail. All public
// operations are safe to call concurrently.
class RegistryService {
 public:
  RegistryService(ServiceConfig cfg, ServiceKeys keys,
                  std::unique_ptr<StorageBackend> backend,
                  Clock clock = Clock::system(),
                  std::optional<std::uint64_t> id_seed = std::nullopt);

  // Resolves a bearer credential to an identity; nullopt means 401. Agent
  // credentials stop resolving while the agent is DEACTIVATED.
  std::optional<CallerIdentity> authenticate(const std::string& bearer) const;

  // Tools (admin).
  ToolRecord register_tool(const std::string& admin_id, const json& spec);
  ToolRecord approve_tool(const std::string& admin_id,
                          const std::string& tool_id);
  ToolRecord update_tool(const std::string& admin_id,
                         const std::string& tool_id, const json& patch);
  ToolRecord set_tool_status(const std::string& admin_id,
                             const std::string& tool_id, ToolStatus target);
  std::vector<ToolRecord> list_tools() const;
  ToolRecord get_tool(const std::string& tool_id) const;  // any status

  // Tools (agent).
  std::vector<DiscoveryEntry> discover_tools(const AgentRecord& agent,
                                             const DiscoveryFilters& filters);
  // ACTIVE tools only; PENDING and DEACTIVATED are invisible to agents.
  DiscoveryEntry get_tool_for_agent(const AgentRecord& agent,
                                    const std::string& tool_id);

  SignedRecord sign_tool_record(const ToolRecord& r) const;
  static bool verify_record(const std::array<std::uint8_t, 32>& public_key,
                            const SignedRecord& s);

  // Agents (admin).
  std::pair<AgentRecord, std::string> register_agent(const std::string& admin_id,
                                                     const json& spec);
  AgentRecord update_agent(const std::string& admin_id,
                           const std::string& agent_id, const json& patch);
  AgentRecord set_agent_status(const std::string& admin_id,
                               const std::string& agent_id, AgentStatus target);
  std::vector<AgentRecord> list_agents() const;
  AgentRecord get_agent(const std::string& agent_id) const;

  // Policies (admin).
  struct PolicyUpsert {
    AccessPolicy policy;
    bool created = false;
  };
  PolicyUpsert upsert_policy(const std::string& admin_id, const json& body);
  AccessPolicy deactivate_policy(const std::string& admin_id,
                                 const std::string& policy_id);
  std::vector<AccessPolicy> list_policies() const;

  // Trust.
  FeedLoadResult load_feed(const std::string& admin_id, std::string_view bytes);
  std::vector<TrustScoreReport> refresh_trust_scores();
  std::optional<VulnFeed> current_feed() const;

  // Access flow: evaluate, count, audit, and mint a credential on PERMIT.
  AccessResponse request_access(const AgentRecord& agent,
                                const std::string& tool_id,
                                const std::string& scope);

  // Credentials.
  CredentialVerifyResult verify_credential(const std::string& token,
                                           const std::string& audience) const;
  std::size_t admin_revoke(const std::string& admin_id, const json& body);
  std::size_t purge_expired_credentials();
  CredentialService& credentials() { return *credentials_; }

  // Audit.
  std::vector<AuditEvent> query_events(const AuditLog::EventFilter& f) const;
  std::string export_events_jsonl(std::uint64_t from, std::uint64_t to) const;
  AuditLog& audit() { return *audit_; }

  // Gateway and client hooks.
  void record_role_denied(const CallerIdentity& caller, const std::string& route);
  void record_client_detection(const std::string& tool_id,
                               const std::string& rule_id,
                               const std::string& message);

  const ServiceConfig& config() const { return cfg_; }
  std::array<std::uint8_t, 32> public_key() const {
    return keys_.signing.public_key;
  }
  std::string key_id() const { return keys_.signing.key_id(); }
  TimePoint now() const { return clock_.now(); }

 private:
  ToolRecord load_tool_locked(const std::string& tool_id) const;
  AgentRecord load_agent_locked(const std::string& agent_id) const;
  void store_tool_locked(const ToolRecord& r);
  void store_agent_locked(const AgentRecord& r);
  std::vector<AccessPolicy> load_policies_locked() const;
  void refresh_trust_locked(TimePoint at);
  std::optional<int> strictest_policy_minimum(const std::string& tool_id) const;
  AuditEvent audit_record(PendingEvent e);

  ServiceConfig cfg_;
  ServiceKeys keys_;
  std::unique_ptr<StorageBackend> backend_;
  Clock clock_;
  IdGenerator ids_;
  std::unique_ptr<CredentialService> credentials_;
  std::unique_ptr<AuditLog> audit_;
  RateLimiter limiter_;
  PolicyEngine engine_;

  mutable std::mutex mu_;  // guards record mutations and the feed
  std::optional<VulnFeed> feed_;
};

}  // namespace squatguard

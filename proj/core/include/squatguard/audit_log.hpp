#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "squatguard/store.hpp"
#include "squatguard/time_utils.hpp"

namespace squatguard {

enum class AuditEventType {
  TOOL_REGISTERED,
  TOOL_APPROVED,
  TOOL_UPDATED,
  TOOL_STATUS_CHANGED,
  AGENT_REGISTERED,
  AGENT_STATUS_CHANGED,
  POLICY_UPSERTED,
  DISCOVERY_QUERY,
  ACCESS_GRANTED,
  ACCESS_DENIED,
  CREDENTIAL_ISSUED,
  CREDENTIAL_REVOKED,
  TRUST_SCORE_UPDATED,
  ALERT,
};
std::string_view to_string(AuditEventType t);
std::optional<AuditEventType> parse_audit_event_type(std::string_view s);

enum class ActorKind { admin, agent, system };
std::string_view to_string(ActorKind k);
std::optional<ActorKind> parse_actor_kind(std::string_view s);

enum class AuditOutcome { success, denied, error };
std::string_view to_string(AuditOutcome o);
std::optional<AuditOutcome> parse_audit_outcome(std::string_view s);

enum class Severity { DEBUG, INFO, WARN, CRITICAL };
std::string_view to_string(Severity s);
std::optional<Severity> parse_severity(std::string_view s);

struct AuditActor {
  ActorKind kind = ActorKind::system;
  std::string id;
};

struct AuditSubject {
  std::optional<std::string> tool_id;
  std::optional<std::string> agent_id;
  std::optional<std::string> policy_id;
  std::optional<std::string> credential_id;
};

// One immutable trail entry. hash covers every field including prev_hash, so
// any rewrite breaks the chain from that point on.
struct AuditEvent {
  std::uint64_t seq = 0;  // 1-based, strictly increasing, no gaps
  TimePoint ts{};
  AuditEventType type = AuditEventType::ALERT;
  AuditActor actor;
  AuditSubject subject;
  AuditOutcome outcome = AuditOutcome::success;
  Severity severity = Severity::INFO;
  std::map<std::string, std::string> detail;
  std::string prev_hash;  // 64 hex chars; the first entry links to all zeros
  std::string hash;

  json to_json() const;
  static AuditEvent from_json(const json& j);
  // Canonical bytes the hash is computed over (everything but hash itself).
  std::string hash_input() const;
};

// Fields the caller supplies; seq, ts, and the chain are assigned on append.
struct PendingEvent {
  AuditEventType type = AuditEventType::ALERT;
  AuditActor actor;
  AuditSubject subject;
  AuditOutcome outcome = AuditOutcome::success;
  Severity severity = Severity::INFO;
  std::map<std::string, std::string> detail;
};

struct AnomalyConfig {
  int repeated_denial_threshold = 5;  // fires at >= threshold within window
  int repeated_denial_window_s = 60;
  int discovery_flood_threshold = 30;  // fires at > threshold within window
  int discovery_flood_window_s = 60;
  int alert_dedup_window_s = 60;  // one alert per (rule, principal) per window
  int scan_retention_s = 600;     // how far back rule scans ever need to look
};

struct Alert {
  std::string rule_id;
  std::string principal;  // agent_id or tool_id the rule keyed on
  std::string message;
  std::vector<std::uint64_t> related_seqs;
};

// Hash-chained append-only trail. Anomaly rules run synchronously on every
// append; firings are themselves appended as CRITICAL ALERT events.
//   repeated_denial: >= threshold ACCESS_DENIED for one agent within window
//   trust_collapse:  TRUST_SCORE_UPDATED below the strictest active policy
//                    minimum for a tool that still has live credentials
//   discovery_flood: > threshold DISCOVERY_QUERY for one agent within window
class AuditLog {
 public:
  // Strictest (highest) minimum_tool_trust_score among active policies for a
  // tool; nullopt when no policy constrains it.
  using TrustMinimumProvider =
      std::function<std::optional<int>(const std::string& tool_id)>;
  using LiveCredentialProvider =
      std::function<bool(const std::string& tool_id, TimePoint now)>;

  explicit AuditLog(StorageBackend& backend, AnomalyConfig cfg = {});
  void set_providers(TrustMinimumProvider trust_min,
                     LiveCredentialProvider live_creds);

  AuditEvent record(PendingEvent e, TimePoint now);

  struct EventFilter {
    std::uint64_t seq_from = 0;  // inclusive; 0 means from the start
    std::uint64_t seq_to = 0;    // inclusive; 0 means to the end
    std::optional<AuditEventType> type;
    std::optional<std::string> agent_id;
    std::optional<std::string> tool_id;
    std::size_t limit = 0;  // 0 means unlimited
  };
  std::vector<AuditEvent> query(const EventFilter& f) const;
  std::vector<AuditEvent> all() const;
  std::uint64_t last_seq() const;
  std::string export_jsonl(std::uint64_t seq_from, std::uint64_t seq_to) const;

  // Replays a window through fresh rule state and returns every firing.
  std::vector<Alert> run_anomaly_rules(const std::vector<AuditEvent>& window) const;

  // Index of the first entry whose chain link or hash fails, nullopt if intact.
  static std::optional<std::size_t> verify_chain(
      const std::vector<AuditEvent>& events);

  const AnomalyConfig& config() const { return cfg_; }

 private:
  using DedupState = std::map<std::pair<std::string, std::string>, std::int64_t>;

  AuditEvent append_locked(PendingEvent e, TimePoint now);
  // Checks one event against the rules given the events before it.
  std::vector<Alert> check_rules(const std::vector<AuditEvent>& history,
                                 const AuditEvent& ev, DedupState& dedup) const;

  StorageBackend& backend_;
  AnomalyConfig cfg_;
  TrustMinimumProvider trust_min_;
  LiveCredentialProvider live_creds_;

  mutable std::mutex mu_;
  std::vector<AuditEvent> events_;
  DedupState dedup_;
};

}  // namespace squatguard

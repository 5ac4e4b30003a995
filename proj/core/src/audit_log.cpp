#include "squatguard/audit_log.hpp"

#include <sstream>

#include "squatguard/crypto.hpp"

namespace squatguard {

namespace {
constexpr const char* kAuditLogName = "audit";
const std::string kZeroHash(64, '0');
}  // namespace

std::string_view to_string(AuditEventType t) {
  switch (t) {
    case AuditEventType::TOOL_REGISTERED: return "TOOL_REGISTERED";
    case AuditEventType::TOOL_APPROVED: return "TOOL_APPROVED";
    case AuditEventType::TOOL_UPDATED: return "TOOL_UPDATED";
    case AuditEventType::TOOL_STATUS_CHANGED: return "TOOL_STATUS_CHANGED";
    case AuditEventType::AGENT_REGISTERED: return "AGENT_REGISTERED";
    case AuditEventType::AGENT_STATUS_CHANGED: return "AGENT_STATUS_CHANGED";
    case AuditEventType::POLICY_UPSERTED: return "POLICY_UPSERTED";
    case AuditEventType::DISCOVERY_QUERY: return "DISCOVERY_QUERY";
    case AuditEventType::ACCESS_GRANTED: return "ACCESS_GRANTED";
    case AuditEventType::ACCESS_DENIED: return "ACCESS_DENIED";
    case AuditEventType::CREDENTIAL_ISSUED: return "CREDENTIAL_ISSUED";
    case AuditEventType::CREDENTIAL_REVOKED: return "CREDENTIAL_REVOKED";
    case AuditEventType::TRUST_SCORE_UPDATED: return "TRUST_SCORE_UPDATED";
    case AuditEventType::ALERT: return "ALERT";
  }
  return "ALERT";
}

std::optional<AuditEventType> parse_audit_event_type(std::string_view s) {
  static const std::map<std::string_view, AuditEventType> kMap = {
      {"TOOL_REGISTERED", AuditEventType::TOOL_REGISTERED},
      {"TOOL_APPROVED", AuditEventType::TOOL_APPROVED},
      {"TOOL_UPDATED", AuditEventType::TOOL_UPDATED},
      {"TOOL_STATUS_CHANGED", AuditEventType::TOOL_STATUS_CHANGED},
      {"AGENT_REGISTERED", AuditEventType::AGENT_REGISTERED},
      {"AGENT_STATUS_CHANGED", AuditEventType::AGENT_STATUS_CHANGED},
      {"POLICY_UPSERTED", AuditEventType::POLICY_UPSERTED},
      {"DISCOVERY_QUERY", AuditEventType::DISCOVERY_QUERY},
      {"ACCESS_GRANTED", AuditEventType::ACCESS_GRANTED},
      {"ACCESS_DENIED", AuditEventType::ACCESS_DENIED},
      {"CREDENTIAL_ISSUED", AuditEventType::CREDENTIAL_ISSUED},
      {"CREDENTIAL_REVOKED", AuditEventType::CREDENTIAL_REVOKED},
      {"TRUST_SCORE_UPDATED", AuditEventType::TRUST_SCORE_UPDATED},
      {"ALERT", AuditEventType::ALERT}};
  auto it = kMap.find(s);
  return it == kMap.end() ? std::nullopt : std::make_optional(it->second);
}

std::string_view to_string(ActorKind k) {
  switch (k) {
    case ActorKind::admin: return "admin";
    case ActorKind::agent: return "agent";
    case ActorKind::system: return "system";
  }
  return "system";
}

std::optional<ActorKind> parse_actor_kind(std::string_view s) {
  if (s == "admin") return ActorKind::admin;
  if (s == "agent") return ActorKind::agent;
  if (s == "system") return ActorKind::system;
  return std::nullopt;
}

std::string_view to_string(AuditOutcome o) {
  switch (o) {
    case AuditOutcome::success: return "success";
    case AuditOutcome::denied: return "denied";
    case AuditOutcome::error: return "error";
  }
  return "error";
}

std::optional<AuditOutcome> parse_audit_outcome(std::string_view s) {
  if (s == "success") return AuditOutcome::success;
  if (s == "denied") return AuditOutcome::denied;
  if (s == "error") return AuditOutcome::error;
  return std::nullopt;
}

std::string_view to_string(Severity s) {
  switch (s) {
    case Severity::DEBUG: return "DEBUG";
    case Severity::INFO: return "INFO";
    case Severity::WARN: return "WARN";
    case Severity::CRITICAL: return "CRITICAL";
  }
  return "INFO";
}

std::optional<Severity> parse_severity(std::string_view s) {
  if (s == "DEBUG") return Severity::DEBUG;
  if (s == "INFO") return Severity::INFO;
  if (s == "WARN") return Severity::WARN;
  if (s == "CRITICAL") return Severity::CRITICAL;
  return std::nullopt;
}

namespace {

json event_body_json(const AuditEvent& e) {
  json subject = json::object();
  if (e.subject.tool_id) subject["tool_id"] = *e.subject.tool_id;
  if (e.subject.agent_id) subject["agent_id"] = *e.subject.agent_id;
  if (e.subject.policy_id) subject["policy_id"] = *e.subject.policy_id;
  if (e.subject.credential_id)
    subject["credential_id"] = *e.subject.credential_id;
  json detail = json::object();
  for (const auto& [k, v] : e.detail) detail[k] = v;
  return json{{"seq", e.seq},
              {"ts", format_rfc3339(e.ts)},
              {"type", std::string(to_string(e.type))},
              {"actor", json{{"kind", std::string(to_string(e.actor.kind))},
                             {"id", e.actor.id}}},
              {"subject", subject},
              {"outcome", std::string(to_string(e.outcome))},
              {"severity", std::string(to_string(e.severity))},
              {"detail", detail},
              {"prev_hash", e.prev_hash}};
}

}  // namespace

std::string AuditEvent::hash_input() const {
  return canonical_dump(event_body_json(*this));
}

json AuditEvent::to_json() const {
  json j = event_body_json(*this);
  j["hash"] = hash;
  return j;
}

AuditEvent AuditEvent::from_json(const json& j) {
  AuditEvent e;
  e.seq = j.at("seq").get<std::uint64_t>();
  e.ts = *parse_rfc3339(j.at("ts").get<std::string>());
  e.type = *parse_audit_event_type(j.at("type").get<std::string>());
  e.actor.kind = *parse_actor_kind(j.at("actor").at("kind").get<std::string>());
  e.actor.id = j.at("actor").at("id").get<std::string>();
  const json& s = j.at("subject");
  if (s.contains("tool_id")) e.subject.tool_id = s.at("tool_id").get<std::string>();
  if (s.contains("agent_id"))
    e.subject.agent_id = s.at("agent_id").get<std::string>();
  if (s.contains("policy_id"))
    e.subject.policy_id = s.at("policy_id").get<std::string>();
  if (s.contains("credential_id"))
    e.subject.credential_id = s.at("credential_id").get<std::string>();
  e.outcome = *parse_audit_outcome(j.at("outcome").get<std::string>());
  e.severity = *parse_severity(j.at("severity").get<std::string>());
  for (const auto& [k, v] : j.at("detail").items())
    e.detail[k] = v.get<std::string>();
  e.prev_hash = j.at("prev_hash").get<std::string>();
  e.hash = j.at("hash").get<std::string>();
  return e;
}

AuditLog::AuditLog(StorageBackend& backend, AnomalyConfig cfg)
    : backend_(backend), cfg_(cfg) {
  for (const auto& line : backend_.read_log(kAuditLogName))
    events_.push_back(AuditEvent::from_json(json::parse(line)));
}

void AuditLog::set_providers(TrustMinimumProvider trust_min,
                             LiveCredentialProvider live_creds) {
  trust_min_ = std::move(trust_min);
  live_creds_ = std::move(live_creds);
}

AuditEvent AuditLog::append_locked(PendingEvent e, TimePoint now) {
  AuditEvent ev;
  ev.seq = events_.empty() ? 1 : events_.back().seq + 1;
  ev.ts = now;
  ev.type = e.type;
  ev.actor = std::move(e.actor);
  ev.subject = std::move(e.subject);
  ev.outcome = e.outcome;
  ev.severity = e.severity;
  ev.detail = std::move(e.detail);
  ev.prev_hash = events_.empty() ? kZeroHash : events_.back().hash;
  ev.hash = sha256_hex(ev.hash_input());
  backend_.append_log(kAuditLogName, canonical_dump(ev.to_json()));
  events_.push_back(ev);
  return ev;
}

AuditEvent AuditLog::record(PendingEvent e, TimePoint now) {
  std::lock_guard lk(mu_);
  AuditEvent ev = append_locked(std::move(e), now);
  for (const Alert& a : check_rules(events_, ev, dedup_)) {
    PendingEvent alert;
    alert.type = AuditEventType::ALERT;
    alert.actor = {ActorKind::system, "anomaly-monitor"};
    if (a.rule_id == "trust_collapse")
      alert.subject.tool_id = a.principal;
    else
      alert.subject.agent_id = a.principal;
    alert.outcome = AuditOutcome::success;
    alert.severity = Severity::CRITICAL;
    alert.detail["rule_id"] = a.rule_id;
    alert.detail["message"] = a.message;
    std::ostringstream seqs;
    for (std::size_t i = 0; i < a.related_seqs.size(); ++i) {
      if (i) seqs << ",";
      seqs << a.related_seqs[i];
    }
    alert.detail["related_seqs"] = seqs.str();
    append_locked(std::move(alert), now);
  }
  return ev;
}

std::vector<Alert> AuditLog::check_rules(const std::vector<AuditEvent>& history,
                                         const AuditEvent& ev,
                                         DedupState& dedup) const {
  std::vector<Alert> alerts;
  auto fire = [&](const std::string& rule, const std::string& principal,
                  std::string message, std::vector<std::uint64_t> related) {
    auto key = std::make_pair(rule, principal);
    auto it = dedup.find(key);
    std::int64_t now_e = to_epoch(ev.ts);
    if (it != dedup.end() && now_e - it->second < cfg_.alert_dedup_window_s)
      return;
    dedup[key] = now_e;
    alerts.push_back(Alert{rule, principal, std::move(message), std::move(related)});
  };

  // Events within the trailing window, scanned from the newest backwards.
  auto collect = [&](AuditEventType type, int window_s,
                     const std::function<std::string(const AuditEvent&)>& key,
                     const std::string& want) {
    std::vector<std::uint64_t> seqs;
    std::int64_t cutoff = to_epoch(ev.ts) - window_s;
    for (auto it = history.rbegin(); it != history.rend(); ++it) {
      if (to_epoch(it->ts) < cutoff) break;
      if (it->type == type && key(*it) == want) seqs.push_back(it->seq);
    }
    return seqs;
  };

  auto denial_key = [](const AuditEvent& e) {
    if (e.subject.agent_id) return *e.subject.agent_id;
    return e.actor.kind == ActorKind::agent ? e.actor.id : std::string{};
  };

  if (ev.type == AuditEventType::ACCESS_DENIED) {
    std::string agent = denial_key(ev);
    if (!agent.empty()) {
      auto seqs = collect(AuditEventType::ACCESS_DENIED,
                          cfg_.repeated_denial_window_s, denial_key, agent);
      if (static_cast<int>(seqs.size()) >= cfg_.repeated_denial_threshold)
        fire("repeated_denial", agent,
             "agent " + agent + " denied " + std::to_string(seqs.size()) +
                 " times within " +
                 std::to_string(cfg_.repeated_denial_window_s) + "s",
             std::move(seqs));
    }
  } else if (ev.type == AuditEventType::DISCOVERY_QUERY) {
    auto actor_key = [](const AuditEvent& e) { return e.actor.id; };
    auto seqs = collect(AuditEventType::DISCOVERY_QUERY,
                        cfg_.discovery_flood_window_s, actor_key, ev.actor.id);
    if (static_cast<int>(seqs.size()) > cfg_.discovery_flood_threshold)
      fire("discovery_flood", ev.actor.id,
           "agent " + ev.actor.id + " issued " + std::to_string(seqs.size()) +
               " discovery queries within " +
               std::to_string(cfg_.discovery_flood_window_s) + "s",
           std::move(seqs));
  } else if (ev.type == AuditEventType::TRUST_SCORE_UPDATED && trust_min_ &&
             live_creds_ && ev.subject.tool_id) {
    const std::string& tool = *ev.subject.tool_id;
    auto it = ev.detail.find("new_score");
    if (it != ev.detail.end()) {
      int new_score = std::stoi(it->second);
      auto minimum = trust_min_(tool);
      if (minimum && new_score < *minimum && live_creds_(tool, ev.ts))
        fire("trust_collapse", tool,
             "tool " + tool + " dropped to " + std::to_string(new_score) +
                 " below policy minimum " + std::to_string(*minimum) +
                 " with live credentials outstanding",
             {ev.seq});
    }
  }
  return alerts;
}

std::vector<AuditEvent> AuditLog::query(const EventFilter& f) const {
  std::lock_guard lk(mu_);
  std::vector<AuditEvent> out;
  for (const auto& e : events_) {
    if (f.seq_from && e.seq < f.seq_from) continue;
    if (f.seq_to && e.seq > f.seq_to) continue;
    if (f.type && e.type != *f.type) continue;
    if (f.agent_id) {
      bool match = (e.subject.agent_id && *e.subject.agent_id == *f.agent_id) ||
                   (e.actor.kind == ActorKind::agent && e.actor.id == *f.agent_id);
      if (!match) continue;
    }
    if (f.tool_id && !(e.subject.tool_id && *e.subject.tool_id == *f.tool_id))
      continue;
    out.push_back(e);
    if (f.limit && out.size() >= f.limit) break;
  }
  return out;
}

std::vector<AuditEvent> AuditLog::all() const {
  std::lock_guard lk(mu_);
  return events_;
}

std::uint64_t AuditLog::last_seq() const {
  std::lock_guard lk(mu_);
  return events_.empty() ? 0 : events_.back().seq;
}

std::string AuditLog::export_jsonl(std::uint64_t seq_from,
                                   std::uint64_t seq_to) const {
  std::lock_guard lk(mu_);
  std::string out;
  for (const auto& e : events_) {
    if (seq_from && e.seq < seq_from) continue;
    if (seq_to && e.seq > seq_to) continue;
    out += canonical_dump(e.to_json());
    out += '\n';
  }
  return out;
}

std::vector<Alert> AuditLog::run_anomaly_rules(
    const std::vector<AuditEvent>& window) const {
  std::vector<Alert> out;
  DedupState dedup;
  std::vector<AuditEvent> seen;
  seen.reserve(window.size());
  for (const auto& ev : window) {
    seen.push_back(ev);
    if (ev.type == AuditEventType::ALERT) continue;
    auto alerts = check_rules(seen, ev, dedup);
    out.insert(out.end(), alerts.begin(), alerts.end());
  }
  return out;
}

std::optional<std::size_t> AuditLog::verify_chain(
    const std::vector<AuditEvent>& events) {
  for (std::size_t i = 0; i < events.size(); ++i) {
    const AuditEvent& e = events[i];
    const std::string& expect_prev = i == 0 ? kZeroHash : events[i - 1].hash;
    if (e.prev_hash != expect_prev) return i;
    if (e.hash != sha256_hex(e.hash_input())) return i;
    if (i > 0 && e.seq != events[i - 1].seq + 1) return i;
  }
  return std::nullopt;
}

}  // namespace squatguard

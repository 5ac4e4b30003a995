#include "squatguard/credential_service.hpp"

#include <algorithm>

namespace squatguard {

namespace {
constexpr const char* kCredCollection = "credentials";
constexpr const char* kRevocations = "revocations";

std::string replace_placeholder(const std::string& placeholder,
                                const std::string& token) {
  auto open = placeholder.find("${");
  auto close = placeholder.find('}', open);
  return placeholder.substr(0, open) + token + placeholder.substr(close + 1);
}
}  // namespace

json CredentialDelivery::to_json() const {
  json j = json::object();
  j["mechanism"] = std::string(to_string(mechanism));
  if (header_name) j["header_name"] = *header_name;
  j["rendered_value"] = rendered_value;
  return j;
}

json EphemeralCredential::public_json() const {
  return json{{"credential_id", credential_id},
              {"subject", subject},
              {"audience", audience},
              {"scopes", scopes},
              {"issued_at", format_rfc3339(issued_at)},
              {"expires_at", format_rfc3339(expires_at)},
              {"token", token},
              {"delivery", delivery.to_json()}};
}

CredentialService::CredentialService(std::vector<std::uint8_t> hmac_key,
                                     IdGenerator& ids, int default_ttl_s,
                                     int max_ttl_s, StorageBackend* backend)
    : codec_(std::move(hmac_key)),
      ids_(ids),
      default_ttl_s_(default_ttl_s),
      max_ttl_s_(max_ttl_s),
      backend_(backend) {
  if (backend_) load_from_backend();
}

void CredentialService::load_from_backend() {
  for (const auto& [jti, v] : backend_->scan(kCredCollection)) {
    LiveEntry e;
    e.jti = jti;
    e.sub = v.at("sub").get<std::string>();
    e.aud = v.at("aud").get<std::string>();
    e.scopes = v.at("scopes").get<std::vector<std::string>>();
    e.iat = v.at("iat").get<std::int64_t>();
    e.exp = v.at("exp").get<std::int64_t>();
    live_[jti] = std::move(e);
  }
  if (auto r = backend_->get(kRevocations, "state")) {
    for (const auto& id : r->at("ids")) revoked_ids_.insert(id.get<std::string>());
    for (const auto& [k, v] : r->at("subjects").items())
      revoked_subjects_[k] = v.get<std::int64_t>();
    for (const auto& [k, v] : r->at("audiences").items())
      revoked_audiences_[k] = v.get<std::int64_t>();
  }
}

void CredentialService::persist_entry_locked(const LiveEntry& e) {
  if (!backend_) return;
  backend_->put(kCredCollection, e.jti,
                json{{"sub", e.sub},
                     {"aud", e.aud},
                     {"scopes", e.scopes},
                     {"iat", e.iat},
                     {"exp", e.exp}});
}

void CredentialService::persist_revocations_locked() {
  if (!backend_) return;
  json subjects = json::object();
  for (const auto& [k, v] : revoked_subjects_) subjects[k] = v;
  json audiences = json::object();
  for (const auto& [k, v] : revoked_audiences_) audiences[k] = v;
  backend_->put(kRevocations, "state",
                json{{"ids", std::vector<std::string>(revoked_ids_.begin(),
                                                      revoked_ids_.end())},
                     {"subjects", subjects},
                     {"audiences", audiences}});
}

EphemeralCredential CredentialService::issue(const std::string& agent_id,
                                             const ToolRecord& tool,
                                             std::vector<std::string> scopes,
                                             TimePoint now,
                                             std::optional<int> ttl_s) {
  int ttl = std::clamp(ttl_s.value_or(default_ttl_s_), 1, max_ttl_s_);

  TokenClaims claims;
  claims.jti = ids_.uuid4();
  claims.sub = agent_id;
  claims.aud = tool.tool_id;
  claims.scopes = scopes;
  claims.iat = to_epoch(now);
  claims.exp = claims.iat + ttl;

  EphemeralCredential cred;
  cred.credential_id = claims.jti;
  cred.subject = agent_id;
  cred.audience = tool.tool_id;
  cred.scopes = std::move(scopes);
  cred.issued_at = now;
  cred.expires_at = from_epoch(claims.exp);
  cred.token = codec_.encode(claims);
  cred.delivery.mechanism = tool.auth_config.mechanism;
  cred.delivery.header_name = tool.auth_config.header_name;
  cred.delivery.rendered_value =
      replace_placeholder(tool.auth_config.credential_placeholder, cred.token);

  std::lock_guard lk(mu_);
  LiveEntry e{claims.jti, claims.sub, claims.aud, claims.scopes, claims.iat,
              claims.exp};
  live_[claims.jti] = e;
  persist_entry_locked(e);
  return cred;
}

bool CredentialService::is_revoked_locked(const TokenClaims& c) const {
  if (revoked_ids_.count(c.jti)) return true;
  if (auto it = revoked_subjects_.find(c.sub);
      it != revoked_subjects_.end() && c.iat <= it->second)
    return true;
  if (auto it = revoked_audiences_.find(c.aud);
      it != revoked_audiences_.end() && c.iat <= it->second)
    return true;
  return false;
}

bool CredentialService::entry_revoked_locked(const LiveEntry& e) const {
  TokenClaims c;
  c.jti = e.jti;
  c.sub = e.sub;
  c.aud = e.aud;
  c.iat = e.iat;
  return is_revoked_locked(c);
}

CredentialVerifyResult CredentialService::verify(
    const std::string& token, const std::string& expected_audience,
    TimePoint now) const {
  CredentialVerifyResult r;
  auto d = codec_.verify(token, now);
  r.claims = d.claims;
  if (!d.valid) {
    r.failure = d.failure;
    return r;
  }
  std::lock_guard lk(mu_);
  if (is_revoked_locked(*d.claims)) {
    r.failure = TokenFailure::revoked;
    return r;
  }
  if (d.claims->aud != expected_audience) {
    r.failure = TokenFailure::wrong_audience;
    return r;
  }
  r.valid = true;
  return r;
}

bool CredentialService::revoke_token(const std::string& jti) {
  std::lock_guard lk(mu_);
  auto it = live_.find(jti);
  if (it == live_.end()) return false;
  if (entry_revoked_locked(it->second)) return false;
  revoked_ids_.insert(jti);
  persist_revocations_locked();
  return true;
}

std::vector<std::string> CredentialService::revoke_by_subject(
    const std::string& agent_id, TimePoint now) {
  std::lock_guard lk(mu_);
  std::vector<std::string> revoked;
  std::int64_t t = to_epoch(now);
  for (const auto& [jti, e] : live_) {
    if (e.sub != agent_id || e.exp <= t) continue;
    if (entry_revoked_locked(e)) continue;
    revoked_ids_.insert(jti);
    revoked.push_back(jti);
  }
  auto& ts = revoked_subjects_[agent_id];
  ts = std::max(ts, t);
  persist_revocations_locked();
  return revoked;
}

std::vector<std::string> CredentialService::revoke_by_audience(
    const std::string& tool_id, TimePoint now) {
  std::lock_guard lk(mu_);
  std::vector<std::string> revoked;
  std::int64_t t = to_epoch(now);
  for (const auto& [jti, e] : live_) {
    if (e.aud != tool_id || e.exp <= t) continue;
    if (entry_revoked_locked(e)) continue;
    revoked_ids_.insert(jti);
    revoked.push_back(jti);
  }
  auto& ts = revoked_audiences_[tool_id];
  ts = std::max(ts, t);
  persist_revocations_locked();
  return revoked;
}

std::size_t CredentialService::purge_expired(TimePoint now) {
  std::lock_guard lk(mu_);
  std::int64_t t = to_epoch(now);
  std::size_t purged = 0;
  for (auto it = live_.begin(); it != live_.end();) {
    if (it->second.exp <= t) {
      if (backend_) backend_->erase(kCredCollection, it->first);
      it = live_.erase(it);
      ++purged;
    } else {
      ++it;
    }
  }
  return purged;
}

bool CredentialService::has_live_credentials(const std::string& tool_id,
                                             TimePoint now) const {
  std::lock_guard lk(mu_);
  std::int64_t t = to_epoch(now);
  return std::any_of(live_.begin(), live_.end(), [&](const auto& kv) {
    const LiveEntry& e = kv.second;
    return e.aud == tool_id && e.exp > t && !entry_revoked_locked(e);
  });
}

std::size_t CredentialService::live_count(TimePoint now) const {
  std::lock_guard lk(mu_);
  std::int64_t t = to_epoch(now);
  return static_cast<std::size_t>(
      std::count_if(live_.begin(), live_.end(), [&](const auto& kv) {
        return kv.second.exp > t && !entry_revoked_locked(kv.second);
      }));
}

}  // namespace squatguard

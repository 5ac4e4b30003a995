#pragma once

#include <map>
#include <mutex>
#include <set>

#include "squatguard/ids.hpp"
#include "squatguard/records.hpp"
#include "squatguard/store.hpp"
#include "squatguard/token.hpp"

namespace squatguard {

// How the credential reaches the tool endpoint, rendered from the tool's
// auth_config at issue time.
struct CredentialDelivery {
  AuthMechanism mechanism = AuthMechanism::header;
  std::optional<std::string> header_name;
  std::string rendered_value;  // placeholder with the token substituted in

  json to_json() const;
};

struct EphemeralCredential {
  std::string credential_id;  // equals the token's jti
  std::string subject;
  std::string audience;
  std::vector<std::string> scopes;
  TimePoint issued_at{};
  TimePoint expires_at{};
  std::string token;  // returned once, never stored
  CredentialDelivery delivery;

  json public_json() const;
};

struct CredentialVerifyResult {
  bool valid = false;
  std::optional<TokenClaims> claims;
  std::optional<TokenFailure> failure;
};

// Issues short-lived, narrowly scoped tokens and tracks revocation. Only
// metadata is retained; the signed token itself leaves the service exactly
// once. Revocation sets are append-only: purging expired metadata never
// un-revokes anything.
class CredentialService {
 public:
  CredentialService(std::vector<std::uint8_t> hmac_key, IdGenerator& ids,
                    int default_ttl_s, int max_ttl_s,
                    StorageBackend* backend = nullptr);

  EphemeralCredential issue(const std::string& agent_id, const ToolRecord& tool,
                            std::vector<std::string> scopes, TimePoint now,
                            std::optional<int> ttl_s = std::nullopt);

  // Full check: signature, [iat, exp) window, revocation, then audience.
  CredentialVerifyResult verify(const std::string& token,
                                const std::string& expected_audience,
                                TimePoint now) const;

  // True if the jti was known and newly revoked; unknown or already revoked
  // tokens are a no-op.
  bool revoke_token(const std::string& jti);
  // Revoke every live credential for the subject/audience; tokens issued at or
  // before `now` stay dead even after reactivation. Returns revoked jtis.
  std::vector<std::string> revoke_by_subject(const std::string& agent_id,
                                             TimePoint now);
  std::vector<std::string> revoke_by_audience(const std::string& tool_id,
                                              TimePoint now);

  std::size_t purge_expired(TimePoint now);
  bool has_live_credentials(const std::string& tool_id, TimePoint now) const;
  std::size_t live_count(TimePoint now) const;

  const TokenCodec& codec() const { return codec_; }
  int default_ttl_s() const { return default_ttl_s_; }
  int max_ttl_s() const { return max_ttl_s_; }

 private:
  struct LiveEntry {
    std::string jti, sub, aud;
    std::vector<std::string> scopes;
    std::int64_t iat = 0, exp = 0;
  };

  bool is_revoked_locked(const TokenClaims& c) const;
  bool entry_revoked_locked(const LiveEntry& e) const;
  void persist_entry_locked(const LiveEntry& e);
  void persist_revocations_locked();
  void load_from_backend();

  TokenCodec codec_;
  IdGenerator& ids_;
  int default_ttl_s_;
  int max_ttl_s_;
  StorageBackend* backend_;

  mutable std::mutex mu_;
  std::map<std::string, LiveEntry> live_;
  std::set<std::string> revoked_ids_;
  std::map<std::string, std::int64_t> revoked_subjects_;   // id -> epoch
  std::map<std::string, std::int64_t> revoked_audiences_;  // id -> epoch
};

}  // namespace squatguard

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "squatguard/canonical.hpp"
#include "squatguard/time_utils.hpp"

namespace squatguard {

struct TokenClaims {
  std::string jti;
  std::string sub;  // agent_id
  std::string aud;  // tool_id
  std::vector<std::string> scopes;
  std::int64_t iat = 0;  // epoch seconds, validity is [iat, exp)
  std::int64_t exp = 0;

  json to_json() const;
  static std::optional<TokenClaims> from_json(const json& j);
};

enum class TokenFailure {
  malformed,
  bad_signature,
  expired,
  revoked,
  wrong_audience,
};
std::string_view token_failure_name(TokenFailure f);

// Compact three-part token: base64url(header).base64url(claims).base64url(mac),
// HMAC-SHA256 over "header.claims", no padding anywhere.
class TokenCodec {
 public:
  explicit TokenCodec(std::vector<std::uint8_t> hmac_key);

  std::string encode(const TokenClaims& claims) const;

  struct Decoded {
    bool valid = false;
    std::optional<TokenClaims> claims;
    std::optional<TokenFailure> failure;
  };
  // Signature and validity window only; audience and revocation checks belong
  // to the issuer's verify path.
  Decoded verify(const std::string& token, TimePoint now) const;
  // Claims without any verification (inspection/debugging only).
  static std::optional<TokenClaims> peek_claims(const std::string& token);

  const std::vector<std::uint8_t>& key() const { return key_; }

 private:
  std::vector<std::uint8_t> key_;
};

}  // namespace squatguard

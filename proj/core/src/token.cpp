#include "squatguard/token.hpp"

#include "squatguard/base64.hpp"
#include "squatguard/crypto.hpp"

namespace squatguard {

json TokenClaims::to_json() const {
  return json{{"jti", jti}, {"sub", sub},   {"aud", aud},
              {"scopes", scopes}, {"iat", iat}, {"exp", exp}};
}

std::optional<TokenClaims> TokenClaims::from_json(const json& j) {
  if (!j.is_object()) return std::nullopt;
  TokenClaims c;
  if (!j.contains("jti") || !j.at("jti").is_string()) return std::nullopt;
  c.jti = j.at("jti").get<std::string>();
  if (!j.contains("sub") || !j.at("sub").is_string()) return std::nullopt;
  c.sub = j.at("sub").get<std::string>();
  if (!j.contains("aud") || !j.at("aud").is_string()) return std::nullopt;
  c.aud = j.at("aud").get<std::string>();
  if (!j.contains("scopes") || !j.at("scopes").is_array()) return std::nullopt;
  for (const auto& s : j.at("scopes")) {
    if (!s.is_string()) return std::nullopt;
    c.scopes.push_back(s.get<std::string>());
  }
  if (!j.contains("iat") || !j.at("iat").is_number_integer())
    return std::nullopt;
  c.iat = j.at("iat").get<std::int64_t>();
  if (!j.contains("exp") || !j.at("exp").is_number_integer())
    return std::nullopt;
  c.exp = j.at("exp").get<std::int64_t>();
  return c;
}

std::string_view token_failure_name(TokenFailure f) {
  switch (f) {
    case TokenFailure::malformed: return "malformed";
    case TokenFailure::bad_signature: return "bad_signature";
    case TokenFailure::expired: return "expired";
    case TokenFailure::revoked: return "revoked";
    case TokenFailure::wrong_audience: return "wrong_audience";
  }
  return "malformed";
}

TokenCodec::TokenCodec(std::vector<std::uint8_t> hmac_key)
    : key_(std::move(hmac_key)) {}

namespace {
const json kHeader = json{{"alg", "HS256"}, {"typ", "JWT"}};
}

std::string TokenCodec::encode(const TokenClaims& claims) const {
  std::string h = base64url_encode(canonical_dump(kHeader));
  std::string c = base64url_encode(canonical_dump(claims.to_json()));
  std::string signing_input = h + "." + c;
  auto mac = hmac_sha256(key_, signing_input);
  return signing_input + "." + base64url_encode(mac.data(), mac.size());
}

TokenCodec::Decoded TokenCodec::verify(const std::string& token,
                                       TimePoint now) const {
  Decoded d;
  auto d1 = token.find('.');
  if (d1 == std::string::npos) {
    d.failure = TokenFailure::malformed;
    return d;
  }
  auto d2 = token.find('.', d1 + 1);
  if (d2 == std::string::npos || token.find('.', d2 + 1) != std::string::npos) {
    d.failure = TokenFailure::malformed;
    return d;
  }
  std::string signing_input = token.substr(0, d2);
  auto sig = base64url_decode(token.substr(d2 + 1));
  auto claims_raw = base64url_decode_string(token.substr(d1 + 1, d2 - d1 - 1));
  if (!sig || !claims_raw) {
    d.failure = TokenFailure::malformed;
    return d;
  }
  json cj = json::parse(*claims_raw, nullptr, false);
  auto claims = cj.is_discarded() ? std::nullopt : TokenClaims::from_json(cj);
  if (!claims) {
    d.failure = TokenFailure::malformed;
    return d;
  }

  auto mac = hmac_sha256(key_, signing_input);
  std::string expected(mac.begin(), mac.end());
  std::string got(sig->begin(), sig->end());
  if (!constant_time_equal(expected, got)) {
    d.failure = TokenFailure::bad_signature;
    return d;
  }

  d.claims = claims;
  std::int64_t t = to_epoch(now);
  if (t < claims->iat || t >= claims->exp) {
    d.failure = TokenFailure::expired;
    return d;
  }
  d.valid = true;
  return d;
}

std::optional<TokenClaims> TokenCodec::peek_claims(const std::string& token) {
  auto d1 = token.find('.');
  if (d1 == std::string::npos) return std::nullopt;
  auto d2 = token.find('.', d1 + 1);
  if (d2 == std::string::npos) return std::nullopt;
  auto claims_raw = base64url_decode_string(token.substr(d1 + 1, d2 - d1 - 1));
  if (!claims_raw) return std::nullopt;
  json cj = json::parse(*claims_raw, nullptr, false);
  if (cj.is_discarded()) return std::nullopt;
  return TokenClaims::from_json(cj);
}

}  // namespace squatguard

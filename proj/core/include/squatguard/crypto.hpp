#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace squatguard {

void ensure_sodium_init();

std::string to_hex(const std::uint8_t* data, std::size_t len);
std::array<std::uint8_t, 32> sha256(std::string_view data);
std::string sha256_hex(std::string_view data);
std::vector<std::uint8_t> secure_random_bytes(std::size_t n);
bool constant_time_equal(std::string_view a, std::string_view b);

// Ed25519 detached signatures. key_id is the first 8 hex chars of
// SHA-256 over the raw 32-byte public key.
struct Ed25519KeyPair {
  std::array<std::uint8_t, 32> public_key{};
  std::array<std::uint8_t, 64> secret_key{};

  static Ed25519KeyPair generate();
  static Ed25519KeyPair from_seed(const std::array<std::uint8_t, 32>& seed);
  std::array<std::uint8_t, 32> seed() const;
  std::string key_id() const;
};

std::string ed25519_key_id(const std::array<std::uint8_t, 32>& public_key);
// Returns the detached signature, base64 (standard, padded).
std::string ed25519_sign_b64(const Ed25519KeyPair& kp, std::string_view payload);
bool ed25519_verify_b64(const std::array<std::uint8_t, 32>& public_key,
                        std::string_view payload,
                        const std::string& signature_b64);

std::vector<std::uint8_t> hmac_sha256(const std::vector<std::uint8_t>& key,
                                      std::string_view msg);

}  // namespace squatguard

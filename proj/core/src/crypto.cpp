#include "squatguard/crypto.hpp"

#include <sodium.h>

#include <mutex>
#include <stdexcept>

#include "squatguard/base64.hpp"

namespace squatguard {

void ensure_sodium_init() {
  static std::once_flag once;
  std::call_once(once, [] {
    if (sodium_init() < 0) throw std::runtime_error("libsodium init failed");
  });
}

std::string to_hex(const std::uint8_t* data, std::size_t len) {
  std::string out(len * 2 + 1, '\0');
  sodium_bin2hex(out.data(), out.size(), data, len);
  out.resize(len * 2);
  return out;
}

std::array<std::uint8_t, 32> sha256(std::string_view data) {
  ensure_sodium_init();
  std::array<std::uint8_t, 32> out{};
  crypto_hash_sha256(out.data(),
                     reinterpret_cast<const unsigned char*>(data.data()),
                     data.size());
  return out;
}

std::string sha256_hex(std::string_view data) {
  auto h = sha256(data);
  return to_hex(h.data(), h.size());
}

std::vector<std::uint8_t> secure_random_bytes(std::size_t n) {
  ensure_sodium_init();
  std::vector<std::uint8_t> out(n);
  randombytes_buf(out.data(), out.size());
  return out;
}

bool constant_time_equal(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  if (a.empty()) return true;
  return sodium_memcmp(a.data(), b.data(), a.size()) == 0;
}

Ed25519KeyPair Ed25519KeyPair::generate() {
  ensure_sodium_init();
  Ed25519KeyPair kp;
  crypto_sign_keypair(kp.public_key.data(), kp.secret_key.data());
  return kp;
}

Ed25519KeyPair Ed25519KeyPair::from_seed(const std::array<std::uint8_t, 32>& seed) {
  ensure_sodium_init();
  Ed25519KeyPair kp;
  crypto_sign_seed_keypair(kp.public_key.data(), kp.secret_key.data(),
                           seed.data());
  return kp;
}

std::array<std::uint8_t, 32> Ed25519KeyPair::seed() const {
  std::array<std::uint8_t, 32> s{};
  crypto_sign_ed25519_sk_to_seed(s.data(), secret_key.data());
  return s;
}

std::string Ed25519KeyPair::key_id() const { return ed25519_key_id(public_key); }

std::string ed25519_key_id(const std::array<std::uint8_t, 32>& public_key) {
  auto h = sha256(std::string_view(
      reinterpret_cast<const char*>(public_key.data()), public_key.size()));
  return to_hex(h.data(), h.size()).substr(0, 8);
}

std::string ed25519_sign_b64(const Ed25519KeyPair& kp, std::string_view payload) {
  ensure_sodium_init();
  std::array<std::uint8_t, crypto_sign_BYTES> sig{};
  crypto_sign_detached(sig.data(), nullptr,
                       reinterpret_cast<const unsigned char*>(payload.data()),
                       payload.size(), kp.secret_key.data());
  return base64_encode(sig.data(), sig.size());
}

bool ed25519_verify_b64(const std::array<std::uint8_t, 32>& public_key,
                        std::string_view payload,
                        const std::string& signature_b64) {
  ensure_sodium_init();
  auto sig = base64_decode(signature_b64);
  if (!sig || sig->size() != crypto_sign_BYTES) return false;
  return crypto_sign_verify_detached(
             sig->data(), reinterpret_cast<const unsigned char*>(payload.data()),
             payload.size(), public_key.data()) == 0;
}

std::vector<std::uint8_t> hmac_sha256(const std::vector<std::uint8_t>& key,
                                      std::string_view msg) {
  ensure_sodium_init();
  std::vector<std::uint8_t> out(crypto_auth_hmacsha256_BYTES);
  crypto_auth_hmacsha256_state st;
  crypto_auth_hmacsha256_init(&st, key.data(), key.size());
  crypto_auth_hmacsha256_update(
      &st, reinterpret_cast<const unsigned char*>(msg.data()), msg.size());
  crypto_auth_hmacsha256_final(&st, out.data());
  return out;
}

}  // namespace squatguard

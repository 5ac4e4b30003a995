#include "squatguard/ids.hpp"

#include <array>
#include <cstdio>

#include "squatguard/base64.hpp"

namespace squatguard {

namespace {

std::uint64_t os_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

}  // namespace

IdGenerator::IdGenerator() : rng_(os_seed()) {}
IdGenerator::IdGenerator(std::uint64_t seed) : rng_(seed) {}

std::uint64_t IdGenerator::next_u64() { return rng_(); }

std::string IdGenerator::uuid4() {
  std::lock_guard lk(mu_);
  std::uint64_t hi = next_u64();
  std::uint64_t lo = next_u64();
  std::array<std::uint8_t, 16> b{};
  for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(hi >> (56 - 8 * i));
  for (int i = 0; i < 8; ++i)
    b[8 + i] = static_cast<std::uint8_t>(lo >> (56 - 8 * i));
  b[6] = static_cast<std::uint8_t>((b[6] & 0x0f) | 0x40);
  b[8] = static_cast<std::uint8_t>((b[8] & 0x3f) | 0x80);
  char buf[37];
  std::snprintf(buf, sizeof(buf),
                "%02x%02x%02x%02x-%02x%02x-%02x%02x-%02x%02x-"
                "%02x%02x%02x%02x%02x%02x",
                b[0], b[1], b[2], b[3], b[4], b[5], b[6], b[7], b[8], b[9],
                b[10], b[11], b[12], b[13], b[14], b[15]);
  return buf;
}

std::string IdGenerator::credential_token() {
  std::lock_guard lk(mu_);
  std::array<std::uint8_t, 32> b{};
  for (int i = 0; i < 4; ++i) {
    std::uint64_t w = next_u64();
    for (int j = 0; j < 8; ++j)
      b[i * 8 + j] = static_cast<std::uint8_t>(w >> (56 - 8 * j));
  }
  return base64url_encode(b.data(), b.size());
}

}  // namespace squatguard

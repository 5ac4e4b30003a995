#pragma once

#include <cstdint>
#include <mutex>
#include <optional>
#include <random>
#include <string>

namespace squatguard {

// ID source for agent ids (UUID v4) and registration credentials. Unseeded it
// draws from the OS; a seed makes the whole sequence reproducible, which the
// scenario harness relies on for deterministic replays.
class IdGenerator {
 public:
  IdGenerator();
  explicit IdGenerator(std::uint64_t seed);

  std::string uuid4();
  // 32 random bytes, base64url. Only a SHA-256 hash of this is ever stored.
  std::string credential_token();

 private:
  std::uint64_t next_u64();
  std::mutex mu_;
  std::mt19937_64 rng_;
};

}  // namespace squatguard

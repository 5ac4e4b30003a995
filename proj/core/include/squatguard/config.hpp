#pragma once

#include <string>
#include <vector>

#include "squatguard/audit_log.hpp"
#include "squatguard/canonical.hpp"
#include "squatguard/crypto.hpp"
#include "squatguard/trust_score.hpp"

namespace squatguard {

struct AdminCredential {
  std::string admin_id;
  std::string api_key;
};

// File config with SQUATGUARD_* environment overrides layered on top.
struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8787;
  bool dual_approval = true;
  int default_ttl_s = 300;
  int max_ttl_s = 3600;
  std::vector<AdminCredential> admins;
  std::string storage_path;  // empty selects the in-memory backend
  std::string key_file;      // empty generates ephemeral keys
  TrustWeights trust_weights;
  AnomalyConfig anomaly;

  static ServiceConfig from_json(const json& j);
  static ServiceConfig load_file(const std::string& path);
  // SQUATGUARD_HOST, SQUATGUARD_PORT, SQUATGUARD_DUAL_APPROVAL,
  // SQUATGUARD_DEFAULT_TTL_S, SQUATGUARD_MAX_TTL_S, SQUATGUARD_STORAGE_PATH,
  // SQUATGUARD_KEY_FILE.
  void apply_env_overrides();
  json to_json() const;
};

// Ed25519 signing pair plus the HMAC key for issued tokens. load_or_create
// persists them so record signatures survive restarts.
struct ServiceKeys {
  Ed25519KeyPair signing;
  std::vector<std::uint8_t> hmac_key;

  static ServiceKeys generate();
  static ServiceKeys load_or_create(const std::string& path);
  json to_json() const;
  static ServiceKeys from_json(const json& j);
};

}  // namespace squatguard

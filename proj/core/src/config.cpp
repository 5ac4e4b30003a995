#include "squatguard/config.hpp"

#include <cstdlib>
#include <fstream>

#include "squatguard/base64.hpp"
#include "squatguard/errors.hpp"

namespace squatguard {

ServiceConfig ServiceConfig::from_json(const json& j) {
  if (!j.is_object())
    throw ApiError(Errc::validation_error, "config must be a JSON object");
  ServiceConfig c;
  if (j.contains("host")) c.host = j.at("host").get<std::string>();
  if (j.contains("port")) c.port = j.at("port").get<int>();
  if (j.contains("dual_approval"))
    c.dual_approval = j.at("dual_approval").get<bool>();
  if (j.contains("default_ttl_s"))
    c.default_ttl_s = j.at("default_ttl_s").get<int>();
  if (j.contains("max_ttl_s")) c.max_ttl_s = j.at("max_ttl_s").get<int>();
  if (j.contains("storage_path"))
    c.storage_path = j.at("storage_path").get<std::string>();
  if (j.contains("key_file")) c.key_file = j.at("key_file").get<std::string>();
  if (j.contains("admins")) {
    for (const auto& a : j.at("admins")) {
      AdminCredential ac{a.at("admin_id").get<std::string>(),
                         a.at("api_key").get<std::string>()};
      if (ac.admin_id.empty() || ac.api_key.empty())
        throw ApiError(Errc::validation_error,
                       "admin entries need admin_id and api_key");
      c.admins.push_back(std::move(ac));
    }
  }
  if (j.contains("trust_weights")) {
    const json& w = j.at("trust_weights");
    auto get = [&](const char* k, double def) {
      return w.contains(k) ? w.at(k).get<double>() : def;
    };
    c.trust_weights.cvss_weight = get("cvss_weight", 2.0);
    c.trust_weights.vuln_penalty_cap = get("vuln_penalty_cap", 60.0);
    c.trust_weights.exploit_penalty_unit = get("exploit_penalty_unit", 15.0);
    c.trust_weights.exploit_penalty_cap = get("exploit_penalty_cap", 30.0);
    c.trust_weights.staleness_penalty_unit = get("staleness_penalty_unit", 5.0);
    c.trust_weights.staleness_penalty_cap = get("staleness_penalty_cap", 20.0);
  }
  if (j.contains("anomaly")) {
    const json& a = j.at("anomaly");
    auto get = [&](const char* k, int def) {
      return a.contains(k) ? a.at(k).get<int>() : def;
    };
    c.anomaly.repeated_denial_threshold = get("repeated_denial_threshold", 5);
    c.anomaly.repeated_denial_window_s = get("repeated_denial_window_s", 60);
    c.anomaly.discovery_flood_threshold = get("discovery_flood_threshold", 30);
    c.anomaly.discovery_flood_window_s = get("discovery_flood_window_s", 60);
    c.anomaly.alert_dedup_window_s = get("alert_dedup_window_s", 60);
    c.anomaly.scan_retention_s = get("scan_retention_s", 600);
  }
  if (c.default_ttl_s <= 0 || c.max_ttl_s <= 0 ||
      c.default_ttl_s > c.max_ttl_s)
    throw ApiError(Errc::validation_error,
                   "ttl settings must satisfy 0 < default <= max");
  if (c.port <= 0 || c.port > 65535)
    throw ApiError(Errc::validation_error, "port must be within [1, 65535]");
  return c;
}

ServiceConfig ServiceConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw ApiError(Errc::validation_error, "cannot read config file: " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded())
    throw ApiError(Errc::parse_error, "config file is not valid JSON: " + path);
  return from_json(j);
}

void ServiceConfig::apply_env_overrides() {
  auto env = [](const char* name) -> std::optional<std::string> {
    const char* v = std::getenv(name);
    if (!v || !*v) return std::nullopt;
    return std::string(v);
  };
  if (auto v = env("SQUATGUARD_HOST")) host = *v;
  if (auto v = env("SQUATGUARD_PORT")) port = std::stoi(*v);
  if (auto v = env("SQUATGUARD_DUAL_APPROVAL"))
    dual_approval = (*v == "1" || *v == "true");
  if (auto v = env("SQUATGUARD_DEFAULT_TTL_S")) default_ttl_s = std::stoi(*v);
  if (auto v = env("SQUATGUARD_MAX_TTL_S")) max_ttl_s = std::stoi(*v);
  if (auto v = env("SQUATGUARD_STORAGE_PATH")) storage_path = *v;
  if (auto v = env("SQUATGUARD_KEY_FILE")) key_file = *v;
}

json ServiceConfig::to_json() const {
  json admin_list = json::array();
  for (const auto& a : admins)
    admin_list.push_back(json{{"admin_id", a.admin_id}, {"api_key", a.api_key}});
  return json{
      {"host", host},
      {"port", port},
      {"dual_approval", dual_approval},
      {"default_ttl_s", default_ttl_s},
      {"max_ttl_s", max_ttl_s},
      {"storage_path", storage_path},
      {"key_file", key_file},
      {"admins", admin_list},
      {"trust_weights",
       json{{"cvss_weight", trust_weights.cvss_weight},
            {"vuln_penalty_cap", trust_weights.vuln_penalty_cap},
            {"exploit_penalty_unit", trust_weights.exploit_penalty_unit},
            {"exploit_penalty_cap", trust_weights.exploit_penalty_cap},
            {"staleness_penalty_unit", trust_weights.staleness_penalty_unit},
            {"staleness_penalty_cap", trust_weights.staleness_penalty_cap}}},
      {"anomaly",
       json{{"repeated_denial_threshold", anomaly.repeated_denial_threshold},
            {"repeated_denial_window_s", anomaly.repeated_denial_window_s},
            {"discovery_flood_threshold", anomaly.discovery_flood_threshold},
            {"discovery_flood_window_s", anomaly.discovery_flood_window_s},
            {"alert_dedup_window_s", anomaly.alert_dedup_window_s},
            {"scan_retention_s", anomaly.scan_retention_s}}}};
}

json ServiceKeys::to_json() const {
  auto seed = signing.seed();
  return json{{"signing_seed", base64_encode(seed.data(), seed.size())},
              {"hmac_key", base64_encode(hmac_key)}};
}

ServiceKeys ServiceKeys::from_json(const json& j) {
  ServiceKeys k;
  auto seed_bytes = base64_decode(j.at("signing_seed").get<std::string>());
  if (!seed_bytes || seed_bytes->size() != 32)
    throw ApiError(Errc::validation_error, "key file signing seed is invalid");
  std::array<std::uint8_t, 32> seed{};
  std::copy(seed_bytes->begin(), seed_bytes->end(), seed.begin());
  k.signing = Ed25519KeyPair::from_seed(seed);
  auto hmac = base64_decode(j.at("hmac_key").get<std::string>());
  if (!hmac || hmac->size() < 32)
    throw ApiError(Errc::validation_error, "key file hmac key is invalid");
  k.hmac_key = *hmac;
  return k;
}

ServiceKeys ServiceKeys::generate() {
  ServiceKeys k;
  k.signing = Ed25519KeyPair::generate();
  k.hmac_key = secure_random_bytes(32);
  return k;
}

ServiceKeys ServiceKeys::load_or_create(const std::string& path) {
  if (path.empty()) return generate();
  {
    std::ifstream in(path);
    if (in) {
      json j = json::parse(in, nullptr, false);
      if (j.is_discarded())
        throw ApiError(Errc::parse_error, "key file is not valid JSON: " + path);
      return from_json(j);
    }
  }
  ServiceKeys k = generate();
  std::ofstream out(path, std::ios::trunc);
  if (!out)
    throw ApiError(Errc::internal_error, "cannot write key file: " + path);
  out << k.to_json().dump(2) << '\n';
  return k;
}

}  // namespace squatguard

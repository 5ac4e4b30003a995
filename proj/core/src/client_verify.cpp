#include "squatguard/client_verify.hpp"

#include <httplib.h>

#include "squatguard/base64.hpp"
#include "squatguard/crypto.hpp"
#include "squatguard/http_client.hpp"

namespace squatguard {

VerificationResult verify_signed_record(
    const std::array<std::uint8_t, 32>& public_key, const json& record,
    const SignedRecord& signed_record) {
  VerificationResult r;
  if (!ed25519_verify_b64(public_key, signed_record.canonical_payload,
                          signed_record.signature)) {
    r.ok = false;
    r.issues.push_back({"signature_mismatch",
                        "registry signature does not verify for this record"});
    return r;
  }
  if (canonical_dump(record) != signed_record.canonical_payload) {
    r.ok = false;
    r.issues.push_back(
        {"payload_mismatch",
         "served record differs from the signed canonical payload"});
  }
  return r;
}

VerificationResult verify_live_description(const json& registry_record,
                                           const json& describe_response) {
  VerificationResult r;
  for (const char* field : {"tool_id", "name", "description", "version"}) {
    std::string registered =
        registry_record.contains(field) && registry_record.at(field).is_string()
            ? registry_record.at(field).get<std::string>()
            : "";
    std::string live =
        describe_response.contains(field) &&
                describe_response.at(field).is_string()
            ? describe_response.at(field).get<std::string>()
            : "";
    if (registered != live) {
      r.ok = false;
      r.issues.push_back(
          {"description_mismatch",
           std::string("live ") + field + " differs from the registry record"});
    }
  }
  return r;
}

namespace {

HttpResult tool_get(const std::string& endpoint, const std::string& path) {
  UrlParts parts = split_url(endpoint);
  httplib::Client cli(parts.host_origin);
  cli.set_connection_timeout(5);
  cli.set_read_timeout(10);
  HttpResult out;
  auto r = cli.Get(parts.path_prefix + path);
  if (!r) return out;
  out.transport_ok = true;
  out.status = r->status;
  out.raw = r->body;
  json parsed = json::parse(r->body, nullptr, false);
  if (!parsed.is_discarded()) out.body = parsed;
  return out;
}

}  // namespace

InvokeOutcome verified_invoke(const std::string& registry_url,
                              const std::string& agent_credential,
                              const std::string& tool_id,
                              const std::string& scope, const json& payload,
                              bool verify) {
  InvokeOutcome out;
  RegistryClient registry(registry_url, agent_credential);

  auto tool_res = registry.get("/tools/" + tool_id);
  if (!tool_res.transport_ok || tool_res.status != 200) {
    out.refused_by_client = true;
    out.issues.push_back({"registry_unavailable",
                          "could not fetch the tool record from the registry"});
    return out;
  }
  json record = tool_res.body.at("record");
  SignedRecord signed_record =
      signed_record_from_json(tool_res.body.at("signed"));

  if (verify) {
    auto key_res = registry.get("/registry/public-key");
    if (!key_res.transport_ok || key_res.status != 200) {
      out.refused_by_client = true;
      out.issues.push_back(
          {"registry_unavailable", "could not fetch the registry public key"});
      return out;
    }
    auto pk_bytes =
        base64_decode(key_res.body.at("public_key").get<std::string>());
    std::array<std::uint8_t, 32> pk{};
    if (!pk_bytes || pk_bytes->size() != 32) {
      out.refused_by_client = true;
      out.issues.push_back({"signature_mismatch", "registry key is malformed"});
      return out;
    }
    std::copy(pk_bytes->begin(), pk_bytes->end(), pk.begin());

    auto sig_check = verify_signed_record(pk, record, signed_record);
    if (!sig_check.ok) {
      out.refused_by_client = true;
      out.issues = sig_check.issues;
      for (const auto& issue : out.issues)
        registry.post("/detections", json{{"tool_id", tool_id},
                                          {"rule_id", issue.rule_id},
                                          {"message", issue.message}});
      return out;
    }

    auto describe =
        tool_get(record.at("api_endpoint").get<std::string>(), "/describe");
    if (!describe.transport_ok || describe.status != 200) {
      out.refused_by_client = true;
      out.issues.push_back(
          {"endpoint_unavailable", "tool endpoint /describe did not answer"});
      return out;
    }
    auto live_check = verify_live_description(record, describe.body);
    if (!live_check.ok) {
      out.refused_by_client = true;
      out.issues = live_check.issues;
      for (const auto& issue : out.issues)
        registry.post("/detections", json{{"tool_id", tool_id},
                                          {"rule_id", issue.rule_id},
                                          {"message", issue.message}});
      return out;
    }
  }

  auto access = registry.post("/access",
                              json{{"tool_id", tool_id}, {"scope", scope}});
  if (!access.transport_ok || access.status != 200) {
    out.denied_by_policy = true;
    out.decision_outcome = "DENY";
    out.decision_reason = access.transport_ok
                              ? "http_" + std::to_string(access.status)
                              : "transport_error";
    return out;
  }
  out.decision_outcome =
      access.body.at("decision").at("outcome").get<std::string>();
  out.decision_reason =
      access.body.at("decision").at("reason").get<std::string>();
  if (out.decision_outcome != "PERMIT") {
    out.denied_by_policy = true;
    return out;
  }

  const json& cred = access.body.at("credential");
  const json& delivery = cred.at("delivery");
  std::string rendered = delivery.at("rendered_value").get<std::string>();
  std::string mechanism = delivery.at("mechanism").get<std::string>();
  std::string endpoint = record.at("api_endpoint").get<std::string>();

  UrlParts parts = split_url(endpoint);
  httplib::Client cli(parts.host_origin);
  cli.set_connection_timeout(5);
  cli.set_read_timeout(10);
  httplib::Headers headers;
  std::string invoke_path = parts.path_prefix + "/invoke";
  if (mechanism == "header") {
    headers.emplace(delivery.at("header_name").get<std::string>(), rendered);
  } else if (mechanism == "bearer") {
    headers.emplace("Authorization", "Bearer " + rendered);
  } else {
    invoke_path += "?token=" + rendered;
  }
  auto r = cli.Post(invoke_path, headers, canonical_dump(payload),
                    "application/json");
  if (!r) {
    out.issues.push_back({"endpoint_unavailable", "tool invoke did not answer"});
    return out;
  }
  out.tool_status = r->status;
  json parsed = json::parse(r->body, nullptr, false);
  if (!parsed.is_discarded()) out.tool_response = parsed;
  out.invoked = r->status == 200;
  return out;
}

}  // namespace squatguard

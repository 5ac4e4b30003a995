#include "squatguard/http_server.hpp"

#include <httplib.h>

#include <sstream>

#include "squatguard/base64.hpp"

namespace squatguard {

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(canonical_dump(body), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code,
                const std::string& message) {
  send_json(res, status,
            json{{"error", json{{"code", std::string(code)},
                                {"message", message}}}});
}

void send_api_error(httplib::Response& res, const ApiError& e) {
  send_error(res, e.http_status(), errc_name(e.code()), e.what());
}

std::optional<json> parse_body(const httplib::Request& req,
                               httplib::Response& res) {
  json j = json::parse(req.body, nullptr, false);
  if (j.is_discarded()) {
    send_error(res, 400, "parse_error", "request body is not valid JSON");
    return std::nullopt;
  }
  return j;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

}  // namespace

HttpGateway::HttpGateway(RegistryService& service)
    : service_(service), server_(std::make_unique<httplib::Server>()) {
  setup_routes();
}

HttpGateway::~HttpGateway() { stop(); }

int HttpGateway::start(const std::string& host, int port) {
  host_ = host;
  if (port == 0) {
    port_ = server_->bind_to_any_port(host);
    if (port_ <= 0) throw ApiError(Errc::internal_error, "cannot bind " + host);
  } else {
    if (!server_->bind_to_port(host, port))
      throw ApiError(Errc::internal_error,
                     "cannot bind " + host + ":" + std::to_string(port));
    port_ = port;
  }
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

void HttpGateway::stop() {
  if (server_ && server_->is_running()) server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::string HttpGateway::base_url() const {
  return "http://" + host_ + ":" + std::to_string(port_);
}

void HttpGateway::setup_routes() {
  auto& svr = *server_;

  auto authenticate =
      [this](const httplib::Request& req) -> std::optional<CallerIdentity> {
    std::string h = req.get_header_value("Authorization");
    if (!h.starts_with("Bearer ")) return std::nullopt;
    return service_.authenticate(h.substr(7));
  };

  // Resolves the caller and enforces the route's role. Authenticated callers
  // with the wrong role get 403 and an audited denial.
  auto require = [this, authenticate](
                     const httplib::Request& req, httplib::Response& res,
                     CallerIdentity::Role role) -> std::optional<CallerIdentity> {
    auto caller = authenticate(req);
    if (!caller) {
      send_error(res, 401, "unauthorized", "missing or invalid credentials");
      return std::nullopt;
    }
    if (caller->role != role) {
      service_.record_role_denied(*caller, req.method + " " + req.path);
      send_error(res, 403, "forbidden", "route requires a different role");
      return std::nullopt;
    }
    return caller;
  };

  auto guard = [](httplib::Response& res, const std::function<void()>& fn) {
    try {
      fn();
    } catch (const ApiError& e) {
      send_api_error(res, e);
    } catch (const std::exception& e) {
      send_error(res, 500, "internal_error", e.what());
    }
  };

  svr.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, json{{"status", "ok"}});
  });

  svr.Get("/registry/public-key",
          [this](const httplib::Request&, httplib::Response& res) {
            auto pk = service_.public_key();
            send_json(res, 200,
                      json{{"public_key", base64_encode(pk.data(), pk.size())},
                           {"key_id", service_.key_id()},
                           {"algorithm", "ed25519"}});
          });

  // --- tools ---

  svr.Post("/tools", [this, require, guard](const httplib::Request& req,
                                            httplib::Response& res) {
    auto caller = require(req, res, CallerIdentity::Role::admin);
    if (!caller) return;
    auto body = parse_body(req, res);
    if (!body) return;
    guard(res, [&] {
      ToolRecord r = service_.register_tool(caller->id, *body);
      send_json(res, 201,
                json{{"record", tool_admin_json(r)},
                     {"signed",
                      signed_record_json(service_.sign_tool_record(r))}});
    });
  });

  svr.Get("/tools", [this, require, guard](const httplib::Request& req,
                                           httplib::Response& res) {
    auto caller = require(req, res, CallerIdentity::Role::agent);
    if (!caller) return;
    guard(res, [&] {
      AgentRecord agent = service_.get_agent(caller->id);
      DiscoveryFilters filters;
      if (req.has_param("tags")) filters.tags = split_csv(req.get_param_value("tags"));
      if (req.has_param("min_trust"))
        filters.min_trust = std::stoi(req.get_param_value("min_trust"));
      json tools = json::array();
      for (const auto& entry : service_.discover_tools(agent, filters))
        tools.push_back(entry.to_json());
      send_json(res, 200, json{{"tools", tools}});
    });
  });

  svr.Get(R"(/tools/([^/]+))", [this, authenticate, guard](
                                   const httplib::Request& req,
                                   httplib::Response& res) {
    auto caller = authenticate(req);
    if (!caller) {
      send_error(res, 401, "unauthorized", "missing or invalid credentials");
      return;
    }
    const std::string tool_id = req.matches[1];
    guard(res, [&] {
      if (caller->role == CallerIdentity::Role::admin) {
        ToolRecord r = service_.get_tool(tool_id);
        send_json(res, 200,
                  json{{"record", tool_admin_json(r)},
                       {"signed",
                        signed_record_json(service_.sign_tool_record(r))}});
      } else {
        AgentRecord agent = service_.get_agent(caller->id);
        DiscoveryEntry entry = service_.get_tool_for_agent(agent, tool_id);
        send_json(res, 200, entry.to_json());
      }
    });
  });

  svr.Put(R"(/tools/([^/]+))", [this, require, guard](
                                   const httplib::Request& req,
                                   httplib::Response& res) {
    auto caller = require(req, res, CallerIdentity::Role::admin);
    if (!caller) return;
    auto body = parse_body(req, res);
    if (!body) return;
    const std::string tool_id = req.matches[1];
    guard(res, [&] {
      ToolRecord r;
      if (body->contains("status")) {
        if (body->size() != 1)
          throw ApiError(Errc::validation_error,
                         "status changes cannot be combined with field updates");
        auto target = body->at("status").is_string()
                          ? parse_tool_status(body->at("status").get<std::string>())
                          : std::nullopt;
        if (!target)
          throw ApiError(Errc::validation_error,
                         "status must be ACTIVE or DEACTIVATED");
        r = service_.set_tool_status(caller->id, tool_id, *target);
      } else {
        r = service_.update_tool(caller->id, tool_id, *body);
      }
      send_json(res, 200,
                json{{"record", tool_admin_json(r)},
                     {"signed",
                      signed_record_json(service_.sign_tool_record(r))}});
    });
  });

  svr.Delete(R"(/tools/([^/]+))", [this, require, guard](
                                      const httplib::Request& req,
                                      httplib::Response& res) {
    auto caller = require(req, res, CallerIdentity::Role::admin);
    if (!caller) return;
    const std::string tool_id = req.matches[1];
    guard(res, [&] {
      ToolRecord r = service_.set_tool_status(caller->id, tool_id,
                                              ToolStatus::DEACTIVATED);
      send_json(res, 200, json{{"record", tool_admin_json(r)}});
    });
  });

  svr.Post(R"(/tools/([^/]+)/approve)", [this, require, guard](
                                            const httplib::Request& req,
                                            httplib::Response& res) {
    auto caller = require(req, res, CallerIdentity::Role::admin);
    if (!caller) return;
    const std::string tool_id = req.matches[1];
    guard(res, [&] {
      ToolRecord r = service_.approve_tool(caller->id, tool_id);
      send_json(res, 200,
                json{{"record", tool_admin_json(r)},
                     {"signed",
                      signed_record_json(service_.sign_tool_record(r))}});
    });
  });

  // --- agents ---

  svr.Post("/agents", [this, require, guard](const httplib::Request& req,
                                             httplib::Response& res) {
    auto caller = require(req, res, CallerIdentity::Role::admin);
    if (!caller) return;
    auto body = parse_body(req, res);
    if (!body) return;
    guard(res, [&] {
      auto [agent, credential] = service_.register_agent(caller->id, *body);
      send_json(res, 201,
                json{{"agent", agent_public_json(agent)},
                     {"credential", credential}});
    });
  });

  svr.Get("/agents", [this, require, guard](const httplib::Request& req,
                                            httplib::Response& res) {
    auto caller = require(req, res, CallerIdentity::Role::admin);
    if (!caller) return;
    guard(res, [&] {
      json agents = json::array();
      for (const auto& a : service_.list_agents())
        agents.push_back(agent_public_json(a));
      send_json(res, 200, json{{"agents", agents}});
    });
  });

  svr.Get(R"(/agents/([^/]+))", [this, require, guard](
                                    const httplib::Request& req,
                                    httplib::Response& res) {
    auto caller = require(req, res, CallerIdentity::Role::admin);
    if (!caller) return;
    const std::string agent_id = req.matches[1];
    guard(res, [&] {
      send_json(res, 200,
                json{{"agent", agent_public_json(service_.get_agent(agent_id))}});
    });
  });

  svr.Put(R"(/agents/([^/]+))", [this, require, guard](
                                    const httplib::Request& req,
                                    httplib::Response& res) {
    auto caller = require(req, res, CallerIdentity::Role::admin);
    if (!caller) return;
    auto body = parse_body(req, res);
    if (!body) return;
    const std::string agent_id = req.matches[1];
    guard(res, [&] {
      AgentRecord a;
      if (body->contains("status")) {
        if (body->size() != 1)
          throw ApiError(Errc::validation_error,
                         "status changes cannot be combined with field updates");
        auto target = body->at("status").is_string()
                          ? parse_agent_status(body->at("status").get<std::string>())
                          : std::nullopt;
        if (!target)
          throw ApiError(Errc::validation_error,
                         "status must be ACTIVE or DEACTIVATED");
        a = service_.set_agent_status(caller->id, agent_id, *target);
      } else {
        a = service_.update_agent(caller->id, agent_id, *body);
      }
      send_json(res, 200, json{{"agent", agent_public_json(a)}});
    });
  });

  svr.Delete(R"(/agents/([^/]+))", [this, require, guard](
                                       const httplib::Request& req,
                                       httplib::Response& res) {
    auto caller = require(req, res, CallerIdentity::Role::admin);
    if (!caller) return;
    const std::string agent_id = req.matches[1];
    guard(res, [&] {
      AgentRecord a = service_.set_agent_status(caller->id, agent_id,
                                                AgentStatus::DEACTIVATED);
      send_json(res, 200, json{{"agent", agent_public_json(a)}});
    });
  });

  // --- policies ---

  svr.Post("/policies", [this, require, guard](const httplib::Request& req,
                                               httplib::Response& res) {
    auto caller = require(req, res, CallerIdentity::Role::admin);
    if (!caller) return;
    auto body = parse_body(req, res);
    if (!body) return;
    guard(res, [&] {
      auto result = service_.upsert_policy(caller->id, *body);
      send_json(res, result.created ? 201 : 200,
                json{{"policy", policy_admin_json(result.policy)}});
    });
  });

  svr.Put(R"(/policies/([^/]+))", [this, require, guard](
                                      const httplib::Request& req,
                                      httplib::Response& res) {
    auto caller = require(req, res, CallerIdentity::Role::admin);
    if (!caller) return;
    auto body = parse_body(req, res);
    if (!body) return;
    const std::string policy_id = req.matches[1];
    guard(res, [&] {
      if (body->contains("policy_id") &&
          body->at("policy_id").get<std::string>() != policy_id)
        throw ApiError(Errc::validation_error,
                       "policy_id in body must match the path");
      json merged = *body;
      merged["policy_id"] = policy_id;
      auto result = service_.upsert_policy(caller->id, merged);
      send_json(res, result.created ? 201 : 200,
                json{{"policy", policy_admin_json(result.policy)}});
    });
  });

  svr.Get("/policies", [this, require, guard](const httplib::Request& req,
                                              httplib::Response& res) {
    auto caller = require(req, res, CallerIdentity::Role::admin);
    if (!caller) return;
    guard(res, [&] {
      json policies = json::array();
      for (const auto& p : service_.list_policies())
        policies.push_back(policy_admin_json(p));
      send_json(res, 200, json{{"policies", policies}});
    });
  });

  svr.Delete(R"(/policies/([^/]+))", [this, require, guard](
                                         const httplib::Request& req,
                                         httplib::Response& res) {
    auto caller = require(req, res, CallerIdentity::Role::admin);
    if (!caller) return;
    const std::string policy_id = req.matches[1];
    guard(res, [&] {
      AccessPolicy p = service_.deactivate_policy(caller->id, policy_id);
      send_json(res, 200, json{{"policy", policy_admin_json(p)}});
    });
  });

  // --- access + credentials ---

  svr.Post("/access", [this, require, guard](const httplib::Request& req,
                                             httplib::Response& res) {
    auto caller = require(req, res, CallerIdentity::Role::agent);
    if (!caller) return;
    auto body = parse_body(req, res);
    if (!body) return;
    guard(res, [&] {
      if (!body->contains("tool_id") || !body->at("tool_id").is_string() ||
          !body->contains("scope") || !body->at("scope").is_string())
        throw ApiError(Errc::validation_error,
                       "access request needs tool_id and scope strings");
      AgentRecord agent = service_.get_agent(caller->id);
      AccessResponse r = service_.request_access(
          agent, body->at("tool_id").get<std::string>(),
          body->at("scope").get<std::string>());
      send_json(res, 200, r.to_json());
    });
  });

  svr.Post("/credentials/revoke", [this, require, guard](
                                      const httplib::Request& req,
                                      httplib::Response& res) {
    auto caller = require(req, res, CallerIdentity::Role::admin);
    if (!caller) return;
    auto body = parse_body(req, res);
    if (!body) return;
    guard(res, [&] {
      std::size_t n = service_.admin_revoke(caller->id, *body);
      send_json(res, 200, json{{"revoked", n}});
    });
  });

  svr.Post("/credentials/verify", [this, authenticate, guard](
                                      const httplib::Request& req,
                                      httplib::Response& res) {
    auto caller = authenticate(req);
    if (!caller) {
      send_error(res, 401, "unauthorized", "missing or invalid credentials");
      return;
    }
    auto body = parse_body(req, res);
    if (!body) return;
    guard(res, [&] {
      if (!body->contains("token") || !body->at("token").is_string() ||
          !body->contains("audience") || !body->at("audience").is_string())
        throw ApiError(Errc::validation_error,
                       "verification needs token and audience strings");
      auto r = service_.verify_credential(body->at("token").get<std::string>(),
                                          body->at("audience").get<std::string>());
      json out = json{{"valid", r.valid}};
      out["failure"] =
          r.failure ? json(std::string(token_failure_name(*r.failure)))
                    : json(nullptr);
      if (r.claims) out["claims"] = r.claims->to_json();
      send_json(res, 200, out);
    });
  });

  // Client-side verification failures report back here so squatting attempts
  // surface in the trail even when the registry itself was not compromised.
  svr.Post("/detections", [this, require, guard](const httplib::Request& req,
                                                 httplib::Response& res) {
    auto caller = require(req, res, CallerIdentity::Role::agent);
    if (!caller) return;
    auto body = parse_body(req, res);
    if (!body) return;
    guard(res, [&] {
      if (!body->contains("tool_id") || !body->at("tool_id").is_string() ||
          !body->contains("rule_id") || !body->at("rule_id").is_string() ||
          !body->contains("message") || !body->at("message").is_string())
        throw ApiError(Errc::validation_error,
                       "detection needs tool_id, rule_id, and message strings");
      service_.record_client_detection(body->at("tool_id").get<std::string>(),
                                       body->at("rule_id").get<std::string>(),
                                       body->at("message").get<std::string>());
      send_json(res, 200, json{{"recorded", true}});
    });
  });

  // --- trust feed ---

  svr.Post("/feed", [this, require, guard](const httplib::Request& req,
                                           httplib::Response& res) {
    auto caller = require(req, res, CallerIdentity::Role::admin);
    if (!caller) return;
    guard(res, [&] {
      FeedLoadResult r = service_.load_feed(caller->id, req.body);
      json reports = json::array();
      for (const auto& rep : r.reports) reports.push_back(rep.to_json());
      send_json(res, 200,
                json{{"feed_timestamp", format_rfc3339(r.feed.feed_timestamp)},
                     {"entries", r.feed.entries.size()},
                     {"reports", reports}});
    });
  });

  // --- monitor ---

  svr.Get("/monitor/events", [this, require, guard](const httplib::Request& req,
                                                    httplib::Response& res) {
    auto caller = require(req, res, CallerIdentity::Role::admin);
    if (!caller) return;
    guard(res, [&] {
      AuditLog::EventFilter f;
      if (req.has_param("since"))
        f.seq_from = std::stoull(req.get_param_value("since"));
      if (req.has_param("until"))
        f.seq_to = std::stoull(req.get_param_value("until"));
      if (req.has_param("type")) {
        auto t = parse_audit_event_type(req.get_param_value("type"));
        if (!t)
          throw ApiError(Errc::validation_error, "unknown event type filter");
        f.type = t;
      }
      if (req.has_param("agent_id")) f.agent_id = req.get_param_value("agent_id");
      if (req.has_param("tool_id")) f.tool_id = req.get_param_value("tool_id");
      if (req.has_param("limit"))
        f.limit = std::stoull(req.get_param_value("limit"));
      json events = json::array();
      for (const auto& e : service_.query_events(f)) events.push_back(e.to_json());
      send_json(res, 200,
                json{{"events", events}, {"last_seq", service_.audit().last_seq()}});
    });
  });

  svr.Get("/monitor/export", [this, require, guard](const httplib::Request& req,
                                                    httplib::Response& res) {
    auto caller = require(req, res, CallerIdentity::Role::admin);
    if (!caller) return;
    guard(res, [&] {
      std::uint64_t from = req.has_param("from")
                               ? std::stoull(req.get_param_value("from"))
                               : 0;
      std::uint64_t to =
          req.has_param("to") ? std::stoull(req.get_param_value("to")) : 0;
      res.status = 200;
      res.set_content(service_.export_events_jsonl(from, to),
                      "application/x-ndjson");
    });
  });
}

}  // namespace squatguard

#include <cstdlib>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "squatguard/canonical.hpp"
#include "squatguard/client_verify.hpp"
#include "squatguard/http_client.hpp"

namespace sg = squatguard;

namespace {

// Exit contract: 0 on 2xx, 1 on an HTTP error or a client-side verification
// refusal, 2 on transport failure, 64 on usage errors.
constexpr int kOk = 0;
constexpr int kHttpError = 1;
constexpr int kTransportError = 2;
constexpr int kUsage = 64;

volatile std::sig_atomic_t g_stop = 0;
void handle_signal(int) { g_stop = 1; }

struct Ctx {
  std::string registry;
  std::string credential;
  std::string output = "table";  // json | table
  std::string persona;           // admin | agent | "" (unknown)
  std::string profile;
  std::string profiles_file;
};

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : fallback;
}

// Profile file: {"<name>": {"registry", "credential", "persona", "output"}}.
// Explicit flags and SQUATGUARD_* variables win over profile values.
bool apply_profile(Ctx& ctx, std::string& err) {
  if (ctx.profile.empty()) return true;
  std::string path = ctx.profiles_file;
  if (path.empty()) path = env_or("SQUATGUARD_PROFILES", "");
  if (path.empty()) path = env_or("HOME", ".") + "/.squatguard/profiles.json";
  std::ifstream in(path);
  if (!in) {
    err = "cannot open profiles file: " + path;
    return false;
  }
  sg::json all = sg::json::parse(in, nullptr, false);
  if (all.is_discarded() || !all.is_object() || !all.contains(ctx.profile)) {
    err = "profile not found: " + ctx.profile;
    return false;
  }
  const sg::json& p = all.at(ctx.profile);
  if (ctx.registry.empty()) ctx.registry = p.value("registry", "");
  if (ctx.credential.empty()) ctx.credential = p.value("credential", "");
  if (ctx.persona.empty()) ctx.persona = p.value("persona", "");
  if (p.contains("output") && ctx.output == "table")
    ctx.output = p.value("output", "table");
  return true;
}

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Client-side persona gate; the server still enforces roles regardless.
int persona_reject(const std::string& command, const std::string& needed) {
  std::cerr << "usage error: '" << command << "' needs the " << needed
            << " persona (active profile says otherwise)\n";
  return kUsage;
}

bool persona_allows(const Ctx& ctx, const std::string& needed) {
  return ctx.persona.empty() || ctx.persona == needed;
}

void print_error(const sg::HttpResult& r) {
  if (r.body.is_object() && r.body.contains("error"))
    std::cerr << "error " << r.status << ": "
              << r.body.at("error").value("code", "") << " "
              << r.body.at("error").value("message", "") << "\n";
  else
    std::cerr << "error " << r.status << "\n";
}

// json output is the server body verbatim so scripts can pipe it.
int finish(const Ctx& ctx, const sg::HttpResult& r,
           const std::function<void(const sg::json&)>& render_table) {
  if (!r.transport_ok) {
    std::cerr << "transport error: registry unreachable\n";
    return kTransportError;
  }
  if (ctx.output == "json") {
    std::cout << r.raw;
    return r.status < 400 ? kOk : kHttpError;
  }
  if (r.status >= 400) {
    print_error(r);
    return kHttpError;
  }
  if (render_table && r.body.is_object()) render_table(r.body);
  return kOk;
}

sg::RegistryClient client(const Ctx& ctx) {
  return sg::RegistryClient(ctx.registry, ctx.credential);
}

int post_file(const Ctx& ctx, const std::string& path, const std::string& route,
              const std::function<void(const sg::json&)>& render_table) {
  auto bytes = read_file(path);
  if (!bytes) {
    std::cerr << "usage error: cannot read file: " << path << "\n";
    return kUsage;
  }
  auto r = client(ctx).post_raw(route, *bytes, "application/json");
  return finish(ctx, r, render_table);
}

int run_monitor_tail(const Ctx& ctx, std::uint64_t from, bool once,
                     int interval_ms) {
  if (!persona_allows(ctx, "admin"))
    return persona_reject("monitor tail", "admin");
  std::signal(SIGINT, handle_signal);
  std::uint64_t cursor = from;
  while (true) {
    auto r = client(ctx).get("/monitor/events?since=" + std::to_string(cursor));
    if (!r.transport_ok) {
      std::cerr << "transport error: registry unreachable\n";
      return kTransportError;
    }
    if (r.status >= 400) {
      print_error(r);
      return kHttpError;
    }
    for (const auto& e : r.body.value("events", sg::json::array())) {
      std::cout << e.dump() << "\n";
      cursor = e.at("seq").get<std::uint64_t>() + 1;
    }
    std::cout.flush();
    if (once || g_stop) return kOk;
    std::this_thread::sleep_for(std::chrono::milliseconds(interval_ms));
    if (g_stop) return kOk;
  }
}

int run_invoke(const Ctx& ctx, const std::string& tool_id,
               const std::string& scope, const std::string& payload_file,
               bool no_verify) {
  if (!persona_allows(ctx, "agent")) return persona_reject("invoke", "agent");
  sg::json payload = sg::json::object();
  if (!payload_file.empty()) {
    auto bytes = read_file(payload_file);
    if (!bytes) {
      std::cerr << "usage error: cannot read file: " << payload_file << "\n";
      return kUsage;
    }
    payload = sg::json::parse(*bytes, nullptr, false);
    if (payload.is_discarded()) {
      std::cerr << "usage error: payload file is not JSON\n";
      return kUsage;
    }
  }

  sg::InvokeOutcome out = sg::verified_invoke(ctx.registry, ctx.credential,
                                              tool_id, scope, payload,
                                              !no_verify);
  sg::json issues = sg::json::array();
  for (const auto& i : out.issues)
    issues.push_back({{"rule_id", i.rule_id}, {"message", i.message}});
  sg::json rendered{{"invoked", out.invoked},
                    {"refused_by_client", out.refused_by_client},
                    {"denied_by_policy", out.denied_by_policy},
                    {"decision_outcome", out.decision_outcome},
                    {"decision_reason", out.decision_reason},
                    {"issues", issues},
                    {"tool_status", out.tool_status},
                    {"tool_response", out.tool_response}};
  if (ctx.output == "json") {
    std::cout << rendered.dump(2) << "\n";
  } else if (out.invoked) {
    std::cout << "invoked " << tool_id << " (tool status " << out.tool_status
              << ")\n";
  } else if (out.refused_by_client) {
    std::cerr << "refused before invocation:\n";
    for (const auto& i : out.issues)
      std::cerr << "  " << i.rule_id << ": " << i.message << "\n";
  } else if (out.denied_by_policy) {
    std::cerr << "access denied: " << out.decision_outcome << " "
              << out.decision_reason << "\n";
  } else {
    std::cerr << "invocation failed (tool status " << out.tool_status << ")\n";
  }
  if (out.invoked) return kOk;
  if (out.decision_reason == "transport_error" ||
      (!out.issues.empty() &&
       out.issues.front().rule_id == "registry_unavailable"))
    return kTransportError;
  return kHttpError;
}

int run_access_request(const Ctx& ctx, const std::string& tool_id,
                       const std::string& scope, int ttl,
                       const std::string& save_token) {
  if (!persona_allows(ctx, "agent"))
    return persona_reject("access request", "agent");
  sg::json body{{"tool_id", tool_id}, {"scope", scope}};
  if (ttl > 0) body["ttl_s"] = ttl;
  auto r = client(ctx).post("/access", body);
  int rc = finish(ctx, r, [](const sg::json& b) {
    const sg::json& d = b.at("decision");
    std::cout << "decision: " << d.value("outcome", "") << " ("
              << d.value("reason", "") << ")\n";
    if (!b.value("credential", sg::json()).is_null())
      std::cout << "token expires_at: "
                << b.at("credential").value("expires_at", "") << "\n";
  });
  // Tokens only touch disk on explicit request.
  if (rc == kOk && !save_token.empty() && r.body.is_object() &&
      !r.body.value("credential", sg::json()).is_null()) {
    std::ofstream out(save_token, std::ios::binary | std::ios::trunc);
    out << r.body.at("credential").value("token", "");
    if (!out) {
      std::cerr << "error: could not write token file: " << save_token << "\n";
      return kHttpError;
    }
  }
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"squatguard registry client"};
  app.require_subcommand(1);

  Ctx ctx;
  std::string file, tool_id, agent_id, policy_id, scope = "execute";
  std::string save_token, payload_file;
  int min_trust = -1, ttl = 0, interval_ms = 1000;
  std::uint64_t from_seq = 1;
  bool once = false, no_verify = false;
  std::string tags;

  app.add_option("--registry", ctx.registry, "registry base URL");
  app.add_option("--credential", ctx.credential,
                 "bearer credential (or SQUATGUARD_CREDENTIAL)");
  app.add_option("--profile", ctx.profile, "named profile to load");
  app.add_option("--profiles-file", ctx.profiles_file,
                 "profile store (default ~/.squatguard/profiles.json)");
  app.add_option("--output", ctx.output, "json or table")
      ->check(CLI::IsMember({"json", "table"}));

  // Callbacks run mid-parse, before env and profile resolution, so they only
  // queue the action; main runs it once the context is complete.
  std::function<int()> action;

  CLI::App* tool = app.add_subcommand("tool", "tool registry operations");
  tool->require_subcommand(1);
  CLI::App* tool_register = tool->add_subcommand("register", "register a tool");
  tool_register->add_option("--file", file, "registration JSON")->required();
  tool_register->callback([&] {
    action = [&] {
      if (!persona_allows(ctx, "admin"))
        return persona_reject("tool register", "admin");
      return post_file(ctx, file, "/tools", [](const sg::json& b) {
        std::cout << b.at("record").value("tool_id", "") << " "
                  << b.at("record").value("status", "") << "\n";
      });
    };
  });
  CLI::App* tool_list = tool->add_subcommand("list", "discover tools");
  tool_list->add_option("--min-trust", min_trust, "minimum trust score");
  tool_list->add_option("--tags", tags, "comma-separated tag filter");
  tool_list->callback([&] {
    action = [&] {
      if (!persona_allows(ctx, "agent"))
        return persona_reject("tool list", "agent");
      std::string q;
      if (min_trust >= 0) q += "min_trust=" + std::to_string(min_trust);
      if (!tags.empty()) q += (q.empty() ? "" : "&") + ("tags=" + tags);
      auto r = client(ctx).get("/tools" + (q.empty() ? "" : "?" + q));
      return finish(ctx, r, [](const sg::json& b) {
        for (const auto& e : b.value("tools", sg::json::array())) {
          const sg::json& rec = e.at("record");
          std::cout << rec.value("tool_id", "")
                    << "  trust=" << rec.value("trust_score", 0) << "  "
                    << rec.value("name", "") << "\n";
        }
      });
    };
  });
  CLI::App* tool_approve =
      tool->add_subcommand("approve", "approve a pending tool");
  tool_approve->add_option("--tool", tool_id, "tool id")->required();
  tool_approve->callback([&] {
    action = [&] {
      if (!persona_allows(ctx, "admin"))
        return persona_reject("tool approve", "admin");
      auto r = client(ctx).post("/tools/" + tool_id + "/approve",
                                sg::json::object());
      return finish(ctx, r, [](const sg::json& b) {
        std::cout << b.at("record").value("tool_id", "") << " "
                  << b.at("record").value("status", "") << "\n";
      });
    };
  });
  CLI::App* tool_deactivate =
      tool->add_subcommand("deactivate", "deactivate a tool");
  tool_deactivate->add_option("--tool", tool_id, "tool id")->required();
  tool_deactivate->callback([&] {
    action = [&] {
      if (!persona_allows(ctx, "admin"))
        return persona_reject("tool deactivate", "admin");
      auto r = client(ctx).del("/tools/" + tool_id);
      return finish(ctx, r, [](const sg::json& b) {
        std::cout << b.at("record").value("tool_id", "") << " "
                  << b.at("record").value("status", "") << "\n";
      });
    };
  });

  CLI::App* agent = app.add_subcommand("agent", "agent registry operations");
  agent->require_subcommand(1);
  CLI::App* agent_register =
      agent->add_subcommand("register", "register an agent");
  agent_register->add_option("--file", file, "registration JSON")->required();
  agent_register->callback([&] {
    action = [&] {
      if (!persona_allows(ctx, "admin"))
        return persona_reject("agent register", "admin");
      return post_file(ctx, file, "/agents", [](const sg::json& b) {
        std::cout << b.at("agent").value("agent_id", "") << "\n";
        std::cout << "credential: " << b.value("credential", "") << "\n";
      });
    };
  });
  CLI::App* agent_deactivate =
      agent->add_subcommand("deactivate", "deactivate an agent");
  agent_deactivate->add_option("--agent", agent_id, "agent id")->required();
  agent_deactivate->callback([&] {
    action = [&] {
      if (!persona_allows(ctx, "admin"))
        return persona_reject("agent deactivate", "admin");
      auto r = client(ctx).del("/agents/" + agent_id);
      return finish(ctx, r, [](const sg::json& b) {
        std::cout << b.at("agent").value("agent_id", "") << " "
                  << b.at("agent").value("status", "") << "\n";
      });
    };
  });

  CLI::App* policy = app.add_subcommand("policy", "access policy operations");
  policy->require_subcommand(1);
  CLI::App* policy_upsert =
      policy->add_subcommand("upsert", "create or replace a policy");
  policy_upsert->add_option("--file", file, "policy JSON")->required();
  policy_upsert->callback([&] {
    action = [&] {
      if (!persona_allows(ctx, "admin"))
        return persona_reject("policy upsert", "admin");
      return post_file(ctx, file, "/policies", [](const sg::json& b) {
        std::cout << b.at("policy").value("policy_id", "") << "\n";
      });
    };
  });
  CLI::App* policy_list = policy->add_subcommand("list", "list policies");
  policy_list->callback([&] {
    action = [&] {
      if (!persona_allows(ctx, "admin"))
        return persona_reject("policy list", "admin");
      auto r = client(ctx).get("/policies");
      return finish(ctx, r, [](const sg::json& b) {
        for (const auto& p : b.value("policies", sg::json::array()))
          std::cout << p.value("policy_id", "")
                    << "  tool=" << p.value("tool_id", "") << "  active="
                    << (p.value("is_active", false) ? "true" : "false") << "\n";
      });
    };
  });
  CLI::App* policy_deactivate =
      policy->add_subcommand("deactivate", "deactivate a policy");
  policy_deactivate->add_option("--policy", policy_id, "policy id")->required();
  policy_deactivate->callback([&] {
    action = [&] {
      if (!persona_allows(ctx, "admin"))
        return persona_reject("policy deactivate", "admin");
      auto r = client(ctx).del("/policies/" + policy_id);
      return finish(ctx, r, [](const sg::json& b) {
        std::cout << b.at("policy").value("policy_id", "") << " deactivated\n";
      });
    };
  });

  CLI::App* feed = app.add_subcommand("feed", "vulnerability feed operations");
  feed->require_subcommand(1);
  CLI::App* feed_load =
      feed->add_subcommand("load", "load a vulnerability feed");
  feed_load->add_option("--file", file, "feed JSON")->required();
  feed_load->callback([&] {
    action = [&] {
      if (!persona_allows(ctx, "admin"))
        return persona_reject("feed load", "admin");
      return post_file(ctx, file, "/feed", [](const sg::json& b) {
        for (const auto& rep : b.value("reports", sg::json::array()))
          std::cout << rep.value("tool_id", "")
                    << "  trust=" << rep.value("score", 0) << "\n";
      });
    };
  });

  CLI::App* access = app.add_subcommand("access", "access decisions");
  access->require_subcommand(1);
  CLI::App* access_request =
      access->add_subcommand("request", "request tool access");
  access_request->add_option("--tool", tool_id, "tool id")->required();
  access_request->add_option("--scope", scope, "scope (default execute)");
  access_request->add_option("--ttl", ttl, "credential ttl seconds");
  access_request->add_option("--save-token", save_token,
                             "write the raw token to this file");
  access_request->callback([&] {
    action = [&] {
      return run_access_request(ctx, tool_id, scope, ttl, save_token);
    };
  });

  CLI::App* invoke =
      app.add_subcommand("invoke", "verified end-to-end tool call");
  invoke->add_option("--tool", tool_id, "tool id")->required();
  invoke->add_option("--scope", scope, "scope (default execute)");
  invoke->add_option("--file", payload_file, "JSON payload file");
  invoke->add_flag("--no-verify", no_verify,
                   "skip signature and description verification");
  invoke->callback([&] {
    action = [&] {
      return run_invoke(ctx, tool_id, scope, payload_file, no_verify);
    };
  });

  CLI::App* monitor = app.add_subcommand("monitor", "audit trail access");
  monitor->require_subcommand(1);
  CLI::App* monitor_tail =
      monitor->add_subcommand("tail", "follow audit events");
  monitor_tail->add_option("--from", from_seq, "start sequence (default 1)");
  monitor_tail->add_flag("--once", once, "print one batch and exit");
  monitor_tail->add_option("--interval-ms", interval_ms, "poll interval");
  monitor_tail->callback([&] {
    action = [&] { return run_monitor_tail(ctx, from_seq, once, interval_ms); };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  if (ctx.registry.empty()) ctx.registry = env_or("SQUATGUARD_REGISTRY", "");
  if (ctx.credential.empty())
    ctx.credential = env_or("SQUATGUARD_CREDENTIAL", "");
  std::string err;
  if (!apply_profile(ctx, err)) {
    std::cerr << "usage error: " << err << "\n";
    return kUsage;
  }
  if (!action) {
    std::cerr << "usage error: no command\n";
    return kUsage;
  }
  if (ctx.registry.empty()) {
    std::cerr << "usage error: no registry URL (use --registry, "
                 "SQUATGUARD_REGISTRY, or a profile)\n";
    return kUsage;
  }
  return action();
}

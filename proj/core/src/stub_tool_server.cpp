#include "squatguard/stub_tool_server.hpp"

#include <httplib.h>

#include "squatguard/errors.hpp"

namespace squatguard {

StubToolServer::StubToolServer(Options opts)
    : opts_(std::move(opts)), server_(std::make_unique<httplib::Server>()) {
  server_->Get("/describe", [this](const httplib::Request&,
                                   httplib::Response& res) {
    json descriptor;
    {
      std::lock_guard lk(mu_);
      descriptor = opts_.descriptor;
    }
    res.status = 200;
    res.set_content(canonical_dump(descriptor), "application/json");
  });

  server_->Post("/invoke", [this](const httplib::Request& req,
                                  httplib::Response& res) {
    std::string token;
    if (opts_.mechanism == AuthMechanism::header && opts_.header_name) {
      token = req.get_header_value(*opts_.header_name);
    } else if (opts_.mechanism == AuthMechanism::bearer) {
      std::string h = req.get_header_value("Authorization");
      if (h.starts_with("Bearer ")) token = h.substr(7);
    } else {
      token = req.get_param_value("token");
    }

    if (token.empty() || !opts_.verifier || !opts_.verifier(token)) {
      rejected_.fetch_add(1);
      res.status = 401;
      res.set_content(
          canonical_dump(json{{"error", json{{"code", "unauthorized"},
                                             {"message",
                                              "credential rejected"}}}}),
          "application/json");
      return;
    }
    accepted_.fetch_add(1);
    json descriptor;
    {
      std::lock_guard lk(mu_);
      descriptor = opts_.descriptor;
    }
    res.status = 200;
    res.set_content(
        canonical_dump(json{{"tool_id", descriptor.value("tool_id", "")},
                            {"result", "ok"}}),
        "application/json");
  });
}

StubToolServer::~StubToolServer() { stop(); }

int StubToolServer::start(const std::string& host, int port) {
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

void StubToolServer::stop() {
  if (server_ && server_->is_running()) server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::string StubToolServer::base_url() const {
  return "http://" + host_ + ":" + std::to_string(port_);
}

void StubToolServer::set_descriptor(json descriptor) {
  std::lock_guard lk(mu_);
  opts_.descriptor = std::move(descriptor);
}

}  // namespace squatguard

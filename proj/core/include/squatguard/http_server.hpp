#pragma once

#include <memory>
#include <string>
#include <thread>

#include "squatguard/registry_service.hpp"

namespace httplib {
class Server;
}

namespace squatguard {

// HTTP front for the registry. Admin and agent routes authenticate with
// `Authorization: Bearer <credential>`; role mismatches are denied and
// audited. Error bodies are {"error": {"code", "message"}}.
class HttpGateway {
 public:
  explicit HttpGateway(RegistryService& service);
  ~HttpGateway();

  // Binds and serves on a background thread; port 0 picks a free port.
  // Returns the bound port.
  int start(const std::string& host, int port);
  void stop();
  int port() const { return port_; }
  std::string base_url() const;

 private:
  void setup_routes();

  RegistryService& service_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::string host_ = "127.0.0.1";
  int port_ = 0;
};

}  // namespace squatguard

#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include "squatguard/canonical.hpp"
#include "squatguard/records.hpp"

namespace httplib {
class Server;
}

namespace squatguard {

// Lab tool endpoint: GET /describe returns the descriptor it claims to be,
// POST /invoke accepts a credential via the configured mechanism and asks the
// injected verifier (typically registry introspection) whether to honor it.
// An attack fixture simply serves a descriptor that contradicts the registry.
class StubToolServer {
 public:
  // Returns true when the presented token should be honored.
  using Verifier = std::function<bool(const std::string& token)>;

  struct Options {
    json descriptor;  // {tool_id, name, description, version}
    AuthMechanism mechanism = AuthMechanism::header;
    std::optional<std::string> header_name;
    Verifier verifier;
  };

  explicit StubToolServer(Options opts);
  ~StubToolServer();

  int start(const std::string& host, int port);  // port 0 picks a free port
  void stop();
  std::string base_url() const;
  void set_descriptor(json descriptor);

  int accepted_invocations() const { return accepted_.load(); }
  int rejected_invocations() const { return rejected_.load(); }

 private:
  Options opts_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::string host_ = "127.0.0.1";
  int port_ = 0;
  std::atomic<int> accepted_{0};
  std::atomic<int> rejected_{0};
  mutable std::mutex mu_;
};

}  // namespace squatguard

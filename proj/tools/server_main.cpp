#include <atomic>
#include <csignal>
#include <iostream>

#include <CLI11.hpp>

#include "squatguard/config.hpp"
#include "squatguard/http_server.hpp"
#include "squatguard/registry_service.hpp"
#include "squatguard/store.hpp"

namespace {

std::atomic<bool> g_stop{false};

void handle_signal(int) { g_stop.store(true); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"squatguard registry server"};
  std::string config_path;
  std::string host_flag;
  int port_flag = -1;
  std::string storage_flag;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--host", host_flag, "bind address (overrides config and env)");
  app.add_option("--port", port_flag, "bind port (overrides config and env)");
  app.add_option("--storage", storage_flag,
                 "storage directory; empty keeps state in memory");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 64;
  }

  try {
    squatguard::ServiceConfig cfg;
    if (!config_path.empty())
      cfg = squatguard::ServiceConfig::load_file(config_path);
    cfg.apply_env_overrides();
    if (!host_flag.empty()) cfg.host = host_flag;
    if (port_flag >= 0) cfg.port = port_flag;
    if (!storage_flag.empty()) cfg.storage_path = storage_flag;

    if (cfg.admins.empty())
      std::cerr << "warning: no admins configured; every admin route will "
                   "reject\n";

    squatguard::ServiceKeys keys =
        cfg.key_file.empty() ? squatguard::ServiceKeys::generate()
                             : squatguard::ServiceKeys::load_or_create(cfg.key_file);
    squatguard::RegistryService service(cfg, std::move(keys),
                                        squatguard::make_backend(cfg.storage_path));
    squatguard::HttpGateway gateway(service);
    int port = gateway.start(cfg.host, cfg.port);
    std::cout << "listening on http://" << cfg.host << ":" << port
              << " (signing key " << service.key_id() << ")" << std::endl;

    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);
    while (!g_stop.load())
      std::this_thread::sleep_for(std::chrono::milliseconds(100));
    gateway.stop();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

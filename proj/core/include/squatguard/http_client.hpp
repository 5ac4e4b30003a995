#pragma once

#include <string>

#include "squatguard/canonical.hpp"

namespace squatguard {

struct HttpResult {
  bool transport_ok = false;
  int status = 0;
  json body;        // parsed when the response was JSON
  std::string raw;  // response body as received
};

// Splits "http://host:port/prefix" into the host part httplib wants and the
// path prefix to prepend to request paths.
struct UrlParts {
  std::string host_origin;  // scheme://host[:port]
  std::string path_prefix;  // possibly empty, no trailing slash
};
UrlParts split_url(const std::string& url);

// Minimal JSON-over-HTTP client with a bearer credential.
class RegistryClient {
 public:
  RegistryClient(std::string base_url, std::string credential);

  HttpResult get(const std::string& path);
  HttpResult post(const std::string& path, const json& body);
  HttpResult post_raw(const std::string& path, const std::string& body,
                      const std::string& content_type);
  HttpResult put(const std::string& path, const json& body);
  HttpResult del(const std::string& path);

  const std::string& base_url() const { return base_url_; }

 private:
  HttpResult run(const std::string& method, const std::string& path,
                 const std::string& body, const std::string& content_type);

  std::string base_url_;
  std::string credential_;
};

}  // namespace squatguard

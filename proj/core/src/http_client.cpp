#include "squatguard/http_client.hpp"

#include <httplib.h>

namespace squatguard {

UrlParts split_url(const std::string& url) {
  UrlParts parts;
  auto scheme_end = url.find("://");
  std::size_t path_start =
      scheme_end == std::string::npos
          ? url.find('/')
          : url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    parts.host_origin = url;
    return parts;
  }
  parts.host_origin = url.substr(0, path_start);
  parts.path_prefix = url.substr(path_start);
  while (!parts.path_prefix.empty() && parts.path_prefix.back() == '/')
    parts.path_prefix.pop_back();
  return parts;
}

RegistryClient::RegistryClient(std::string base_url, std::string credential)
    : base_url_(std::move(base_url)), credential_(std::move(credential)) {}

HttpResult RegistryClient::run(const std::string& method,
                               const std::string& path, const std::string& body,
                               const std::string& content_type) {
  UrlParts parts = split_url(base_url_);
  httplib::Client cli(parts.host_origin);
  cli.set_connection_timeout(5);
  cli.set_read_timeout(10);
  httplib::Headers headers;
  if (!credential_.empty())
    headers.emplace("Authorization", "Bearer " + credential_);

  std::string full_path = parts.path_prefix + path;
  httplib::Result r;
  if (method == "GET")
    r = cli.Get(full_path, headers);
  else if (method == "POST")
    r = cli.Post(full_path, headers, body, content_type);
  else if (method == "PUT")
    r = cli.Put(full_path, headers, body, content_type);
  else
    r = cli.Delete(full_path, headers);

  HttpResult out;
  if (!r) return out;
  out.transport_ok = true;
  out.status = r->status;
  out.raw = r->body;
  json parsed = json::parse(r->body, nullptr, false);
  if (!parsed.is_discarded()) out.body = parsed;
  return out;
}

HttpResult RegistryClient::get(const std::string& path) {
  return run("GET", path, "", "");
}

HttpResult RegistryClient::post(const std::string& path, const json& body) {
  return run("POST", path, canonical_dump(body), "application/json");
}

HttpResult RegistryClient::post_raw(const std::string& path,
                                    const std::string& body,
                                    const std::string& content_type) {
  return run("POST", path, body, content_type);
}

HttpResult RegistryClient::put(const std::string& path, const json& body) {
  return run("PUT", path, canonical_dump(body), "application/json");
}

HttpResult RegistryClient::del(const std::string& path) {
  return run("DELETE", path, "", "");
}

}  // namespace squatguard

#include "http_post.hpp"

#include <cstdlib>

#include <httplib.h>

namespace kpqg::detail {

Endpoint parse_endpoint(const std::string& url) {
  auto scheme_end = url.find("://");
  auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  auto path_start = url.find('/', host_start);
  Endpoint ep;
  if (path_start == std::string::npos) {
    ep.origin = url;
  } else {
    ep.origin = url.substr(0, path_start);
    ep.base_path = url.substr(path_start);
  }
  while (!ep.base_path.empty() && ep.base_path.back() == '/') ep.base_path.pop_back();
  if (scheme_end == std::string::npos) ep.origin = "http://" + ep.origin;
  return ep;
}

std::string post_json(const std::string& base_url, const std::string& path, const std::string& body,
                      int timeout_seconds, ErrorCode failure_code) {
  auto ep = parse_endpoint(base_url);
  httplib::Client client(ep.origin);
  client.set_connection_timeout(timeout_seconds, 0);
  client.set_read_timeout(timeout_seconds, 0);
  client.set_write_timeout(timeout_seconds, 0);
  auto target = ep.base_path + path;
  auto res = client.Post(target, body, "application/json");
  if (!res) {
    throw Error(failure_code, "POST " + ep.origin + target + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw Error(failure_code, "POST " + ep.origin + target + " returned HTTP " + std::to_string(res->status));
  }
  return res->body;
}

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

}  // namespace kpqg::detail

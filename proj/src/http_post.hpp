#pragma once

#include <optional>
#include <string>

#include "kpqg/error.hpp"

namespace kpqg::detail {

struct Endpoint {
  std::string origin;     // scheme://host[:port]
  std::string base_path;  // "" or "/prefix" without trailing slash
};

Endpoint parse_endpoint(const std::string& url);

/// POSTs a JSON body to base_url + path. Returns the response body on 200;
/// throws Error(failure_code) on transport failure or any other status.
std::string post_json(const std::string& base_url, const std::string& path, const std::string& body,
                      int timeout_seconds, ErrorCode failure_code);

std::optional<std::string> env(const char* name);

}  // namespace kpqg::detail

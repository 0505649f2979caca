#pragma once

#include <optional>
#include <string>

namespace ctiprof {

struct UrlParts {
  std::string scheme;  // "http" or "https"
  std::string host;
  int port = 0;  // 0 = scheme default
  std::string target;  // path + query, always starts with '/'
};

std::optional<UrlParts> parse_url(const std::string& url);

struct HttpResponse {
  bool transport_ok = false;  // false = network/TLS/DNS failure
  int status = 0;
  std::string body;
  std::string content_type;
  std::string final_url;  // after redirects
  std::string error;
};

struct HttpFetchOptions {
  int timeout_seconds = 30;
  int max_redirects = 3;
  std::string user_agent = "ctiprof/0.1 (report corpus fetcher)";
};

/// One GET with bounded redirect following. Never throws; failures are
/// reported through transport_ok/error.
HttpResponse http_get(const std::string& url, const HttpFetchOptions& options);

}  // namespace ctiprof

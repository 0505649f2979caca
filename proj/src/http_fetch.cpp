#include "ctiprof/http_fetch.hpp"

#include <cctype>

#include "httplib.h"

namespace ctiprof {

std::optional<UrlParts> parse_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) return std::nullopt;
  UrlParts parts;
  parts.scheme = url.substr(0, scheme_end);
  for (char& c : parts.scheme) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (parts.scheme != "http" && parts.scheme != "https") return std::nullopt;

  std::size_t host_begin = scheme_end + 3;
  std::size_t authority_end = url.find_first_of("/?#", host_begin);
  std::string authority = url.substr(
      host_begin, authority_end == std::string::npos ? std::string::npos
                                                     : authority_end - host_begin);
  auto at = authority.rfind('@');
  if (at != std::string::npos) authority.erase(0, at + 1);
  auto colon = authority.rfind(':');
  if (colon != std::string::npos && colon + 1 < authority.size() &&
      std::isdigit(static_cast<unsigned char>(authority[colon + 1]))) {
    parts.port = std::atoi(authority.c_str() + colon + 1);
    authority.erase(colon);
  }
  if (authority.empty()) return std::nullopt;
  for (char& c : authority) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  parts.host = authority;
  if (authority_end == std::string::npos) {
    parts.target = "/";
  } else if (url[authority_end] == '/') {
    parts.target = url.substr(authority_end);
  } else {
    parts.target = "/" + url.substr(authority_end);
  }
  auto frag = parts.target.find('#');
  if (frag != std::string::npos) parts.target.erase(frag);
  return parts;
}

namespace {

std::string resolve_redirect(const UrlParts& base, const std::string& location) {
  if (location.rfind("http://", 0) == 0 || location.rfind("https://", 0) == 0) {
    return location;
  }
  std::string origin = base.scheme + "://" + base.host;
  if (base.port != 0) origin += ":" + std::to_string(base.port);
  if (!location.empty() && location[0] == '/') return origin + location;
  auto slash = base.target.rfind('/');
  return origin + base.target.substr(0, slash + 1) + location;
}

}  // namespace

HttpResponse http_get(const std::string& url, const HttpFetchOptions& options) {
  HttpResponse result;
  std::string current = url;
  for (int hop = 0; hop <= options.max_redirects; ++hop) {
    auto parts = parse_url(current);
    if (!parts) {
      result.error = "unparseable URL: " + current;
      return result;
    }
    std::string origin = parts->scheme + "://" + parts->host;
    if (parts->port != 0) origin += ":" + std::to_string(parts->port);

    httplib::Client client(origin);
    client.set_follow_location(false);  // redirect budget enforced here
    client.set_connection_timeout(options.timeout_seconds, 0);
    client.set_read_timeout(options.timeout_seconds, 0);
    client.set_write_timeout(options.timeout_seconds, 0);
    client.enable_server_certificate_verification(false);

    httplib::Headers headers{{"User-Agent", options.user_agent},
                             {"Accept", "*/*"}};
    auto res = client.Get(parts->target, headers);
    if (!res) {
      result.error = "transport error: " + httplib::to_string(res.error());
      return result;
    }
    if (res->status >= 300 && res->status < 400 && res->has_header("Location")) {
      current = resolve_redirect(*parts, res->get_header_value("Location"));
      continue;
    }
    result.transport_ok = true;
    result.status = res->status;
    result.body = std::move(res->body);
    result.content_type = res->get_header_value("Content-Type");
    result.final_url = current;
    return result;
  }
  result.error = "too many redirects (limit " + std::to_string(options.max_redirects) + ")";
  return result;
}

}  // namespace ctiprof

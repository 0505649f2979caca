#include "ctiprof/types.hpp"

#include <cctype>

namespace ctiprof {

const char* to_string(Source s) {
  switch (s) {
    case Source::Attack: return "ATTACK";
    case Source::Malpedia: return "MALPEDIA";
  }
  return "?";
}

const char* to_string(EntityKind k) {
  switch (k) {
    case EntityKind::Group: return "group";
    case EntityKind::Software: return "software";
  }
  return "?";
}

const char* to_string(SoftwareKind k) {
  switch (k) {
    case SoftwareKind::Tool: return "tool";
    case SoftwareKind::Malware: return "malware";
    case SoftwareKind::Unknown: return "unknown";
  }
  return "?";
}

const char* to_string(Domain d) {
  switch (d) {
    case Domain::Enterprise: return "enterprise";
    case Domain::Mobile: return "mobile";
    case Domain::Ics: return "ics";
  }
  return "?";
}

const char* to_string(BehaviorKind k) {
  switch (k) {
    case BehaviorKind::Technique: return "technique";
    case BehaviorKind::Software: return "software";
    case BehaviorKind::Vulnerability: return "vulnerability";
  }
  return "?";
}

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::AttackCatalog: return "ATTACK_CATALOG";
    case Provenance::MalpediaCatalog: return "MALPEDIA_CATALOG";
    case Provenance::ReportExtracted: return "REPORT_EXTRACTED";
  }
  return "?";
}

std::string fqdn_of_url(const std::string& url) {
  auto scheme_end = url.find("://");
  std::size_t host_begin = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  std::size_t host_end = host_begin;
  while (host_end < url.size() && url[host_end] != '/' && url[host_end] != ':' &&
         url[host_end] != '?' && url[host_end] != '#') {
    ++host_end;
  }
  // Credentials in the authority component are rare in report URLs but legal.
  auto at = url.find('@', host_begin);
  if (at != std::string::npos && at < host_end) host_begin = at + 1;
  std::string host = url.substr(host_begin, host_end - host_begin);
  for (char& c : host) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return host;
}

}  // namespace ctiprof

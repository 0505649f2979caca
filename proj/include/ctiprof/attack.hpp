#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ctiprof/types.hpp"

namespace ctiprof {

struct TechniqueEntry {
  std::string id;  // "T1566" or "T1566.001"
  std::string name;
  Domain domain = Domain::Enterprise;
  std::set<std::string> tactic_ids;  // "TA0001"...
  std::optional<std::string> parent_id;  // present iff sub-technique

  bool is_subtechnique() const { return parent_id.has_value(); }
};

struct SoftwareEntry {
  std::string id;  // "S0002" for ATT&CK, source-native key for Malpedia
  std::vector<std::string> names;  // non-empty, first = primary
  SoftwareKind kind = SoftwareKind::Unknown;
  Source source = Source::Attack;
};

/// Parsed view of one ATT&CK release. Revoked and deprecated objects are
/// filtered at load time, before anything is counted.
struct AttackSnapshot {
  std::string version;
  std::vector<SourceEntity> groups;
  std::vector<TechniqueEntry> techniques;  // techniques and sub-techniques
  std::vector<SoftwareEntry> software;
  std::vector<Association> associations;
  std::vector<ReportRef> report_refs;
  IngestDiagnostics diagnostics;

  std::size_t subtechnique_count() const;
  std::size_t domain_count(Domain d) const;
};

/// Parses a STIX 2.1 bundle (the public ATT&CK release format). Throws
/// std::runtime_error with the byte offset on malformed JSON; unknown STIX
/// object types are skipped and counted, never errors.
AttackSnapshot load_attack_bundle(std::string_view bundle_json);

/// Loads and merges one or more bundle files (e.g. one per domain) into a
/// single snapshot, deduplicating by object id.
AttackSnapshot load_attack_bundles(const std::vector<std::string>& paths);

/// The deduplicated set of report URLs cited by group entries, each carrying
/// its FQDN and the citing group(s).
std::vector<ReportRef> attack_group_report_urls(const AttackSnapshot& snapshot);

}  // namespace ctiprof

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace ctiprof {

/// Knowledge base a record originates from.
enum class Source { Attack, Malpedia };

enum class EntityKind { Group, Software };

/// ATT&CK software classification; Malpedia entries are always Unknown.
enum class SoftwareKind { Tool, Malware, Unknown };

enum class Domain { Enterprise, Mobile, Ics };

enum class BehaviorKind { Technique, Software, Vulnerability };

enum class Provenance { AttackCatalog, MalpediaCatalog, ReportExtracted };

const char* to_string(Source s);
const char* to_string(EntityKind k);
const char* to_string(SoftwareKind k);
const char* to_string(Domain d);
const char* to_string(BehaviorKind k);
const char* to_string(Provenance p);

/// A group or software record as it appears in one knowledge base.
/// names is non-empty; names[0] is the primary name, the rest are aliases.
struct SourceEntity {
  EntityKind kind = EntityKind::Group;
  Source source = Source::Attack;
  std::string source_id;
  std::vector<std::string> names;
  SoftwareKind software_kind = SoftwareKind::Unknown;

  const std::string& primary_name() const { return names.front(); }
};

/// A reference to a threat report. For ATT&CK the linked sets come from the
/// citing entity's external references; for Malpedia from the actor/family
/// URL lists.
struct ReportRef {
  std::string url;
  std::string fqdn;  // lower-cased host component of url
  std::optional<std::string> title;
  std::optional<std::string> author;
  std::optional<std::string> published;
  std::set<std::string> linked_groups;
  std::set<std::string> linked_software;
  std::set<std::string> linked_techniques;
  Source source = Source::Attack;
};

/// One group -> behavior edge. group_id and behavior_id are source-level
/// identifiers until resolved against the merge maps.
struct Association {
  std::string group_id;
  std::string behavior_id;
  BehaviorKind behavior_kind = BehaviorKind::Technique;
  Provenance provenance = Provenance::AttackCatalog;
  Source source = Source::Attack;
  std::optional<ReportRef> evidence;
};

/// Per-load skip/filter counters. Skipped object types are not errors.
struct IngestDiagnostics {
  std::map<std::string, std::size_t> skipped_object_types;
  std::size_t revoked_filtered = 0;
  std::size_t deprecated_filtered = 0;
  std::size_t ignored_relationships = 0;
  std::size_t entries_without_url = 0;
  std::size_t malformed_entries = 0;
  std::vector<std::string> warnings;
};

/// Lower-cased host component of a URL ("" if the URL has no host).
std::string fqdn_of_url(const std::string& url);

}  // namespace ctiprof

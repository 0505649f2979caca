#pragma once

#include <iosfwd>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ctiprof/normalize.hpp"
#include "ctiprof/types.hpp"

namespace ctiprof {

struct MemberRef {
  Source source = Source::Attack;
  std::string source_id;

  auto operator<=>(const MemberRef&) const = default;
};

/// An equivalence class of SourceEntities across knowledge bases.
struct MergedEntity {
  int class_id = 0;
  EntityKind kind = EntityKind::Group;
  std::vector<MemberRef> members;  // sorted, non-empty
  std::string canonical_name;
  std::set<std::string> normalized_names;
  // For software: Tool iff any ATT&CK member is classified as a tool.
  SoftwareKind kind_hint = SoftwareKind::Unknown;

  bool has_source(Source s) const;
};

/// Manual overrides. Pairs are (source:source_id, source:source_id) member
/// references. force_split removes the direct edge between the two entities;
/// they can still end up merged through a third entity.
struct MergeOverrides {
  std::vector<std::pair<MemberRef, MemberRef>> force_merge;
  std::vector<std::pair<MemberRef, MemberRef>> force_split;
};

/// Merges entities of one kind into equivalence classes: the connected
/// components of the graph whose edges join entities sharing at least one
/// normalized name or alias. Normalized names that are empty or a single
/// character never create edges. class_ids are assigned by sorting classes
/// on canonical name; the result is independent of input order.
std::vector<MergedEntity> merge_entities(const std::vector<SourceEntity>& entities,
                                         EntityKind kind,
                                         const NormalizationRuleSet& rules,
                                         const MergeOverrides& overrides = {});

/// Canonical-name rule: the primary name of the ATT&CK member with the
/// smallest source id if any exists, otherwise the lexicographically smallest
/// Malpedia primary name.
std::string canonical_name(const std::vector<const SourceEntity*>& members);

/// Writes the merge map: one row per member, columns
/// source_entity ("SOURCE:id"), class_id, canonical_name. Rows sorted.
void write_merge_map_csv(std::ostream& out, const std::vector<MergedEntity>& classes);

/// Looks up the class that contains (source, source_id); nullptr if absent.
class MergeIndex {
 public:
  explicit MergeIndex(const std::vector<MergedEntity>& classes);
  const MergedEntity* find(Source source, const std::string& source_id) const;

 private:
  std::vector<std::pair<MemberRef, const MergedEntity*>> index_;
};

/// Parses a plain-text overrides file: one directive per line,
/// "merge SOURCE:id SOURCE:id" or "split SOURCE:id SOURCE:id";
/// '#' starts a comment. Throws std::runtime_error on malformed lines.
MergeOverrides load_merge_overrides(const std::string& path);

}  // namespace ctiprof

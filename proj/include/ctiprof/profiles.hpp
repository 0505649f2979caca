#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ctiprof/resolve.hpp"
#include "ctiprof/types.hpp"

namespace ctiprof {

/// Which knowledge base(s) feed a profile.
enum class Scope { Attack, Malpedia, Union };

const char* to_string(Scope s);

/// Behavior categories selectable in a profile. TechniqueExtracted selects
/// technique associations whose provenance is report extraction, so catalog
/// and extracted techniques can be combined or separated.
enum KindMaskBits : unsigned {
  kKindTechnique = 1u << 0,
  kKindTechniqueExtracted = 1u << 1,
  kKindSoftware = 1u << 2,
  kKindVulnerability = 1u << 3,
};

std::string kind_mask_to_string(unsigned mask);

/// A behavior in class space: technique IDs and CVE IDs keep their strings;
/// software keys are merged-class ids, never raw source names.
struct BehaviorKey {
  BehaviorKind kind = BehaviorKind::Technique;
  std::string id;

  auto operator<=>(const BehaviorKey&) const = default;
};

std::string to_string(const BehaviorKey& k);

/// An association with both endpoints resolved against the merge maps.
struct ResolvedAssociation {
  int group_class = 0;
  BehaviorKey behavior;
  Provenance provenance = Provenance::AttackCatalog;
  Source source = Source::Attack;
  std::optional<ReportRef> evidence;
};

/// Resolves the group endpoint (and, for software, the behavior endpoint)
/// of every association into merged-class space. Throws std::runtime_error
/// if an endpoint is missing from the merge maps: that means the maps and
/// the associations are out of sync.
std::vector<ResolvedAssociation> resolve_associations(
    const std::vector<Association>& associations, const MergeIndex& groups,
    const MergeIndex* software);

struct ProfileSet {
  Scope scope = Scope::Union;
  unsigned kind_mask = 0;
  // One entry for every known group class, possibly empty.
  std::map<int, std::set<BehaviorKey>> profiles;
  std::map<std::pair<int, BehaviorKey>, std::vector<ResolvedAssociation>> provenance;

  std::size_t nonempty_count() const;
  /// Mean profile size over groups with a non-empty profile.
  double mean_nonempty_size() const;
  const std::set<BehaviorKey>* find(int group_class) const;
};

/// A group's set is the union over its members' associations whose source
/// matches the scope and whose behavior kind is in the mask.
ProfileSet build_profiles(const std::vector<MergedEntity>& group_classes,
                          const std::vector<ResolvedAssociation>& associations,
                          Scope scope, unsigned kind_mask);

enum class BehaviorLabel { Unassociated, GroupSpecific, Generic };

const char* to_string(BehaviorLabel label);

struct BehaviorClassification {
  BehaviorKey behavior;
  std::size_t group_count = 0;
  BehaviorLabel label = BehaviorLabel::Unassociated;
  bool specificity_eligible = true;  // false for software classified as a tool
};

/// Classifies every behavior in `universe` by the number of groups whose
/// profile contains it. The profile set must have been built over the full
/// universe so that a zero count is meaningful. `tool_classes` holds the
/// software class ids whose kind hint is Tool.
std::vector<BehaviorClassification> classify_behaviors(
    const ProfileSet& profiles, const std::vector<BehaviorKey>& universe,
    const std::set<std::string>& tool_classes);

/// |a n b| / |a u b|; both sets empty counts as identical (1.0).
double jaccard(const std::set<BehaviorKey>& a, const std::set<BehaviorKey>& b);
double jaccard_counts(std::size_t intersection, std::size_t union_size);

/// |A n B| / max(|A|, |B|) over the group sets of two behaviors. Throws
/// std::invalid_argument when both sets are empty.
double co_occurrence_rate(const std::set<int>& groups_of_a,
                          const std::set<int>& groups_of_b);

struct SimilarPair {
  int group_a = 0;
  int group_b = 0;
  double jaccard = 0.0;
};

struct SimilarityStats {
  double mean = 0.0;
  double median = 0.0;
  double max = 0.0;
  std::size_t pairs_counted = 0;
  double threshold = 0.4;
  std::vector<SimilarPair> pairs_at_or_above;  // sorted by jaccard descending
};

/// All pairwise Jaccard indices between groups with non-empty profiles;
/// groups with empty profiles are excluded from the statistics. Throws
/// std::runtime_error with fewer than two non-empty profiles.
SimilarityStats profile_similarity_stats(const ProfileSet& profiles,
                                         double threshold = 0.4);

/// One row of the profile-summary table.
struct SpecificitySummary {
  Scope scope = Scope::Union;
  unsigned kind_mask = 0;
  std::size_t groups_total = 0;
  std::size_t groups_nonempty = 0;
  std::size_t groups_with_group_specific = 0;
};

/// groups_nonempty counts groups with at least one behavior in the profile;
/// groups_with_group_specific counts groups owning at least one behavior
/// classified GroupSpecific. groups_total is the scope's denominator (the
/// source's group count, or all merged classes for Union).
SpecificitySummary specificity_summary(
    const ProfileSet& profiles,
    const std::vector<BehaviorClassification>& classifications,
    std::size_t groups_total);

/// Generic behaviors ranked by group count descending, ties by key ascending.
std::vector<std::pair<BehaviorKey, std::size_t>> top_generic(
    const std::vector<BehaviorClassification>& classifications, std::size_t n);

}  // namespace ctiprof

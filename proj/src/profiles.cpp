#include "ctiprof/profiles.hpp"

#include <algorithm>
#include <stdexcept>

namespace ctiprof {

const char* to_string(Scope s) {
  switch (s) {
    case Scope::Attack: return "attack";
    case Scope::Malpedia: return "malpedia";
    case Scope::Union: return "union";
  }
  return "?";
}

std::string kind_mask_to_string(unsigned mask) {
  std::string out;
  auto add = [&](const char* name) {
    if (!out.empty()) out += "+";
    out += name;
  };
  if (mask & kKindTechnique) add("techniques");
  if (mask & kKindTechniqueExtracted) add("techniques_extracted");
  if (mask & kKindSoftware) add("software");
  if (mask & kKindVulnerability) add("vulnerabilities");
  return out.empty() ? "none" : out;
}

std::string to_string(const BehaviorKey& k) {
  switch (k.kind) {
    case BehaviorKind::Technique: return k.id;
    case BehaviorKind::Vulnerability: return k.id;
    case BehaviorKind::Software: return "software#" + k.id;
  }
  return k.id;
}

const char* to_string(BehaviorLabel label) {
  switch (label) {
    case BehaviorLabel::Unassociated: return "unassociated";
    case BehaviorLabel::GroupSpecific: return "group_specific";
    case BehaviorLabel::Generic: return "generic";
  }
  return "?";
}

namespace {

unsigned mask_bit_of(const ResolvedAssociation& a) {
  switch (a.behavior.kind) {
    case BehaviorKind::Technique:
      return a.provenance == Provenance::ReportExtracted ? kKindTechniqueExtracted
                                                         : kKindTechnique;
    case BehaviorKind::Software: return kKindSoftware;
    case BehaviorKind::Vulnerability: return kKindVulnerability;
  }
  return 0;
}

bool scope_admits(Scope scope, Source source) {
  switch (scope) {
    case Scope::Attack: return source == Source::Attack;
    case Scope::Malpedia: return source == Source::Malpedia;
    case Scope::Union: return true;
  }
  return false;
}

}  // namespace

std::vector<ResolvedAssociation> resolve_associations(
    const std::vector<Association>& associations, const MergeIndex& groups,
    const MergeIndex* software) {
  std::vector<ResolvedAssociation> out;
  out.reserve(associations.size());
  for (const auto& a : associations) {
    const MergedEntity* g = groups.find(a.source, a.group_id);
    if (!g) {
      throw std::runtime_error("association references unknown group " +
                               std::string(to_string(a.source)) + ":" + a.group_id +
                               " (merge map out of sync)");
    }
    ResolvedAssociation r;
    r.group_class = g->class_id;
    r.provenance = a.provenance;
    r.source = a.source;
    r.evidence = a.evidence;
    if (a.behavior_kind == BehaviorKind::Software) {
      if (!software) {
        throw std::runtime_error("software association but no software merge map");
      }
      const MergedEntity* s = software->find(a.source, a.behavior_id);
      if (!s) {
        throw std::runtime_error("association references unknown software " +
                                 std::string(to_string(a.source)) + ":" + a.behavior_id +
                                 " (merge map out of sync)");
      }
      r.behavior = {BehaviorKind::Software, std::to_string(s->class_id)};
    } else {
      r.behavior = {a.behavior_kind, a.behavior_id};
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::size_t ProfileSet::nonempty_count() const {
  std::size_t n = 0;
  for (const auto& [g, set] : profiles) {
    if (!set.empty()) ++n;
  }
  return n;
}

double ProfileSet::mean_nonempty_size() const {
  std::size_t n = 0;
  std::size_t total = 0;
  for (const auto& [g, set] : profiles) {
    if (set.empty()) continue;
    ++n;
    total += set.size();
  }
  return n == 0 ? 0.0 : static_cast<double>(total) / static_cast<double>(n);
}

const std::set<BehaviorKey>* ProfileSet::find(int group_class) const {
  auto it = profiles.find(group_class);
  return it == profiles.end() ? nullptr : &it->second;
}

ProfileSet build_profiles(const std::vector<MergedEntity>& group_classes,
                          const std::vector<ResolvedAssociation>& associations,
                          Scope scope, unsigned kind_mask) {
  ProfileSet ps;
  ps.scope = scope;
  ps.kind_mask = kind_mask;
  for (const auto& g : group_classes) ps.profiles[g.class_id];  // empty set
  for (const auto& a : associations) {
    if (!scope_admits(scope, a.source)) continue;
    if ((mask_bit_of(a) & kind_mask) == 0) continue;
    auto it = ps.profiles.find(a.group_class);
    if (it == ps.profiles.end()) {
      throw std::runtime_error("association references unknown group class " +
                               std::to_string(a.group_class) +
                               " (merge map out of sync)");
    }
    it->second.insert(a.behavior);
    ps.provenance[{a.group_class, a.behavior}].push_back(a);
  }
  return ps;
}

std::vector<BehaviorClassification> classify_behaviors(
    const ProfileSet& profiles, const std::vector<BehaviorKey>& universe,
    const std::set<std::string>& tool_classes) {
  std::map<BehaviorKey, std::size_t> counts;
  for (const auto& key : universe) counts[key];  // zero-initialize
  for (const auto& [g, set] : profiles.profiles) {
    for (const auto& key : set) {
      auto it = counts.find(key);
      if (it != counts.end()) ++it->second;
    }
  }
  std::vector<BehaviorClassification> out;
  out.reserve(counts.size());
  for (const auto& [key, count] : counts) {
    BehaviorClassification c;
    c.behavior = key;
    c.group_count = count;
    c.specificity_eligible =
        !(key.kind == BehaviorKind::Software && tool_classes.count(key.id) > 0);
    if (count == 0) c.label = BehaviorLabel::Unassociated;
    else if (count == 1 && c.specificity_eligible) c.label = BehaviorLabel::GroupSpecific;
    else c.label = BehaviorLabel::Generic;
    out.push_back(std::move(c));
  }
  return out;
}

double jaccard_counts(std::size_t intersection, std::size_t union_size) {
  if (union_size == 0) return 1.0;
  return static_cast<double>(intersection) / static_cast<double>(union_size);
}

double jaccard(const std::set<BehaviorKey>& a, const std::set<BehaviorKey>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t inter = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) ++ia;
    else if (*ib < *ia) ++ib;
    else {
      ++inter;
      ++ia;
      ++ib;
    }
  }
  return jaccard_counts(inter, a.size() + b.size() - inter);
}

double co_occurrence_rate(const std::set<int>& groups_of_a,
                          const std::set<int>& groups_of_b) {
  if (groups_of_a.empty() && groups_of_b.empty()) {
    throw std::invalid_argument("co_occurrence_rate undefined for two empty sets");
  }
  std::size_t inter = 0;
  for (int g : groups_of_a) inter += groups_of_b.count(g);
  std::size_t denom = std::max(groups_of_a.size(), groups_of_b.size());
  return static_cast<double>(inter) / static_cast<double>(denom);
}

SimilarityStats profile_similarity_stats(const ProfileSet& profiles, double threshold) {
  std::vector<std::pair<int, const std::set<BehaviorKey>*>> nonempty;
  for (const auto& [g, set] : profiles.profiles) {
    if (!set.empty()) nonempty.emplace_back(g, &set);
  }
  if (nonempty.size() < 2) {
    throw std::runtime_error("similarity statistics need at least two non-empty profiles");
  }
  SimilarityStats stats;
  stats.threshold = threshold;
  std::vector<double> values;
  values.reserve(nonempty.size() * (nonempty.size() - 1) / 2);
  for (std::size_t i = 0; i < nonempty.size(); ++i) {
    for (std::size_t j = i + 1; j < nonempty.size(); ++j) {
      double ji = jaccard(*nonempty[i].second, *nonempty[j].second);
      values.push_back(ji);
      if (ji >= threshold) {
        stats.pairs_at_or_above.push_back({nonempty[i].first, nonempty[j].first, ji});
      }
    }
  }
  stats.pairs_counted = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  stats.mean = sum / static_cast<double>(values.size());
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  std::size_t mid = sorted.size() / 2;
  stats.median = sorted.size() % 2 == 1 ? sorted[mid] : (sorted[mid - 1] + sorted[mid]) / 2.0;
  stats.max = sorted.back();
  std::sort(stats.pairs_at_or_above.begin(), stats.pairs_at_or_above.end(),
            [](const SimilarPair& a, const SimilarPair& b) {
              if (a.jaccard != b.jaccard) return a.jaccard > b.jaccard;
              return std::tie(a.group_a, a.group_b) < std::tie(b.group_a, b.group_b);
            });
  return stats;
}

SpecificitySummary specificity_summary(
    const ProfileSet& profiles,
    const std::vector<BehaviorClassification>& classifications,
    std::size_t groups_total) {
  std::set<BehaviorKey> specific;
  for (const auto& c : classifications) {
    if (c.label == BehaviorLabel::GroupSpecific) specific.insert(c.behavior);
  }
  SpecificitySummary s;
  s.scope = profiles.scope;
  s.kind_mask = profiles.kind_mask;
  s.groups_total = groups_total;
  for (const auto& [g, set] : profiles.profiles) {
    if (set.empty()) continue;
    s.groups_nonempty++;
    bool owns_specific = std::any_of(set.begin(), set.end(), [&](const BehaviorKey& k) {
      return specific.count(k) > 0;
    });
    if (owns_specific) s.groups_with_group_specific++;
  }
  return s;
}

std::vector<std::pair<BehaviorKey, std::size_t>> top_generic(
    const std::vector<BehaviorClassification>& classifications, std::size_t n) {
  std::vector<std::pair<BehaviorKey, std::size_t>> generic;
  for (const auto& c : classifications) {
    if (c.label == BehaviorLabel::Generic) generic.emplace_back(c.behavior, c.group_count);
  }
  std::sort(generic.begin(), generic.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (generic.size() > n) generic.resize(n);
  return generic;
}

}  // namespace ctiprof

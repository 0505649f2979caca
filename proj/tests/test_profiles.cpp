#include "ctiprof/profiles.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include "doctest.h"
#include "support/rng.hpp"

using namespace ctiprof;

namespace {

std::vector<MergedEntity> make_groups(int n) {
  std::vector<MergedEntity> out;
  for (int i = 0; i < n; ++i) {
    MergedEntity g;
    g.class_id = i;
    g.kind = EntityKind::Group;
    g.members = {{Source::Attack, "G" + std::to_string(i)}};
    g.canonical_name = "Group " + std::to_string(i);
    out.push_back(std::move(g));
  }
  return out;
}

struct MiniKb {
  std::vector<MergedEntity> groups;
  std::vector<BehaviorKey> universe;
  std::set<std::string> tool_classes;
  std::vector<ResolvedAssociation> associations;
};

MiniKb random_mini_kb(ctiprof::testing::SplitMix64& rng) {
  MiniKb kb;
  int n_groups = 2 + static_cast<int>(rng.below(19));     // <= 20
  int n_behaviors = 1 + static_cast<int>(rng.below(50));  // <= 50
  kb.groups = make_groups(n_groups);
  for (int b = 0; b < n_behaviors; ++b) {
    switch (rng.below(3)) {
      case 0:
        kb.universe.push_back({BehaviorKind::Technique, "T1" + std::to_string(100 + b)});
        break;
      case 1: {
        std::string id = std::to_string(b);
        kb.universe.push_back({BehaviorKind::Software, id});
        if (rng.below(3) == 0) kb.tool_classes.insert(id);
        break;
      }
      default:
        kb.universe.push_back({BehaviorKind::Vulnerability,
                               "CVE-2020-" + std::to_string(1000 + b)});
        break;
    }
  }
  auto n_assocs = rng.below(static_cast<std::uint64_t>(n_groups) * n_behaviors / 2 + 1);
  for (std::uint64_t k = 0; k < n_assocs; ++k) {
    ResolvedAssociation a;
    a.group_class = static_cast<int>(rng.below(n_groups));
    a.behavior = kb.universe[rng.below(kb.universe.size())];
    a.source = rng.below(2) ? Source::Attack : Source::Malpedia;
    a.provenance = a.behavior.kind == BehaviorKind::Vulnerability
                       ? Provenance::ReportExtracted
                       : (rng.below(4) == 0 ? Provenance::ReportExtracted
                                            : (a.source == Source::Attack
                                                   ? Provenance::AttackCatalog
                                                   : Provenance::MalpediaCatalog));
    kb.associations.push_back(std::move(a));
  }
  return kb;
}

bool oracle_admits(Scope scope, Source source) {
  return scope == Scope::Union || (scope == Scope::Attack && source == Source::Attack) ||
         (scope == Scope::Malpedia && source == Source::Malpedia);
}

unsigned oracle_bit(const ResolvedAssociation& a) {
  if (a.behavior.kind == BehaviorKind::Software) return kKindSoftware;
  if (a.behavior.kind == BehaviorKind::Vulnerability) return kKindVulnerability;
  return a.provenance == Provenance::ReportExtracted ? kKindTechniqueExtracted
                                                     : kKindTechnique;
}

// Straight recount from the association list, sharing nothing with the
// ProfileSet implementation.
std::map<BehaviorKey, std::size_t> oracle_counts(const MiniKb& kb, Scope scope,
                                                 unsigned mask) {
  std::map<BehaviorKey, std::size_t> counts;
  for (const auto& key : kb.universe) counts[key] = 0;
  for (const auto& g : kb.groups) {
    std::set<BehaviorKey> seen;
    for (const auto& a : kb.associations) {
      if (a.group_class != g.class_id) continue;
      if (!oracle_admits(scope, a.source)) continue;
      if ((oracle_bit(a) & mask) == 0) continue;
      seen.insert(a.behavior);
    }
    for (const auto& key : seen) {
      if (counts.count(key)) counts[key]++;
    }
  }
  return counts;
}

}  // namespace

TEST_CASE("jaccard on small sets") {
  std::set<BehaviorKey> a = {{BehaviorKind::Technique, "x"}, {BehaviorKind::Technique, "y"}};
  std::set<BehaviorKey> b = {{BehaviorKind::Technique, "y"}, {BehaviorKind::Technique, "z"}};
  CHECK(jaccard(a, b) == doctest::Approx(1.0 / 3.0));
  CHECK(jaccard(a, a) == doctest::Approx(1.0));
  CHECK(jaccard({}, {}) == doctest::Approx(1.0));
  CHECK(jaccard(a, {}) == doctest::Approx(0.0));
  // the published software-name overlap, from counts
  CHECK(jaccard_counts(498, 3663) == doctest::Approx(0.13595).epsilon(1e-3));
}

TEST_CASE("co-occurrence rate") {
  std::set<int> a = {1, 2, 3};
  std::set<int> b = {4, 5};
  CHECK(co_occurrence_rate(a, b) == doctest::Approx(0.0));
  CHECK(co_occurrence_rate(a, a) == doctest::Approx(1.0));
  CHECK_THROWS_AS(co_occurrence_rate({}, {}), std::invalid_argument);
  // 39-of-41 overlap reproduces the highest published pair rate
  std::set<int> big, small;
  for (int i = 0; i < 41; ++i) big.insert(i);
  for (int i = 0; i < 39; ++i) small.insert(i);
  CHECK(co_occurrence_rate(big, small) == doctest::Approx(39.0 / 41.0));
  CHECK(co_occurrence_rate(small, big) == doctest::Approx(39.0 / 41.0));
}

TEST_CASE("build_profiles rejects associations outside the class universe") {
  auto groups = make_groups(2);
  std::vector<ResolvedAssociation> assocs(1);
  assocs[0].group_class = 7;
  assocs[0].behavior = {BehaviorKind::Technique, "T1000"};
  CHECK_THROWS_AS(build_profiles(groups, assocs, Scope::Union, kKindTechnique),
                  std::runtime_error);
}

TEST_CASE("classification labels follow the count/eligibility invariant") {
  auto groups = make_groups(3);
  std::vector<BehaviorKey> universe = {
      {BehaviorKind::Technique, "T1000"},   // used by 2 -> generic
      {BehaviorKind::Technique, "T1001"},   // used by 1 -> group-specific
      {BehaviorKind::Technique, "T1002"},   // unused -> unassociated
      {BehaviorKind::Software, "10"},       // tool used by 1 -> generic, ineligible
      {BehaviorKind::Software, "11"},       // non-tool used by 1 -> group-specific
  };
  std::vector<ResolvedAssociation> assocs;
  auto add = [&](int g, const BehaviorKey& k) {
    ResolvedAssociation a;
    a.group_class = g;
    a.behavior = k;
    a.source = Source::Attack;
    assocs.push_back(a);
  };
  add(0, universe[0]);
  add(1, universe[0]);
  add(2, universe[1]);
  add(0, universe[3]);
  add(1, universe[4]);
  auto ps = build_profiles(groups, assocs, Scope::Union,
                           kKindTechnique | kKindSoftware);
  auto classes = classify_behaviors(ps, universe, {"10"});
  REQUIRE(classes.size() == universe.size());
  std::map<BehaviorKey, BehaviorClassification> by_key;
  for (const auto& c : classes) by_key[c.behavior] = c;
  CHECK(by_key.at(universe[0]).label == BehaviorLabel::Generic);
  CHECK(by_key.at(universe[1]).label == BehaviorLabel::GroupSpecific);
  CHECK(by_key.at(universe[2]).label == BehaviorLabel::Unassociated);
  CHECK(by_key.at(universe[3]).label == BehaviorLabel::Generic);
  CHECK(by_key.at(universe[3]).specificity_eligible == false);
  CHECK(by_key.at(universe[4]).label == BehaviorLabel::GroupSpecific);
}

TEST_CASE("top_generic ranks by count with key ascending on ties") {
  std::vector<BehaviorClassification> classes;
  auto add = [&](const char* id, std::size_t count) {
    BehaviorClassification c;
    c.behavior = {BehaviorKind::Technique, id};
    c.group_count = count;
    c.label = count == 0 ? BehaviorLabel::Unassociated
                         : (count == 1 ? BehaviorLabel::GroupSpecific : BehaviorLabel::Generic);
    classes.push_back(c);
  };
  add("T2000", 5);
  add("T1000", 5);
  add("T3000", 9);
  add("T4000", 1);  // group-specific: excluded
  add("T5000", 0);  // unassociated: excluded
  auto top = top_generic(classes, 10);
  REQUIRE(top.size() == 3);
  CHECK(top[0].first.id == "T3000");
  CHECK(top[1].first.id == "T1000");
  CHECK(top[2].first.id == "T2000");
  CHECK(top_generic({}, 3).empty());
}

TEST_CASE("profile oracles: classification, specificity, jaccard, co-occurrence") {
  ctiprof::testing::SplitMix64 rng(0xC0FFEE);
  const Scope scopes[] = {Scope::Attack, Scope::Malpedia, Scope::Union};
  int trials = 1000;
  for (int trial = 0; trial < trials; ++trial) {
    MiniKb kb = random_mini_kb(rng);
    Scope scope = scopes[rng.below(3)];
    unsigned mask = 1 + static_cast<unsigned>(rng.below(15));

    auto ps = build_profiles(kb.groups, kb.associations, scope, mask);
    auto counts = oracle_counts(kb, scope, mask);

    // every group present, profile = admitted associations
    REQUIRE(ps.profiles.size() == kb.groups.size());

    auto classes = classify_behaviors(ps, kb.universe, kb.tool_classes);
    REQUIRE(classes.size() == counts.size());
    for (const auto& c : classes) {
      REQUIRE(c.group_count == counts.at(c.behavior));
      bool eligible = !(c.behavior.kind == BehaviorKind::Software &&
                        kb.tool_classes.count(c.behavior.id));
      REQUIRE(c.specificity_eligible == eligible);
      BehaviorLabel expect = c.group_count == 0 ? BehaviorLabel::Unassociated
                             : (c.group_count == 1 && eligible) ? BehaviorLabel::GroupSpecific
                                                                : BehaviorLabel::Generic;
      REQUIRE(c.label == expect);
    }

    // specificity summary against a direct recount
    auto summary = specificity_summary(ps, classes, kb.groups.size());
    std::size_t oracle_nonempty = 0;
    std::size_t oracle_specific = 0;
    for (const auto& g : kb.groups) {
      std::set<BehaviorKey> profile;
      for (const auto& a : kb.associations) {
        if (a.group_class == g.class_id && oracle_admits(scope, a.source) &&
            (oracle_bit(a) & mask)) {
          profile.insert(a.behavior);
        }
      }
      if (profile.empty()) continue;
      oracle_nonempty++;
      bool specific = false;
      for (const auto& key : profile) {
        bool eligible = !(key.kind == BehaviorKind::Software && kb.tool_classes.count(key.id));
        if (counts.at(key) == 1 && eligible) specific = true;
      }
      if (specific) oracle_specific++;
    }
    REQUIRE(summary.groups_nonempty == oracle_nonempty);
    REQUIRE(summary.groups_with_group_specific == oracle_specific);
    REQUIRE(summary.groups_with_group_specific <= summary.groups_nonempty);
    REQUIRE(summary.groups_nonempty <= summary.groups_total);

    // jaccard / co-occurrence against direct set arithmetic on two behaviors
    if (kb.universe.size() >= 2) {
      const auto& ka = kb.universe[rng.below(kb.universe.size())];
      const auto& kc = kb.universe[rng.below(kb.universe.size())];
      std::set<int> ga, gc;
      for (const auto& [g, profile] : ps.profiles) {
        if (profile.count(ka)) ga.insert(g);
        if (profile.count(kc)) gc.insert(g);
      }
      if (!ga.empty() || !gc.empty()) {
        std::size_t inter = 0;
        for (int g : ga) inter += gc.count(g);
        double expect = static_cast<double>(inter) /
                        static_cast<double>(std::max(ga.size(), gc.size()));
        REQUIRE(co_occurrence_rate(ga, gc) == doctest::Approx(expect));
        std::set<BehaviorKey> sa, sc;
        for (int g : ga) sa.insert({BehaviorKind::Technique, std::to_string(g)});
        for (int g : gc) sc.insert({BehaviorKind::Technique, std::to_string(g)});
        std::size_t uni = ga.size() + gc.size() - inter;
        double jexpect = uni == 0 ? 1.0 : static_cast<double>(inter) / uni;
        REQUIRE(jaccard(sa, sc) == doctest::Approx(jexpect));
        if (!ga.empty() && !gc.empty()) {
          REQUIRE(jaccard(sa, sc) <= co_occurrence_rate(ga, gc) + 1e-12);
        }
      }
    }

    // union scope equals the element-wise union of the per-source scopes
    if (scope == Scope::Union) {
      auto ps_a = build_profiles(kb.groups, kb.associations, Scope::Attack, mask);
      auto ps_m = build_profiles(kb.groups, kb.associations, Scope::Malpedia, mask);
      for (const auto& [g, profile] : ps.profiles) {
        std::set<BehaviorKey> expect = ps_a.profiles.at(g);
        const auto& mal = ps_m.profiles.at(g);
        expect.insert(mal.begin(), mal.end());
        REQUIRE(profile == expect);
      }
    }
  }
}

TEST_CASE("similarity stats exclude empty profiles and find planted pairs") {
  auto groups = make_groups(5);
  std::vector<ResolvedAssociation> assocs;
  auto add = [&](int g, const std::string& id) {
    ResolvedAssociation a;
    a.group_class = g;
    a.behavior = {BehaviorKind::Technique, id};
    a.source = Source::Attack;
    assocs.push_back(a);
  };
  // group 0: {a,b,c}; group 1: {a,b,d}; group 2: {e}; group 3: {f}; group 4 empty
  add(0, "a"); add(0, "b"); add(0, "c");
  add(1, "a"); add(1, "b"); add(1, "d");
  add(2, "e");
  add(3, "f");
  auto ps = build_profiles(groups, assocs, Scope::Union, kKindTechnique);
  auto stats = profile_similarity_stats(ps, 0.4);
  // pairs among groups 0..3 only: C(4,2) = 6
  CHECK(stats.pairs_counted == 6);
  CHECK(stats.max == doctest::Approx(0.5));
  REQUIRE(stats.pairs_at_or_above.size() == 1);
  CHECK(stats.pairs_at_or_above[0].group_a == 0);
  CHECK(stats.pairs_at_or_above[0].group_b == 1);
  // mean: pair(0,1)=0.5, all other pairs 0
  CHECK(stats.mean == doctest::Approx(0.5 / 6.0));
  CHECK(stats.median == doctest::Approx(0.0));

  SUBCASE("fewer than two non-empty profiles is an error") {
    auto lonely = build_profiles(make_groups(2), {}, Scope::Union, kKindTechnique);
    CHECK_THROWS_AS(profile_similarity_stats(lonely, 0.4), std::runtime_error);
  }

  SUBCASE("two identical non-empty profiles reach max 1.0") {
    std::vector<ResolvedAssociation> twin;
    for (int g : {0, 1}) {
      ResolvedAssociation a;
      a.group_class = g;
      a.behavior = {BehaviorKind::Technique, "same"};
      a.source = Source::Attack;
      twin.push_back(a);
    }
    auto tps = build_profiles(make_groups(2), twin, Scope::Union, kKindTechnique);
    CHECK(profile_similarity_stats(tps, 0.4).max == doctest::Approx(1.0));
  }
}

TEST_CASE("enlarging the kind mask or scope never shrinks coverage") {
  ctiprof::testing::SplitMix64 rng(0xAB1E);
  for (int trial = 0; trial < 50; ++trial) {
    MiniKb kb = random_mini_kb(rng);
    unsigned small_mask = kKindTechnique;
    unsigned big_mask = kKindTechnique | kKindSoftware | kKindVulnerability |
                        kKindTechniqueExtracted;
    auto narrow = build_profiles(kb.groups, kb.associations, Scope::Attack, small_mask);
    auto wide_mask = build_profiles(kb.groups, kb.associations, Scope::Attack, big_mask);
    auto wide_scope = build_profiles(kb.groups, kb.associations, Scope::Union, small_mask);
    CHECK(narrow.nonempty_count() <= wide_mask.nonempty_count());
    CHECK(narrow.nonempty_count() <= wide_scope.nonempty_count());
    for (const auto& [g, profile] : narrow.profiles) {
      const auto& wm = wide_mask.profiles.at(g);
      const auto& ws = wide_scope.profiles.at(g);
      CHECK(std::includes(wm.begin(), wm.end(), profile.begin(), profile.end()));
      CHECK(std::includes(ws.begin(), ws.end(), profile.begin(), profile.end()));
    }
  }
}

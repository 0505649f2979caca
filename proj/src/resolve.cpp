#include "ctiprof/resolve.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "ctiprof/csv.hpp"

namespace ctiprof {

namespace {

struct UnionFind {
  std::vector<int> parent;

  explicit UnionFind(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    // Deterministic: smaller index wins as root.
    if (a < b) parent[b] = a;
    else parent[a] = b;
  }
};

MemberRef member_of(const SourceEntity& e) { return {e.source, e.source_id}; }

bool pair_listed(const std::vector<std::pair<MemberRef, MemberRef>>& pairs,
                 const MemberRef& a, const MemberRef& b) {
  for (const auto& [x, y] : pairs) {
    if ((x == a && y == b) || (x == b && y == a)) return true;
  }
  return false;
}

}  // namespace

bool MergedEntity::has_source(Source s) const {
  return std::any_of(members.begin(), members.end(),
                     [&](const MemberRef& m) { return m.source == s; });
}

std::string canonical_name(const std::vector<const SourceEntity*>& members) {
  const SourceEntity* best_attack = nullptr;
  for (const auto* e : members) {
    if (e->source != Source::Attack) continue;
    if (!best_attack || e->source_id < best_attack->source_id) best_attack = e;
  }
  if (best_attack) return best_attack->primary_name();
  std::string best;
  for (const auto* e : members) {
    if (best.empty() || e->primary_name() < best) best = e->primary_name();
  }
  return best;
}

std::vector<MergedEntity> merge_entities(const std::vector<SourceEntity>& entities,
                                         EntityKind kind,
                                         const NormalizationRuleSet& rules,
                                         const MergeOverrides& overrides) {
  std::vector<const SourceEntity*> items;
  items.reserve(entities.size());
  for (const auto& e : entities) {
    if (e.kind == kind) items.push_back(&e);
  }
  // Canonicalize processing order so the result does not depend on input
  // order (ties in the union-find root choice would otherwise leak it).
  std::sort(items.begin(), items.end(), [](const SourceEntity* a, const SourceEntity* b) {
    return member_of(*a) < member_of(*b);
  });

  std::vector<std::set<std::string>> norm_names(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    for (const auto& name : items[i]->names) {
      if (name.empty()) continue;
      // No raw fallback here: a fully consumed name must not create edges.
      std::string n = rules.apply(name, /*fallback_to_raw=*/false);
      // Single-character tokens collide too easily to be merge evidence.
      if (n.size() < 2) continue;
      norm_names[i].insert(std::move(n));
    }
  }

  UnionFind uf(items.size());
  std::unordered_map<std::string, std::vector<int>> token_owners;
  for (std::size_t i = 0; i < items.size(); ++i) {
    for (const auto& n : norm_names[i]) token_owners[n].push_back(static_cast<int>(i));
  }
  for (const auto& [token, owners] : token_owners) {
    for (std::size_t k = 1; k < owners.size(); ++k) {
      int a = owners[0];
      int b = owners[k];
      if (pair_listed(overrides.force_split, member_of(*items[a]), member_of(*items[b]))) {
        // Direct edge suppressed; link b to the next non-split owner instead.
        bool linked = false;
        for (std::size_t j = 1; j < owners.size(); ++j) {
          if (j == k) continue;
          if (!pair_listed(overrides.force_split, member_of(*items[owners[j]]),
                           member_of(*items[b]))) {
            uf.unite(owners[j], b);
            linked = true;
            break;
          }
        }
        (void)linked;
        continue;
      }
      uf.unite(a, b);
    }
  }

  if (!overrides.force_merge.empty()) {
    std::map<MemberRef, int> by_ref;
    for (std::size_t i = 0; i < items.size(); ++i) by_ref[member_of(*items[i])] = static_cast<int>(i);
    for (const auto& [a, b] : overrides.force_merge) {
      auto ia = by_ref.find(a);
      auto ib = by_ref.find(b);
      if (ia != by_ref.end() && ib != by_ref.end()) uf.unite(ia->second, ib->second);
    }
  }

  std::map<int, std::vector<int>> components;
  for (std::size_t i = 0; i < items.size(); ++i) {
    components[uf.find(static_cast<int>(i))].push_back(static_cast<int>(i));
  }

  std::vector<MergedEntity> classes;
  classes.reserve(components.size());
  for (const auto& [root, idxs] : components) {
    MergedEntity cls;
    cls.kind = kind;
    std::vector<const SourceEntity*> members;
    for (int i : idxs) {
      members.push_back(items[i]);
      cls.members.push_back(member_of(*items[i]));
      cls.normalized_names.insert(norm_names[i].begin(), norm_names[i].end());
      if (items[i]->source == Source::Attack &&
          items[i]->software_kind == SoftwareKind::Tool) {
        cls.kind_hint = SoftwareKind::Tool;
      }
    }
    if (kind == EntityKind::Software && cls.kind_hint != SoftwareKind::Tool) {
      bool any_attack_malware =
          std::any_of(members.begin(), members.end(), [](const SourceEntity* e) {
            return e->source == Source::Attack &&
                   e->software_kind == SoftwareKind::Malware;
          });
      if (any_attack_malware) cls.kind_hint = SoftwareKind::Malware;
    }
    std::sort(cls.members.begin(), cls.members.end());
    cls.canonical_name = canonical_name(members);
    classes.push_back(std::move(cls));
  }

  std::sort(classes.begin(), classes.end(), [](const MergedEntity& a, const MergedEntity& b) {
    if (a.canonical_name != b.canonical_name) return a.canonical_name < b.canonical_name;
    return a.members.front() < b.members.front();
  });
  for (std::size_t i = 0; i < classes.size(); ++i) classes[i].class_id = static_cast<int>(i);
  return classes;
}

void write_merge_map_csv(std::ostream& out, const std::vector<MergedEntity>& classes) {
  out << csv_row({"source_entity", "class_id", "canonical_name"});
  for (const auto& cls : classes) {
    for (const auto& m : cls.members) {
      out << csv_row({std::string(to_string(m.source)) + ":" + m.source_id,
                      std::to_string(cls.class_id), cls.canonical_name});
    }
  }
}

MergeIndex::MergeIndex(const std::vector<MergedEntity>& classes) {
  for (const auto& cls : classes) {
    for (const auto& m : cls.members) index_.emplace_back(m, &cls);
  }
  std::sort(index_.begin(), index_.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
}

const MergedEntity* MergeIndex::find(Source source, const std::string& source_id) const {
  MemberRef key{source, source_id};
  auto it = std::lower_bound(index_.begin(), index_.end(), key,
                             [](const auto& e, const MemberRef& k) { return e.first < k; });
  if (it == index_.end() || !(it->first == key)) return nullptr;
  return it->second;
}

MergeOverrides load_merge_overrides(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open overrides file: " + path);
  MergeOverrides ov;
  std::string line;
  std::size_t lineno = 0;
  auto parse_ref = [&](const std::string& tok) -> MemberRef {
    auto colon = tok.find(':');
    if (colon == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected SOURCE:id, got '" + tok + "'");
    }
    std::string src = tok.substr(0, colon);
    MemberRef ref;
    if (src == "ATTACK") ref.source = Source::Attack;
    else if (src == "MALPEDIA") ref.source = Source::Malpedia;
    else
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": unknown source '" + src + "'");
    ref.source_id = tok.substr(colon + 1);
    return ref;
  };
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::string verb, a, b;
    if (!(ss >> verb)) continue;
    if (!(ss >> a >> b)) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected '<merge|split> SOURCE:id SOURCE:id'");
    }
    if (verb == "merge") ov.force_merge.emplace_back(parse_ref(a), parse_ref(b));
    else if (verb == "split") ov.force_split.emplace_back(parse_ref(a), parse_ref(b));
    else
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": unknown directive '" + verb + "'");
  }
  return ov;
}

}  // namespace ctiprof

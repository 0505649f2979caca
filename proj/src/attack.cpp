#include "ctiprof/attack.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

namespace ctiprof {

namespace {

using nlohmann::json;

bool is_filtered(const json& obj) {
  if (obj.value("revoked", false)) return true;
  if (obj.value("x_mitre_deprecated", false)) return true;
  return false;
}

// The "mitre-attack" (or mobile/ics) external reference carries the ATT&CK id.
std::string attack_external_id(const json& obj) {
  auto it = obj.find("external_references");
  if (it == obj.end() || !it->is_array()) return {};
  for (const auto& ref : *it) {
    std::string src = ref.value("source_name", "");
    if (src == "mitre-attack" || src == "mitre-mobile-attack" ||
        src == "mitre-ics-attack") {
      return ref.value("external_id", "");
    }
  }
  return {};
}

std::optional<Domain> domain_from_string(const std::string& s) {
  if (s == "enterprise-attack") return Domain::Enterprise;
  if (s == "mobile-attack") return Domain::Mobile;
  if (s == "ics-attack") return Domain::Ics;
  return std::nullopt;
}

std::vector<std::string> names_with_aliases(const json& obj, const char* alias_field) {
  std::vector<std::string> names;
  std::string primary = obj.value("name", "");
  if (!primary.empty()) names.push_back(primary);
  auto it = obj.find(alias_field);
  if (it != obj.end() && it->is_array()) {
    for (const auto& a : *it) {
      if (!a.is_string()) continue;
      std::string s = a.get<std::string>();
      if (s.empty()) continue;
      if (std::find(names.begin(), names.end(), s) == names.end()) names.push_back(s);
    }
  }
  return names;
}

struct BundleState {
  AttackSnapshot snap;
  std::unordered_map<std::string, std::string> stix_to_group;      // stix id -> Gxxxx
  std::unordered_map<std::string, std::string> stix_to_technique;  // stix id -> Txxxx
  std::unordered_map<std::string, std::string> stix_to_software;   // stix id -> Sxxxx
  std::map<std::pair<std::string, std::string>, std::string> tactic_ids;  // (domain, shortname) -> TAxxxx
  std::map<std::string, std::string> tactic_ids_any_domain;
  std::vector<json> pending_relationships;
  std::vector<std::pair<std::string, json>> pending_tactic_refs;  // technique id, kill_chain_phases
  std::unordered_set<std::string> seen_stix_ids;
  std::map<std::string, ReportRef> refs_by_url;
};

void ingest_external_report_refs(BundleState& st, const json& obj,
                                 const std::string& entity_id, EntityKind kind,
                                 bool is_technique = false) {
  auto it = obj.find("external_references");
  if (it == obj.end() || !it->is_array()) return;
  for (const auto& ref : *it) {
    std::string src = ref.value("source_name", "");
    if (src == "mitre-attack" || src == "mitre-mobile-attack" ||
        src == "mitre-ics-attack") {
      continue;  // the entity's own catalog page, not a report
    }
    std::string url = ref.value("url", "");
    if (url.empty()) continue;
    ReportRef& r = st.refs_by_url[url];
    if (r.url.empty()) {
      r.url = url;
      r.fqdn = fqdn_of_url(url);
      r.source = Source::Attack;
      std::string desc = ref.value("description", "");
      if (!desc.empty()) r.title = desc;
    }
    if (is_technique) r.linked_techniques.insert(entity_id);
    else if (kind == EntityKind::Group) r.linked_groups.insert(entity_id);
    else r.linked_software.insert(entity_id);
  }
}

void ingest_object(BundleState& st, const json& obj) {
  std::string type = obj.value("type", "");
  std::string stix_id = obj.value("id", "");
  if (!stix_id.empty() && !st.seen_stix_ids.insert(stix_id).second) return;

  if (type == "relationship") {
    st.pending_relationships.push_back(obj);
    return;
  }
  if (is_filtered(obj)) {
    if (obj.value("revoked", false)) st.snap.diagnostics.revoked_filtered++;
    else st.snap.diagnostics.deprecated_filtered++;
    return;
  }

  if (type == "x-mitre-collection") {
    std::string v = obj.value("x_mitre_version", "");
    if (!v.empty()) st.snap.version = v;
    return;
  }
  if (type == "x-mitre-tactic") {
    std::string ta = attack_external_id(obj);
    std::string shortname = obj.value("x_mitre_shortname", "");
    if (!ta.empty() && !shortname.empty()) {
      st.tactic_ids_any_domain[shortname] = ta;
      auto doms = obj.find("x_mitre_domains");
      if (doms != obj.end() && doms->is_array()) {
        for (const auto& d : *doms) {
          if (d.is_string()) st.tactic_ids[{d.get<std::string>(), shortname}] = ta;
        }
      }
    }
    return;
  }
  if (type == "intrusion-set") {
    std::string gid = attack_external_id(obj);
    auto names = names_with_aliases(obj, "aliases");
    if (gid.empty() || names.empty()) {
      st.snap.diagnostics.malformed_entries++;
      st.snap.diagnostics.warnings.push_back("intrusion-set without id or name: " + stix_id);
      return;
    }
    SourceEntity e;
    e.kind = EntityKind::Group;
    e.source = Source::Attack;
    e.source_id = gid;
    e.names = std::move(names);
    st.snap.groups.push_back(std::move(e));
    st.stix_to_group[stix_id] = gid;
    ingest_external_report_refs(st, obj, gid, EntityKind::Group);
    return;
  }
  if (type == "attack-pattern") {
    std::string tid = attack_external_id(obj);
    if (tid.empty()) {
      st.snap.diagnostics.malformed_entries++;
      st.snap.diagnostics.warnings.push_back("attack-pattern without ATT&CK id: " + stix_id);
      return;
    }
    TechniqueEntry t;
    t.id = tid;
    t.name = obj.value("name", "");
    auto doms = obj.find("x_mitre_domains");
    bool have_domain = false;
    if (doms != obj.end() && doms->is_array() && !doms->empty()) {
      if (auto d = domain_from_string((*doms)[0].get<std::string>())) {
        t.domain = *d;
        have_domain = true;
      }
      if (doms->size() > 1) {
        st.snap.diagnostics.warnings.push_back("technique " + tid +
                                               " lists multiple domains; using first");
      }
    }
    if (!have_domain) t.domain = Domain::Enterprise;
    auto dot = tid.find('.');
    if (dot != std::string::npos) t.parent_id = tid.substr(0, dot);
    auto phases = obj.find("kill_chain_phases");
    if (phases != obj.end() && phases->is_array()) {
      st.pending_tactic_refs.emplace_back(tid, *phases);
    }
    st.stix_to_technique[stix_id] = tid;
    ingest_external_report_refs(st, obj, tid, EntityKind::Group, /*is_technique=*/true);
    st.snap.techniques.push_back(std::move(t));
    return;
  }
  if (type == "malware" || type == "tool") {
    std::string sid = attack_external_id(obj);
    auto names = names_with_aliases(obj, "x_mitre_aliases");
    if (sid.empty() || names.empty()) {
      st.snap.diagnostics.malformed_entries++;
      st.snap.diagnostics.warnings.push_back(type + " without id or name: " + stix_id);
      return;
    }
    SoftwareEntry e;
    e.id = sid;
    e.names = std::move(names);
    e.kind = type == "tool" ? SoftwareKind::Tool : SoftwareKind::Malware;
    e.source = Source::Attack;
    st.stix_to_software[stix_id] = sid;
    ingest_external_report_refs(st, obj, sid, EntityKind::Software);
    st.snap.software.push_back(std::move(e));
    return;
  }

  st.snap.diagnostics.skipped_object_types[type.empty() ? "(untyped)" : type]++;
}

void resolve_relationships(BundleState& st) {
  for (const auto& rel : st.pending_relationships) {
    if (is_filtered(rel)) {
      st.snap.diagnostics.revoked_filtered += rel.value("revoked", false) ? 1 : 0;
      st.snap.diagnostics.deprecated_filtered += rel.value("x_mitre_deprecated", false) ? 1 : 0;
      continue;
    }
    if (rel.value("relationship_type", "") != "uses") {
      st.snap.diagnostics.ignored_relationships++;
      continue;
    }
    std::string src = rel.value("source_ref", "");
    std::string dst = rel.value("target_ref", "");
    auto git = st.stix_to_group.find(src);
    if (git == st.stix_to_group.end()) {
      // Software->technique and other "uses" edges are not group associations.
      st.snap.diagnostics.ignored_relationships++;
      continue;
    }
    Association a;
    a.group_id = git->second;
    a.provenance = Provenance::AttackCatalog;
    a.source = Source::Attack;
    if (auto tit = st.stix_to_technique.find(dst); tit != st.stix_to_technique.end()) {
      a.behavior_id = tit->second;
      a.behavior_kind = BehaviorKind::Technique;
    } else if (auto sit = st.stix_to_software.find(dst); sit != st.stix_to_software.end()) {
      a.behavior_id = sit->second;
      a.behavior_kind = BehaviorKind::Software;
    } else {
      // Target revoked, deprecated, or not part of this bundle.
      st.snap.diagnostics.ignored_relationships++;
      continue;
    }
    st.snap.associations.push_back(std::move(a));
  }
}

void resolve_tactics(BundleState& st) {
  std::map<std::string, TechniqueEntry*> by_id;
  for (auto& t : st.snap.techniques) by_id[t.id] = &t;
  for (const auto& [tid, phases] : st.pending_tactic_refs) {
    auto it = by_id.find(tid);
    if (it == by_id.end()) continue;
    std::string domain_key;
    switch (it->second->domain) {
      case Domain::Enterprise: domain_key = "enterprise-attack"; break;
      case Domain::Mobile: domain_key = "mobile-attack"; break;
      case Domain::Ics: domain_key = "ics-attack"; break;
    }
    for (const auto& phase : phases) {
      std::string shortname = phase.value("phase_name", "");
      if (shortname.empty()) continue;
      auto exact = st.tactic_ids.find({domain_key, shortname});
      if (exact != st.tactic_ids.end()) {
        it->second->tactic_ids.insert(exact->second);
      } else if (auto any = st.tactic_ids_any_domain.find(shortname);
                 any != st.tactic_ids_any_domain.end()) {
        it->second->tactic_ids.insert(any->second);
      }
    }
  }
}

void finalize(BundleState& st) {
  resolve_relationships(st);
  resolve_tactics(st);

  auto& snap = st.snap;
  std::sort(snap.groups.begin(), snap.groups.end(),
            [](const SourceEntity& a, const SourceEntity& b) { return a.source_id < b.source_id; });
  std::sort(snap.techniques.begin(), snap.techniques.end(),
            [](const TechniqueEntry& a, const TechniqueEntry& b) { return a.id < b.id; });
  std::sort(snap.software.begin(), snap.software.end(),
            [](const SoftwareEntry& a, const SoftwareEntry& b) { return a.id < b.id; });

  // Associations whose endpoints were filtered out must not survive.
  std::unordered_set<std::string> live_groups, live_behaviors;
  for (const auto& g : snap.groups) live_groups.insert(g.source_id);
  for (const auto& t : snap.techniques) live_behaviors.insert(t.id);
  for (const auto& s : snap.software) live_behaviors.insert(s.id);
  std::erase_if(snap.associations, [&](const Association& a) {
    return !live_groups.count(a.group_id) || !live_behaviors.count(a.behavior_id);
  });
  std::sort(snap.associations.begin(), snap.associations.end(),
            [](const Association& a, const Association& b) {
              return std::tie(a.group_id, a.behavior_kind, a.behavior_id) <
                     std::tie(b.group_id, b.behavior_kind, b.behavior_id);
            });
  snap.associations.erase(
      std::unique(snap.associations.begin(), snap.associations.end(),
                  [](const Association& a, const Association& b) {
                    return a.group_id == b.group_id && a.behavior_id == b.behavior_id &&
                           a.behavior_kind == b.behavior_kind;
                  }),
      snap.associations.end());

  snap.report_refs.reserve(st.refs_by_url.size());
  for (auto& [url, ref] : st.refs_by_url) snap.report_refs.push_back(std::move(ref));
}

void ingest_bundle_text(BundleState& st, std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("STIX bundle parse error at byte " + std::to_string(e.byte) +
                             ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("objects") || !doc["objects"].is_array()) {
    throw std::runtime_error("STIX bundle parse error at byte 0: missing \"objects\" array");
  }
  for (const auto& obj : doc["objects"]) {
    if (!obj.is_object()) {
      st.snap.diagnostics.malformed_entries++;
      continue;
    }
    ingest_object(st, obj);
  }
}

}  // namespace

std::size_t AttackSnapshot::subtechnique_count() const {
  return static_cast<std::size_t>(
      std::count_if(techniques.begin(), techniques.end(),
                    [](const TechniqueEntry& t) { return t.is_subtechnique(); }));
}

std::size_t AttackSnapshot::domain_count(Domain d) const {
  return static_cast<std::size_t>(
      std::count_if(techniques.begin(), techniques.end(),
                    [d](const TechniqueEntry& t) { return t.domain == d; }));
}

AttackSnapshot load_attack_bundle(std::string_view bundle_json) {
  BundleState st;
  ingest_bundle_text(st, bundle_json);
  finalize(st);
  return std::move(st.snap);
}

AttackSnapshot load_attack_bundles(const std::vector<std::string>& paths) {
  BundleState st;
  for (const auto& path : paths) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open STIX bundle: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
      ingest_bundle_text(st, buf.str());
    } catch (const std::runtime_error& e) {
      throw std::runtime_error(path + ": " + e.what());
    }
  }
  finalize(st);
  return std::move(st.snap);
}

std::vector<ReportRef> attack_group_report_urls(const AttackSnapshot& snapshot) {
  std::vector<ReportRef> out;
  for (const auto& ref : snapshot.report_refs) {
    if (!ref.linked_groups.empty()) out.push_back(ref);
  }
  std::sort(out.begin(), out.end(),
            [](const ReportRef& a, const ReportRef& b) { return a.url < b.url; });
  return out;
}

}  // namespace ctiprof

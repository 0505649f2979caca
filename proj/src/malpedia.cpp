#include "ctiprof/malpedia.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "ctiprof/bibtex.hpp"
#include "json.hpp"

namespace ctiprof {

namespace {

using nlohmann::json;

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

json parse_or_throw(std::string_view text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string(what) + " parse error at byte " +
                             std::to_string(e.byte) + ": " + e.what());
  }
}

std::vector<std::string> string_list(const json& obj, const char* field) {
  std::vector<std::string> out;
  auto it = obj.find(field);
  if (it == obj.end() || !it->is_array()) return out;
  for (const auto& v : *it) {
    if (v.is_string() && !v.get<std::string>().empty()) out.push_back(v.get<std::string>());
  }
  return out;
}

// Accepts both {"meta": {"synonyms": [...], "refs": [...]}} (MISP-galaxy
// style, as served by the actors endpoint) and flat fields.
std::vector<std::string> actor_synonyms(const json& obj) {
  if (obj.contains("meta") && obj["meta"].is_object()) {
    auto syn = string_list(obj["meta"], "synonyms");
    if (!syn.empty()) return syn;
  }
  return string_list(obj, "synonyms");
}

std::vector<std::string> actor_refs(const json& obj) {
  if (obj.contains("meta") && obj["meta"].is_object()) {
    auto refs = string_list(obj["meta"], "refs");
    if (!refs.empty()) return refs;
  }
  return string_list(obj, "refs");
}

}  // namespace

MalpediaSnapshot load_malpedia(std::string_view actors_json,
                               std::string_view families_json,
                               std::string_view library_bibtex) {
  MalpediaSnapshot snap;

  json actors = parse_or_throw(actors_json, "Malpedia actors dump");
  json families = parse_or_throw(families_json, "Malpedia families dump");
  if (!actors.is_object() || !families.is_object()) {
    throw std::runtime_error("Malpedia dumps must be JSON objects keyed by entity id");
  }

  // Actors.
  std::unordered_map<std::string, std::string> actor_by_name;  // lowered name -> key
  std::map<std::string, std::vector<std::string>> refs_of_actor;
  std::unordered_set<std::string> seen_keys;
  for (const auto& [key, obj] : actors.items()) {
    if (!obj.is_object()) {
      snap.diagnostics.malformed_entries++;
      continue;
    }
    if (!seen_keys.insert(key).second) {
      snap.diagnostics.warnings.push_back("duplicate actor key: " + key);
      continue;
    }
    SourceEntity e;
    e.kind = EntityKind::Group;
    e.source = Source::Malpedia;
    e.source_id = key;
    std::string display = obj.value("value", "");
    e.names.push_back(display.empty() ? key : display);
    for (auto& syn : actor_synonyms(obj)) {
      if (std::find(e.names.begin(), e.names.end(), syn) == e.names.end()) {
        e.names.push_back(syn);
      }
    }
    actor_by_name[lower(key)] = key;
    for (const auto& n : e.names) actor_by_name.emplace(lower(n), key);
    refs_of_actor[key] = actor_refs(obj);
    snap.groups.push_back(std::move(e));
  }

  // Families.
  std::map<std::string, std::vector<std::string>> urls_of_family;
  for (const auto& [key, obj] : families.items()) {
    if (!obj.is_object()) {
      snap.diagnostics.malformed_entries++;
      continue;
    }
    if (!seen_keys.insert(key).second) {
      snap.diagnostics.warnings.push_back("duplicate family key: " + key);
      continue;
    }
    SoftwareEntry e;
    e.id = key;
    e.kind = SoftwareKind::Unknown;
    e.source = Source::Malpedia;
    std::string common = obj.value("common_name", "");
    e.names.push_back(common.empty() ? key : common);
    for (auto& alt : string_list(obj, "alt_names")) {
      if (std::find(e.names.begin(), e.names.end(), alt) == e.names.end()) {
        e.names.push_back(alt);
      }
    }
    urls_of_family[key] = string_list(obj, "urls");

    // Family-to-actor attribution is the catalog source for group->software
    // associations. Attribution strings may be actor keys or display names.
    for (const auto& attributed : string_list(obj, "attribution")) {
      auto it = actor_by_name.find(lower(attributed));
      if (it == actor_by_name.end()) {
        snap.diagnostics.skipped_object_types["attribution_without_actor"]++;
        continue;
      }
      Association a;
      a.group_id = it->second;
      a.behavior_id = key;
      a.behavior_kind = BehaviorKind::Software;
      a.provenance = Provenance::MalpediaCatalog;
      a.source = Source::Malpedia;
      snap.associations.push_back(std::move(a));
    }
    snap.software.push_back(std::move(e));
  }

  // Report library. BibTeX gives the URL universe and metadata; the actor and
  // family reference lists label each URL.
  BibParseResult bib = parse_bibtex(library_bibtex);
  snap.diagnostics.malformed_entries += bib.malformed_skipped;
  for (auto& w : bib.warnings) snap.diagnostics.warnings.push_back(std::move(w));

  std::map<std::string, ReportRef> refs_by_url;
  for (const auto& entry : bib.entries) {
    const std::string* url = entry.field("url");
    if (!url || url->empty()) {
      snap.diagnostics.entries_without_url++;
      continue;
    }
    ReportRef& r = refs_by_url[*url];
    if (r.url.empty()) {
      r.url = *url;
      r.fqdn = fqdn_of_url(*url);
      r.source = Source::Malpedia;
    }
    if (!r.title) {
      if (const std::string* t = entry.field("title"); t && !t->empty()) r.title = *t;
    }
    if (!r.author) {
      if (const std::string* a = entry.field("author"); a && !a->empty()) r.author = *a;
    }
    if (!r.published) {
      if (const std::string* d = entry.field("date"); d && !d->empty()) r.published = *d;
      else if (const std::string* y = entry.field("year"); y && !y->empty()) r.published = *y;
    }
  }

  for (const auto& [actor, urls] : refs_of_actor) {
    for (const auto& url : urls) {
      auto it = refs_by_url.find(url);
      if (it == refs_by_url.end()) {
        snap.diagnostics.skipped_object_types["ref_url_not_in_library"]++;
        continue;
      }
      it->second.linked_groups.insert(actor);
    }
  }
  for (const auto& [family, urls] : urls_of_family) {
    for (const auto& url : urls) {
      auto it = refs_by_url.find(url);
      if (it == refs_by_url.end()) {
        snap.diagnostics.skipped_object_types["ref_url_not_in_library"]++;
        continue;
      }
      it->second.linked_software.insert(family);
    }
  }

  snap.report_refs.reserve(refs_by_url.size());
  for (auto& [url, ref] : refs_by_url) snap.report_refs.push_back(std::move(ref));

  std::sort(snap.groups.begin(), snap.groups.end(),
            [](const SourceEntity& a, const SourceEntity& b) { return a.source_id < b.source_id; });
  std::sort(snap.software.begin(), snap.software.end(),
            [](const SoftwareEntry& a, const SoftwareEntry& b) { return a.id < b.id; });
  std::sort(snap.associations.begin(), snap.associations.end(),
            [](const Association& a, const Association& b) {
              return std::tie(a.group_id, a.behavior_id) < std::tie(b.group_id, b.behavior_id);
            });
  snap.associations.erase(
      std::unique(snap.associations.begin(), snap.associations.end(),
                  [](const Association& a, const Association& b) {
                    return a.group_id == b.group_id && a.behavior_id == b.behavior_id;
                  }),
      snap.associations.end());
  return snap;
}

MalpediaSnapshot load_malpedia_files(const std::string& actors_path,
                                     const std::string& families_path,
                                     const std::string& bib_path) {
  auto slurp = [](const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  };
  return load_malpedia(slurp(actors_path), slurp(families_path), slurp(bib_path));
}

std::vector<ReportRef> single_group_reports(const MalpediaSnapshot& snapshot) {
  std::vector<ReportRef> out;
  for (const auto& ref : snapshot.report_refs) {
    if (ref.linked_groups.size() == 1) out.push_back(ref);
  }
  return out;
}

}  // namespace ctiprof

#include "ctiprof/extract.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <ostream>
#include <regex>
#include <stdexcept>

#include "json.hpp"

namespace ctiprof {

namespace {

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

const std::regex& cve_regex() {
  static const std::regex re(R"(\bCVE-\d{4}-\d{4,7}\b)",
                             std::regex::ECMAScript | std::regex::icase |
                                 std::regex::optimize);
  return re;
}

const std::regex& technique_regex() {
  static const std::regex re(R"(\bT\d{4}(\.\d{3})?\b)",
                             std::regex::ECMAScript | std::regex::optimize);
  return re;
}

// Rewrites tolerated separator variants ("CVE 2017 0199", "CVE–2017–0199")
// into canonical hyphen form so one regex handles both.
std::string normalize_cve_separators(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  auto is_sep_at = [&](std::size_t pos, std::size_t& len) {
    if (pos >= text.size()) return false;
    char c = text[pos];
    if (c == ' ' || c == '-') {
      len = 1;
      return true;
    }
    // en dash / em dash in UTF-8
    if (pos + 2 < text.size() && static_cast<unsigned char>(c) == 0xE2 &&
        static_cast<unsigned char>(text[pos + 1]) == 0x80 &&
        (static_cast<unsigned char>(text[pos + 2]) == 0x93 ||
         static_cast<unsigned char>(text[pos + 2]) == 0x94)) {
      len = 3;
      return true;
    }
    return false;
  };
  while (i < text.size()) {
    bool left_ok = (i == 0) || !is_word_char(text[i - 1]);
    if (left_ok && i + 3 <= text.size() &&
        (text[i] == 'C' || text[i] == 'c') &&
        (text[i + 1] == 'V' || text[i + 1] == 'v') &&
        (text[i + 2] == 'E' || text[i + 2] == 'e')) {
      std::size_t sep1 = 0, sep2 = 0;
      std::size_t p = i + 3;
      if (is_sep_at(p, sep1) && p + sep1 + 4 <= text.size()) {
        std::size_t year = p + sep1;
        bool year_ok = true;
        for (std::size_t k = 0; k < 4; ++k) {
          year_ok = year_ok && std::isdigit(static_cast<unsigned char>(text[year + k]));
        }
        if (year_ok && is_sep_at(year + 4, sep2) && year + 4 + sep2 < text.size() &&
            std::isdigit(static_cast<unsigned char>(text[year + 4 + sep2]))) {
          out += text.substr(i, 3);
          out.push_back('-');
          out += text.substr(year, 4);
          out.push_back('-');
          i = year + 4 + sep2;
          continue;
        }
      }
    }
    out.push_back(text[i]);
    ++i;
  }
  return out;
}

}  // namespace

std::string refang(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (i + 3 <= text.size() && text.compare(i, 3, "[.]") == 0) {
      out.push_back('.');
      i += 3;
      continue;
    }
    out.push_back(text[i]);
    ++i;
  }
  return out;
}

std::set<std::string> extract_cve_ids(std::string_view text,
                                      const ExtractionOptions& options) {
  std::string prepared = refang(text);
  if (options.cve_separator_tolerance) {
    prepared = normalize_cve_separators(prepared);
  }
  std::set<std::string> out;
  auto begin = std::sregex_iterator(prepared.begin(), prepared.end(), cve_regex());
  for (auto it = begin; it != std::sregex_iterator(); ++it) {
    out.insert(upper(it->str()));
  }
  return out;
}

TechniqueExtraction extract_technique_ids(std::string_view text,
                                          const std::set<std::string>& taxonomy,
                                          const ExtractionOptions&) {
  std::string prepared = refang(text);
  TechniqueExtraction out;
  auto begin = std::sregex_iterator(prepared.begin(), prepared.end(), technique_regex());
  for (auto it = begin; it != std::sregex_iterator(); ++it) {
    std::string id = it->str();
    if (taxonomy.empty() || taxonomy.count(id)) out.known.insert(std::move(id));
    else out.unknown.insert(std::move(id));
  }
  return out;
}

CorpusExtraction extract_from_corpus(const CorpusCache& cache,
                                     const std::vector<ReportRef>& refs,
                                     const std::set<std::string>& taxonomy,
                                     const ExtractionOptions& options) {
  CorpusExtraction out;
  for (const auto& ref : refs) {
    auto doc = load_document(cache, ref);
    if (!doc || !doc->status.ok() || doc->content_sha256.empty()) {
      out.skipped++;
      continue;
    }
    ExtractionRecord rec;
    rec.ref = ref;
    rec.report_sha256 = doc->content_sha256;
    rec.cves = extract_cve_ids(doc->text, options);
    TechniqueExtraction tech = extract_technique_ids(doc->text, taxonomy, options);
    rec.technique_ids = std::move(tech.known);
    rec.unknown_technique_ids = std::move(tech.unknown);
    out.records.push_back(std::move(rec));
  }
  return out;
}

std::vector<Association> assign_extractions(std::vector<ExtractionRecord>& records,
                                            const MergeIndex& groups) {
  std::vector<Association> out;
  for (auto& rec : records) {
    rec.assigned_group_classes.clear();
    if (rec.ref.linked_groups.empty()) continue;

    std::set<int> classes;
    for (const auto& gid : rec.ref.linked_groups) {
      const MergedEntity* cls = groups.find(rec.ref.source, gid);
      if (!cls) {
        throw std::runtime_error("report " + rec.ref.url + " linked to group " +
                                 gid + " absent from merge map");
      }
      classes.insert(cls->class_id);
    }
    // ATT&CK citations are per-group by construction; Malpedia reports
    // qualify only when their groups collapse to one merged class.
    if (rec.ref.source == Source::Malpedia && classes.size() != 1) continue;
    rec.assigned_group_classes.assign(classes.begin(), classes.end());

    for (const auto& gid : rec.ref.linked_groups) {
      auto emit = [&](const std::string& behavior_id, BehaviorKind kind) {
        Association a;
        a.group_id = gid;
        a.behavior_id = behavior_id;
        a.behavior_kind = kind;
        a.provenance = Provenance::ReportExtracted;
        a.source = rec.ref.source;
        a.evidence = rec.ref;
        out.push_back(std::move(a));
      };
      for (const auto& cve : rec.cves) emit(cve, BehaviorKind::Vulnerability);
      for (const auto& tid : rec.technique_ids) emit(tid, BehaviorKind::Technique);
      if (rec.ref.source == Source::Malpedia) break;  // one class, one emission
    }
  }
  return out;
}

ProfileSet build_vulnerability_profiles(
    const std::vector<MergedEntity>& group_classes,
    const std::vector<ResolvedAssociation>& extracted, Scope scope) {
  return build_profiles(group_classes, extracted, scope, kKindVulnerability);
}

ProfileSet build_extended_technique_profiles(
    const std::vector<MergedEntity>& group_classes,
    const std::vector<ResolvedAssociation>& catalog,
    const std::vector<ResolvedAssociation>& extracted, Scope scope) {
  std::vector<ResolvedAssociation> all;
  all.reserve(catalog.size() + extracted.size());
  all.insert(all.end(), catalog.begin(), catalog.end());
  all.insert(all.end(), extracted.begin(), extracted.end());
  return build_profiles(group_classes, all, scope,
                        kKindTechnique | kKindTechniqueExtracted);
}

void write_extraction_jsonl(std::ostream& out,
                            const std::vector<ExtractionRecord>& records,
                            const std::vector<MergedEntity>& group_classes) {
  std::map<int, const MergedEntity*> by_class;
  for (const auto& cls : group_classes) by_class[cls.class_id] = &cls;
  for (const auto& rec : records) {
    nlohmann::json line;
    line["sha256"] = rec.report_sha256;
    line["url"] = rec.ref.url;
    if (rec.assigned_group_classes.size() == 1) {
      auto it = by_class.find(rec.assigned_group_classes.front());
      line["group"] = it != by_class.end() ? nlohmann::json(it->second->canonical_name)
                                           : nlohmann::json(nullptr);
    } else {
      line["group"] = nullptr;
    }
    nlohmann::json names = nlohmann::json::array();
    for (int c : rec.assigned_group_classes) {
      auto it = by_class.find(c);
      if (it != by_class.end()) names.push_back(it->second->canonical_name);
    }
    line["groups"] = std::move(names);
    line["cves"] = rec.cves;
    line["techniques"] = rec.technique_ids;
    if (!rec.unknown_technique_ids.empty()) {
      line["unknown_techniques"] = rec.unknown_technique_ids;
    }
    out << line.dump() << "\n";
  }
}

std::vector<ExtractionSummaryRow> extraction_summary(
    const std::vector<ExtractionRecord>& records) {
  struct Tally {
    std::set<std::string> report_keys;
    std::set<std::string> reports_with_cves;
    std::set<std::string> cves;
    std::set<int> groups_with_cves;
    std::set<std::string> reports_with_tech;
    std::set<std::string> tech;
    std::set<int> groups_with_tech;
  };
  Tally attack, malpedia, all;

  for (const auto& rec : records) {
    if (rec.assigned_group_classes.empty()) continue;
    Tally* row = rec.ref.source == Source::Attack ? &attack : &malpedia;
    // Per-source rows count reports by URL; the combined row dedups by hash.
    for (auto* t : {row, &all}) {
      const std::string& key = t == &all ? rec.report_sha256 : rec.ref.url;
      t->report_keys.insert(key);
      if (!rec.cves.empty()) {
        t->reports_with_cves.insert(key);
        t->cves.insert(rec.cves.begin(), rec.cves.end());
        t->groups_with_cves.insert(rec.assigned_group_classes.begin(),
                                   rec.assigned_group_classes.end());
      }
      if (!rec.technique_ids.empty()) {
        t->reports_with_tech.insert(key);
        t->tech.insert(rec.technique_ids.begin(), rec.technique_ids.end());
        t->groups_with_tech.insert(rec.assigned_group_classes.begin(),
                                   rec.assigned_group_classes.end());
      }
    }
  }

  auto to_row = [](const std::string& name, const Tally& t) {
    ExtractionSummaryRow r;
    r.dataset = name;
    r.reports = t.report_keys.size();
    r.reports_with_cves = t.reports_with_cves.size();
    r.unique_cves = t.cves.size();
    r.groups_with_cves = t.groups_with_cves.size();
    r.reports_with_techniques = t.reports_with_tech.size();
    r.unique_techniques = t.tech.size();
    r.groups_with_techniques = t.groups_with_tech.size();
    return r;
  };
  return {to_row("ATT&CK", attack), to_row("Malpedia", malpedia), to_row("All", all)};
}

ExtractionAudit compute_extraction_audit(
    const std::vector<ExtractionRecord>& records,
    const std::vector<ResolvedAssociation>& catalog_associations) {
  ExtractionAudit audit;
  std::map<int, std::set<std::string>> cataloged_by_group;
  for (const auto& a : catalog_associations) {
    if (a.behavior.kind != BehaviorKind::Technique) continue;
    audit.cataloged_ids.insert(a.behavior.id);
    cataloged_by_group[a.group_class].insert(a.behavior.id);
  }
  std::map<int, std::set<std::string>> extracted_by_group;
  for (const auto& rec : records) {
    if (rec.assigned_group_classes.empty() || rec.technique_ids.empty()) continue;
    audit.reports_with_techniques++;
    audit.extracted_ids.insert(rec.technique_ids.begin(), rec.technique_ids.end());
    for (int g : rec.assigned_group_classes) {
      extracted_by_group[g].insert(rec.technique_ids.begin(), rec.technique_ids.end());
    }
  }
  for (const auto& id : audit.extracted_ids) {
    if (!audit.cataloged_ids.count(id)) audit.extracted_not_cataloged.insert(id);
  }
  for (const auto& [g, extracted] : extracted_by_group) {
    const auto& cataloged = cataloged_by_group[g];
    std::size_t fresh = 0;
    for (const auto& id : extracted) {
      if (!cataloged.count(id)) ++fresh;
    }
    audit.per_group[g] = {cataloged.size(), extracted.size(), fresh};
  }
  return audit;
}

}  // namespace ctiprof

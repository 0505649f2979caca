#include "ctiprof/overlap.hpp"

#include <algorithm>
#include <set>

namespace ctiprof {

namespace {

OverlapRow make_row(const std::string& label, const std::set<std::string>& a,
                    const std::set<std::string>& m) {
  OverlapRow row;
  row.label = label;
  row.attack = a.size();
  row.malpedia = m.size();
  std::size_t inter = 0;
  for (const auto& x : a) inter += m.count(x);
  std::size_t uni = a.size() + m.size() - inter;
  row.intersection = inter;
  row.union_size = uni;
  if (uni > 0) row.jaccard = static_cast<double>(inter) / static_cast<double>(uni);
  return row;
}

std::string opt_count(const std::optional<std::size_t>& v) {
  return v ? std::to_string(*v) : "-";
}

}  // namespace

const OverlapRow* Table1Record::row(const std::string& label) const {
  for (const auto& r : rows) {
    if (r.label == label) return &r;
  }
  return nullptr;
}

Table1Record dataset_overlap_summary(const AttackSnapshot& attack,
                                     const MalpediaSnapshot& malpedia,
                                     const std::vector<MergedEntity>& group_classes,
                                     const std::vector<MergedEntity>& software_classes,
                                     const CorpusSummary* corpus) {
  Table1Record rec;

  // Entity rows: source counts are raw entries; intersection and union are
  // measured in merged-class space.
  auto class_row = [](const std::string& label, std::size_t attack_entries,
                      std::size_t malpedia_entries,
                      const std::vector<MergedEntity>& classes) {
    OverlapRow row;
    row.label = label;
    row.attack = attack_entries;
    row.malpedia = malpedia_entries;
    std::size_t both = 0;
    for (const auto& cls : classes) {
      if (cls.has_source(Source::Attack) && cls.has_source(Source::Malpedia)) ++both;
    }
    row.intersection = both;
    row.union_size = classes.size();
    if (!classes.empty()) {
      row.jaccard = static_cast<double>(both) / static_cast<double>(classes.size());
    }
    return row;
  };
  rec.rows.push_back(class_row("Groups", attack.groups.size(), malpedia.groups.size(),
                               group_classes));

  OverlapRow tech;
  tech.label = "Techniques";
  tech.attack = attack.techniques.size();
  tech.union_size = attack.techniques.size();  // only ATT&CK has a taxonomy
  rec.rows.push_back(tech);

  rec.rows.push_back(class_row("Software", attack.software.size(),
                               malpedia.software.size(), software_classes));

  std::set<std::string> attack_urls, malpedia_urls;
  std::set<std::string> attack_fqdns, malpedia_fqdns;
  for (const auto& ref : attack_group_report_urls(attack)) {
    attack_urls.insert(ref.url);
    attack_fqdns.insert(ref.fqdn);
  }
  for (const auto& ref : malpedia.report_refs) {
    malpedia_urls.insert(ref.url);
    malpedia_fqdns.insert(ref.fqdn);
  }
  rec.rows.push_back(make_row("Report URLs", attack_urls, malpedia_urls));
  rec.rows.push_back(make_row("Report FQDNs", attack_fqdns, malpedia_fqdns));

  if (corpus) {
    static const std::set<std::string> kEmpty;
    auto it_a = corpus->hashes_by_source.find(Source::Attack);
    auto it_m = corpus->hashes_by_source.find(Source::Malpedia);
    rec.rows.push_back(make_row("Reports",
                                it_a != corpus->hashes_by_source.end() ? it_a->second : kEmpty,
                                it_m != corpus->hashes_by_source.end() ? it_m->second : kEmpty));
  }
  return rec;
}

Table to_table(const Table1Record& record) {
  Table t;
  t.name = "dataset_overlap";
  t.columns = {"data", "attack", "malpedia", "intersection", "union", "jaccard"};
  for (const auto& row : record.rows) {
    t.add_row({row.label, opt_count(row.attack), opt_count(row.malpedia),
               opt_count(row.intersection), opt_count(row.union_size),
               row.jaccard ? percent(*row.jaccard, 1.0) : "-"});
  }
  return t;
}

}  // namespace ctiprof

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ctiprof/attack.hpp"
#include "ctiprof/corpus.hpp"
#include "ctiprof/csv.hpp"
#include "ctiprof/malpedia.hpp"
#include "ctiprof/resolve.hpp"

namespace ctiprof {

struct OverlapRow {
  std::string label;
  std::optional<std::size_t> attack;
  std::optional<std::size_t> malpedia;
  std::optional<std::size_t> intersection;
  std::optional<std::size_t> union_size;
  std::optional<double> jaccard;
};

struct Table1Record {
  std::vector<OverlapRow> rows;

  const OverlapRow* row(const std::string& label) const;
};

/// Per-row source counts, intersection, union and Jaccard for groups,
/// techniques, software, report URLs, report FQDNs and (when a corpus
/// summary is supplied) downloaded reports by content hash.
Table1Record dataset_overlap_summary(const AttackSnapshot& attack,
                                     const MalpediaSnapshot& malpedia,
                                     const std::vector<MergedEntity>& group_classes,
                                     const std::vector<MergedEntity>& software_classes,
                                     const CorpusSummary* corpus = nullptr);

Table to_table(const Table1Record& record);

}  // namespace ctiprof

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ctiprof/attack.hpp"
#include "ctiprof/types.hpp"

namespace ctiprof {

/// Parsed view of a Malpedia dump: actor and family taxonomies plus the
/// BibTeX report library. Report refs are labeled with every actor and
/// family whose reference lists contain the URL.
struct MalpediaSnapshot {
  std::string retrieved_at;
  std::vector<SourceEntity> groups;
  std::vector<SoftwareEntry> software;  // kind is always Unknown
  std::vector<Association> associations;
  std::vector<ReportRef> report_refs;
  IngestDiagnostics diagnostics;
};

/// Parses the Malpedia API actor dump, family dump, and BibTeX library
/// export. BibTeX entries without a URL are skipped and counted; malformed
/// entries are skipped with a warning. Duplicate URLs collapse into one ref
/// whose linked sets are the union of the duplicates' tags.
MalpediaSnapshot load_malpedia(std::string_view actors_json,
                               std::string_view families_json,
                               std::string_view library_bibtex);

MalpediaSnapshot load_malpedia_files(const std::string& actors_path,
                                     const std::string& families_path,
                                     const std::string& bib_path);

/// Exactly the refs with one linked group.
std::vector<ReportRef> single_group_reports(const MalpediaSnapshot& snapshot);

}  // namespace ctiprof

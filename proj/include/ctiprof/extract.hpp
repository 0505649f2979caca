#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ctiprof/corpus.hpp"
#include "ctiprof/profiles.hpp"
#include "ctiprof/types.hpp"

namespace ctiprof {

struct ExtractionOptions {
  /// Accept "CVE 2017 0199" / "CVE–2017–0199" style separators. Off by
  /// default: only the canonical hyphen form matches.
  bool cve_separator_tolerance = false;
};

/// Reverses common CTI defanging before matching: the literal "[.]"
/// becomes ".".
std::string refang(std::string_view text);

/// Case-insensitive CVE-\d{4}-\d{4,7} on word boundaries, canonicalized
/// uppercase. Digit runs longer than 7 do not match.
std::set<std::string> extract_cve_ids(std::string_view text,
                                      const ExtractionOptions& options = {});

struct TechniqueExtraction {
  std::set<std::string> known;    // present in the taxonomy
  std::set<std::string> unknown;  // well-formed but not in the taxonomy
};

/// T\d{4}(\.\d{3})? on word boundaries. IDs absent from the taxonomy are
/// kept but flagged unknown.
TechniqueExtraction extract_technique_ids(std::string_view text,
                                          const std::set<std::string>& taxonomy,
                                          const ExtractionOptions& options = {});

/// Extraction result for one cached report.
struct ExtractionRecord {
  ReportRef ref;
  std::string report_sha256;
  std::set<std::string> cves;
  std::set<std::string> technique_ids;
  std::set<std::string> unknown_technique_ids;
  /// Merged group classes this report's findings are attributed to; empty
  /// when the report is not eligible for assignment.
  std::vector<int> assigned_group_classes;
};

/// Runs both extractors over every ref's cached document. Refs without a
/// usable cache entry are skipped (counted in `skipped`).
struct CorpusExtraction {
  std::vector<ExtractionRecord> records;
  std::size_t skipped = 0;
};
CorpusExtraction extract_from_corpus(const CorpusCache& cache,
                                     const std::vector<ReportRef>& refs,
                                     const std::set<std::string>& taxonomy,
                                     const ExtractionOptions& options = {});

/// Applies the assignment rule: an ATT&CK report is attributed to each group
/// citing it; a Malpedia report only when its linked groups collapse to a
/// single merged class. Multi-group Malpedia reports contribute nothing.
/// Fills assigned_group_classes and returns the resulting associations
/// (provenance REPORT_EXTRACTED, evidence = the ref). Throws
/// std::runtime_error when a linked group is missing from the merge map.
std::vector<Association> assign_extractions(std::vector<ExtractionRecord>& records,
                                            const MergeIndex& groups);

ProfileSet build_vulnerability_profiles(
    const std::vector<MergedEntity>& group_classes,
    const std::vector<ResolvedAssociation>& extracted, Scope scope);

/// Catalog techniques extended with report-extracted technique identifiers;
/// with no extracted associations this equals the catalog-only profiles.
ProfileSet build_extended_technique_profiles(
    const std::vector<MergedEntity>& group_classes,
    const std::vector<ResolvedAssociation>& catalog,
    const std::vector<ResolvedAssociation>& extracted, Scope scope);

/// One line per record: {"sha256":..., "url":..., "group":...,
/// "cves":[...], "techniques":[...]}.
void write_extraction_jsonl(std::ostream& out,
                            const std::vector<ExtractionRecord>& records,
                            const std::vector<MergedEntity>& group_classes);

/// Per-dataset extraction tallies over the assigned records.
struct ExtractionSummaryRow {
  std::string dataset;
  std::size_t reports = 0;
  std::size_t reports_with_cves = 0;
  std::size_t unique_cves = 0;
  std::size_t groups_with_cves = 0;
  std::size_t reports_with_techniques = 0;
  std::size_t unique_techniques = 0;
  std::size_t groups_with_techniques = 0;
};
std::vector<ExtractionSummaryRow> extraction_summary(
    const std::vector<ExtractionRecord>& records);

/// Catalog-vs-report audit for one source scope: how many technique IDs the
/// reports mention that the catalog never attached to any group.
struct ExtractionAudit {
  std::size_t reports_with_techniques = 0;
  std::set<std::string> extracted_ids;
  std::set<std::string> cataloged_ids;  // IDs with at least one catalog edge
  std::set<std::string> extracted_not_cataloged;
  /// group class -> (cataloged, extracted, extracted-not-cataloged) sizes
  std::map<int, std::array<std::size_t, 3>> per_group;
};
ExtractionAudit compute_extraction_audit(
    const std::vector<ExtractionRecord>& records,
    const std::vector<ResolvedAssociation>& catalog_associations);

}  // namespace ctiprof

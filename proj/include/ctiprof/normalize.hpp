#pragma once

#include <string>
#include <vector>

namespace ctiprof {

/// Name normalization rules. The rule table is data: the defaults below match
/// the published mapping conventions, and a JSON file can replace them.
///
/// Rule semantics:
///   Lowercase          — ASCII lower-casing of the whole name
///   ReplaceTerm        — word-bounded occurrences of `pattern` -> `replacement`
///   StripPrefix        — leading `pattern` + separator (one of " ._-/") removed
///   StripSuffix        — trailing separator + `pattern` removed
///   ReplaceChars       — separator char (one of "_-./") dropped when it
///                        directly precedes the word `pattern`
///   CollapseWhitespace — runs of whitespace become one space; ends trimmed
enum class RuleKind {
  Lowercase,
  StripSuffix,
  StripPrefix,
  ReplaceTerm,
  ReplaceChars,
  CollapseWhitespace,
};

struct NormalizationRule {
  RuleKind kind = RuleKind::Lowercase;
  std::string pattern;
  std::string replacement;
};

struct NormalizationRuleSet {
  std::vector<NormalizationRule> rules;

  /// Applies the rules in order. Falls back to the lower-cased, trimmed raw
  /// string when the rules consume the whole name. With fallback_to_raw
  /// false the empty string is returned instead; merging uses that form so
  /// a fully consumed name can never create a merge edge.
  std::string apply(const std::string& raw, bool fallback_to_raw = true) const;
};

/// Default rule table for threat-group names: lowercase, "threat group"->"tg",
/// "team"->space, strip "temp" prefix, strip "group"/"framework" suffixes,
/// collapse whitespace.
NormalizationRuleSet default_group_rules();

/// Default rule table for software names: lowercase, strip trojan/win/apk/elf
/// prefixes, drop separators before "rat", collapse whitespace.
NormalizationRuleSet default_software_rules();

/// Loads group and software rule tables from a JSON file of the form
/// {"group_rules": [{"kind": "...", "pattern": "...", "replacement": "..."}],
///  "software_rules": [...]}. Throws std::runtime_error on malformed input.
void load_rules_file(const std::string& path, NormalizationRuleSet& group_rules,
                     NormalizationRuleSet& software_rules);

std::string normalize_group_name(const std::string& raw,
                                 const NormalizationRuleSet& rules);
std::string normalize_software_name(const std::string& raw,
                                    const NormalizationRuleSet& rules);

}  // namespace ctiprof

#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace ctiprof {

struct BibEntry {
  std::string entry_type;  // "online", "techreport", ...
  std::string citation_key;
  std::map<std::string, std::string> fields;  // field names lower-cased

  const std::string* field(const std::string& name) const {
    auto it = fields.find(name);
    return it == fields.end() ? nullptr : &it->second;
  }
};

struct BibParseResult {
  std::vector<BibEntry> entries;
  std::size_t malformed_skipped = 0;
  std::vector<std::string> warnings;
};

/// Parses a BibTeX library. Values may be brace- or quote-delimited with
/// nested braces. Unescaping is limited to braces and common accent macros;
/// unknown escapes pass through verbatim. A malformed entry is skipped with a
/// warning, never a parse abort.
BibParseResult parse_bibtex(std::string_view text);

}  // namespace ctiprof

#include "ctiprof/bibtex.hpp"

#include <array>
#include <cctype>

namespace ctiprof {

namespace {

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Accent macros that actually occur in report titles and author names.
struct AccentMacro {
  char macro;
  char letter;
  const char* utf8;
};

constexpr std::array<AccentMacro, 14> kAccents{{
    {'\'', 'a', "\xc3\xa1"}, {'\'', 'e', "\xc3\xa9"}, {'\'', 'i', "\xc3\xad"},
    {'\'', 'o', "\xc3\xb3"}, {'\'', 'u', "\xc3\xba"}, {'`', 'e', "\xc3\xa8"},
    {'`', 'a', "\xc3\xa0"}, {'"', 'o', "\xc3\xb6"}, {'"', 'u', "\xc3\xbc"},
    {'"', 'a', "\xc3\xa4"}, {'^', 'e', "\xc3\xaa"}, {'^', 'a', "\xc3\xa2"},
    {'~', 'n', "\xc3\xb1"}, {'c', 'c', "\xc3\xa7"},
}};

const char* accent_utf8(char macro, char letter) {
  for (const auto& a : kAccents) {
    if (a.macro == macro && a.letter == letter) return a.utf8;
  }
  return nullptr;
}

// Strips grouping braces and resolves \{ \} and accent macros. Anything not
// recognized passes through verbatim, since names feed normalization anyway.
std::string clean_value(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    char c = raw[i];
    if (c == '{' || c == '}') continue;
    if (c == '\\' && i + 1 < raw.size()) {
      char m = raw[i + 1];
      if (m == '{' || m == '}' || m == '&' || m == '%' || m == '_' || m == '#') {
        out.push_back(m);
        ++i;
        continue;
      }
      // \'e or \'{e} or \c{c}
      std::size_t j = i + 2;
      while (j < raw.size() && raw[j] == '{') ++j;
      if (j < raw.size()) {
        if (const char* rep = accent_utf8(m, static_cast<char>(
                                                 std::tolower(static_cast<unsigned char>(raw[j]))))) {
          out += rep;
          i = j;
          while (i + 1 < raw.size() && raw[i + 1] == '}') ++i;
          continue;
        }
      }
      out.push_back(c);
      continue;
    }
    if (c == '\n' || c == '\r' || c == '\t') c = ' ';
    out.push_back(c);
  }
  // Trim and collapse runs of spaces introduced by line wrapping.
  std::string trimmed;
  bool in_space = true;
  for (char c : out) {
    if (c == ' ') {
      in_space = true;
    } else {
      if (in_space && !trimmed.empty()) trimmed.push_back(' ');
      trimmed.push_back(c);
      in_space = false;
    }
  }
  return trimmed;
}

class Scanner {
 public:
  explicit Scanner(std::string_view text) : text_(text) {}

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }
  char advance() { return text_[pos_++]; }
  std::size_t pos() const { return pos_; }
  void seek(std::size_t p) { pos_ = p; }

  void skip_ws() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) advance();
  }

  // Advances to the next '@' at depth zero.
  bool seek_entry_start() {
    while (!at_end()) {
      if (peek() == '@') return true;
      advance();
    }
    return false;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

BibParseResult parse_bibtex(std::string_view text) {
  BibParseResult result;
  Scanner sc(text);

  while (sc.seek_entry_start()) {
    std::size_t entry_start = sc.pos();
    sc.advance();  // '@'
    std::string entry_type;
    while (!sc.at_end() && (std::isalpha(static_cast<unsigned char>(sc.peek())) != 0)) {
      entry_type.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(sc.advance()))));
    }
    sc.skip_ws();
    if (entry_type == "comment" || entry_type == "preamble") {
      continue;  // body scanned over like any other text
    }
    if (sc.at_end() || sc.peek() != '{') {
      result.malformed_skipped++;
      result.warnings.push_back("entry at byte " + std::to_string(entry_start) +
                                ": expected '{' after @" + entry_type);
      continue;
    }
    sc.advance();  // '{'

    BibEntry entry;
    entry.entry_type = entry_type;
    while (!sc.at_end() && sc.peek() != ',' && sc.peek() != '}' &&
           !std::isspace(static_cast<unsigned char>(sc.peek()))) {
      entry.citation_key.push_back(sc.advance());
    }
    sc.skip_ws();
    if (!sc.at_end() && sc.peek() == ',') sc.advance();

    bool ok = true;
    while (true) {
      sc.skip_ws();
      if (sc.at_end()) {
        ok = false;
        result.warnings.push_back("entry '" + entry.citation_key + "': unterminated");
        break;
      }
      if (sc.peek() == '}') {
        sc.advance();
        break;
      }
      std::string field_name;
      while (!sc.at_end() && sc.peek() != '=' && sc.peek() != '}' &&
             !std::isspace(static_cast<unsigned char>(sc.peek()))) {
        field_name.push_back(sc.advance());
      }
      sc.skip_ws();
      if (sc.at_end() || sc.peek() != '=') {
        ok = false;
        result.warnings.push_back("entry '" + entry.citation_key +
                                  "': malformed field '" + field_name + "'");
        // Resync at the next entry.
        while (!sc.at_end() && sc.peek() != '@') sc.advance();
        break;
      }
      sc.advance();  // '='
      sc.skip_ws();

      std::string raw_value;
      if (!sc.at_end() && sc.peek() == '{') {
        sc.advance();
        int depth = 1;
        while (!sc.at_end() && depth > 0) {
          char c = sc.advance();
          if (c == '\\' && !sc.at_end()) {
            raw_value.push_back(c);
            raw_value.push_back(sc.advance());
            continue;
          }
          if (c == '{') depth++;
          if (c == '}') {
            depth--;
            if (depth == 0) break;
          }
          raw_value.push_back(c);
        }
        if (depth != 0) {
          ok = false;
          result.warnings.push_back("entry '" + entry.citation_key +
                                    "': unbalanced braces in field '" + field_name + "'");
          break;
        }
      } else if (!sc.at_end() && sc.peek() == '"') {
        sc.advance();
        while (!sc.at_end() && sc.peek() != '"') {
          char c = sc.advance();
          if (c == '\\' && !sc.at_end()) {
            raw_value.push_back(c);
            raw_value.push_back(sc.advance());
            continue;
          }
          raw_value.push_back(c);
        }
        if (sc.at_end()) {
          ok = false;
          result.warnings.push_back("entry '" + entry.citation_key +
                                    "': unterminated quoted field '" + field_name + "'");
          break;
        }
        sc.advance();  // closing '"'
      } else {
        // Bare value (number or macro name), up to ',' or '}'.
        while (!sc.at_end() && sc.peek() != ',' && sc.peek() != '}' &&
               !std::isspace(static_cast<unsigned char>(sc.peek()))) {
          raw_value.push_back(sc.advance());
        }
      }
      if (!field_name.empty()) {
        entry.fields[lower(field_name)] = clean_value(raw_value);
      }
      sc.skip_ws();
      if (!sc.at_end() && sc.peek() == ',') sc.advance();
    }

    if (ok) result.entries.push_back(std::move(entry));
    else result.malformed_skipped++;
  }
  return result;
}

}  // namespace ctiprof

#include "ctiprof/normalize.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace ctiprof {

namespace {

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

bool is_separator(char c) {
  return c == ' ' || c == '.' || c == '_' || c == '-' || c == '/';
}

std::string ascii_lower(const std::string& s) {
  std::string out = s;
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string collapse_whitespace(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  bool in_space = true;  // leading whitespace is trimmed
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      in_space = true;
    } else {
      if (in_space && !out.empty()) out.push_back(' ');
      out.push_back(c);
      in_space = false;
    }
  }
  return out;
}

// Word-bounded replace of every occurrence of `pat`.
std::string replace_term(const std::string& s, const std::string& pat,
                         const std::string& repl) {
  if (pat.empty()) return s;
  std::string out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (s.compare(i, pat.size(), pat) == 0) {
      bool left_ok = (i == 0) || !is_word_char(s[i - 1]);
      std::size_t end = i + pat.size();
      bool right_ok = (end >= s.size()) || !is_word_char(s[end]);
      if (left_ok && right_ok) {
        out += repl;
        i = end;
        continue;
      }
    }
    out.push_back(s[i]);
    ++i;
  }
  return out;
}

std::string strip_prefix(const std::string& s, const std::string& tok) {
  std::string out = s;
  while (out.size() > tok.size() && out.compare(0, tok.size(), tok) == 0 &&
         is_separator(out[tok.size()])) {
    out.erase(0, tok.size() + 1);
  }
  return out;
}

std::string strip_suffix(const std::string& s, const std::string& tok) {
  std::string out = s;
  while (out.size() > tok.size() + 1 &&
         out.compare(out.size() - tok.size(), tok.size(), tok) == 0 &&
         is_separator(out[out.size() - tok.size() - 1])) {
    out.erase(out.size() - tok.size() - 1);
  }
  return out;
}

// Drops one of "_-./" when it directly precedes the word `tok`.
std::string replace_chars_before(const std::string& s, const std::string& tok) {
  if (tok.empty()) return s;
  std::string out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if ((c == '_' || c == '-' || c == '.' || c == '/') &&
        s.compare(i + 1, tok.size(), tok) == 0) {
      std::size_t end = i + 1 + tok.size();
      bool right_ok = (end >= s.size()) || !is_word_char(s[end]);
      if (right_ok) {
        out += tok;
        i = end;
        continue;
      }
    }
    out.push_back(c);
    ++i;
  }
  return out;
}

RuleKind rule_kind_from_string(const std::string& s) {
  if (s == "lowercase") return RuleKind::Lowercase;
  if (s == "strip_suffix") return RuleKind::StripSuffix;
  if (s == "strip_prefix") return RuleKind::StripPrefix;
  if (s == "replace_term") return RuleKind::ReplaceTerm;
  if (s == "replace_chars") return RuleKind::ReplaceChars;
  if (s == "collapse_whitespace") return RuleKind::CollapseWhitespace;
  throw std::runtime_error("unknown normalization rule kind: " + s);
}

}  // namespace

std::string NormalizationRuleSet::apply(const std::string& raw, bool fallback_to_raw) const {
  std::string s = raw;
  for (const auto& rule : rules) {
    switch (rule.kind) {
      case RuleKind::Lowercase:
        s = ascii_lower(s);
        break;
      case RuleKind::ReplaceTerm:
        s = replace_term(s, rule.pattern, rule.replacement);
        break;
      case RuleKind::StripPrefix:
        s = strip_prefix(s, rule.pattern);
        break;
      case RuleKind::StripSuffix:
        s = strip_suffix(s, rule.pattern);
        break;
      case RuleKind::ReplaceChars:
        s = replace_chars_before(s, rule.pattern);
        break;
      case RuleKind::CollapseWhitespace:
        s = collapse_whitespace(s);
        break;
    }
  }
  if (s.empty() && fallback_to_raw) return collapse_whitespace(ascii_lower(raw));
  return s;
}

NormalizationRuleSet default_group_rules() {
  NormalizationRuleSet rs;
  rs.rules = {
      {RuleKind::Lowercase, "", ""},
      {RuleKind::ReplaceTerm, "threat group", "tg"},
      {RuleKind::ReplaceTerm, "team", " "},
      {RuleKind::StripPrefix, "temp", ""},
      {RuleKind::StripSuffix, "group", ""},
      {RuleKind::StripSuffix, "framework", ""},
      {RuleKind::CollapseWhitespace, "", ""},
  };
  return rs;
}

NormalizationRuleSet default_software_rules() {
  NormalizationRuleSet rs;
  rs.rules = {
      {RuleKind::Lowercase, "", ""},
      {RuleKind::StripPrefix, "trojan", ""},
      {RuleKind::StripPrefix, "win", ""},
      {RuleKind::StripPrefix, "apk", ""},
      {RuleKind::StripPrefix, "elf", ""},
      {RuleKind::ReplaceChars, "rat", ""},
      {RuleKind::CollapseWhitespace, "", ""},
  };
  return rs;
}

void load_rules_file(const std::string& path, NormalizationRuleSet& group_rules,
                     NormalizationRuleSet& software_rules) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open rules file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed rules file " + path + ": " + e.what());
  }
  auto parse_list = [](const nlohmann::json& arr) {
    NormalizationRuleSet rs;
    for (const auto& item : arr) {
      NormalizationRule r;
      r.kind = rule_kind_from_string(item.at("kind").get<std::string>());
      r.pattern = item.value("pattern", "");
      r.replacement = item.value("replacement", "");
      rs.rules.push_back(std::move(r));
    }
    return rs;
  };
  if (doc.contains("group_rules")) group_rules = parse_list(doc["group_rules"]);
  if (doc.contains("software_rules"))
    software_rules = parse_list(doc["software_rules"]);
}

std::string normalize_group_name(const std::string& raw,
                                 const NormalizationRuleSet& rules) {
  return rules.apply(raw);
}

std::string normalize_software_name(const std::string& raw,
                                    const NormalizationRuleSet& rules) {
  return rules.apply(raw);
}

}  // namespace ctiprof

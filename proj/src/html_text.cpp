#include "ctiprof/html_text.hpp"

#include <cctype>
#include <cstdlib>

namespace ctiprof {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_block_tag(const std::string& tag) {
  static const char* kBlocks[] = {"p",  "div", "br",  "li", "ul", "ol",    "tr",
                                  "td", "th",  "h1",  "h2", "h3", "h4",    "h5",
                                  "h6", "table", "section", "article", "header",
                                  "footer", "blockquote", "pre"};
  for (const char* b : kBlocks) {
    if (tag == b) return true;
  }
  return false;
}

void append_utf8(std::string& out, unsigned long cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

// Decodes the entity at s[i] (which is '&'); returns chars consumed or 0.
std::size_t decode_entity(std::string_view s, std::size_t i, std::string& out) {
  std::size_t end = i + 1;
  std::size_t limit = std::min(s.size(), i + 12);
  while (end < limit && s[end] != ';' && s[end] != '&' &&
         !std::isspace(static_cast<unsigned char>(s[end]))) {
    ++end;
  }
  if (end >= s.size() || s[end] != ';') return 0;
  std::string_view body = s.substr(i + 1, end - i - 1);
  if (!body.empty() && body[0] == '#') {
    std::string digits(body.substr(1));
    char* endp = nullptr;
    unsigned long cp = 0;
    if (!digits.empty() && (digits[0] == 'x' || digits[0] == 'X')) {
      cp = std::strtoul(digits.c_str() + 1, &endp, 16);
    } else {
      cp = std::strtoul(digits.c_str(), &endp, 10);
    }
    if (endp && *endp == '\0' && cp > 0) {
      append_utf8(out, cp);
      return end - i + 1;
    }
    return 0;
  }
  std::string name = lower(body);
  if (name == "amp") out.push_back('&');
  else if (name == "lt") out.push_back('<');
  else if (name == "gt") out.push_back('>');
  else if (name == "quot") out.push_back('"');
  else if (name == "apos") out.push_back('\'');
  else if (name == "nbsp") out.push_back(' ');
  else return 0;
  return end - i + 1;
}

}  // namespace

std::string html_to_text(std::string_view html) {
  std::string raw;
  raw.reserve(html.size() / 2);
  std::size_t i = 0;
  std::string skip_until_close;  // non-empty while inside script/style

  while (i < html.size()) {
    char c = html[i];
    if (c == '<') {
      // Comments and CDATA.
      if (html.compare(i, 4, "<!--") == 0) {
        auto end = html.find("-->", i + 4);
        i = end == std::string_view::npos ? html.size() : end + 3;
        continue;
      }
      std::size_t tag_end = html.find('>', i);
      if (tag_end == std::string_view::npos) break;
      std::string_view tag_body = html.substr(i + 1, tag_end - i - 1);
      bool closing = !tag_body.empty() && tag_body[0] == '/';
      if (closing) tag_body.remove_prefix(1);
      std::size_t name_len = 0;
      while (name_len < tag_body.size() &&
             (std::isalnum(static_cast<unsigned char>(tag_body[name_len])) != 0)) {
        ++name_len;
      }
      std::string tag = lower(tag_body.substr(0, name_len));
      if (!skip_until_close.empty()) {
        if (closing && tag == skip_until_close) skip_until_close.clear();
        i = tag_end + 1;
        continue;
      }
      if (!closing && (tag == "script" || tag == "style" || tag == "noscript")) {
        skip_until_close = tag;
      } else if (is_block_tag(tag)) {
        raw.push_back('\n');
      } else {
        raw.push_back(' ');
      }
      i = tag_end + 1;
      continue;
    }
    if (!skip_until_close.empty()) {
      ++i;
      continue;
    }
    if (c == '&') {
      std::size_t consumed = decode_entity(html, i, raw);
      if (consumed > 0) {
        i += consumed;
        continue;
      }
    }
    raw.push_back(c);
    ++i;
  }

  // Collapse whitespace, preserving single newlines as separators.
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  bool pending_newline = false;
  for (char c : raw) {
    if (c == '\n') {
      pending_newline = true;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = true;
    } else {
      if (pending_newline && !out.empty()) out.push_back('\n');
      else if (pending_space && !out.empty()) out.push_back(' ');
      pending_newline = pending_space = false;
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace ctiprof

#include "ctiprof/pdf_text.hpp"

#include <zlib.h>

#include <cctype>
#include <cstring>
#include <vector>

namespace ctiprof {

namespace {

constexpr std::size_t kMaxInflated = 64u << 20;  // bomb guard

bool inflate_stream(std::string_view in, std::string& out) {
  z_stream zs;
  std::memset(&zs, 0, sizeof(zs));
  if (inflateInit(&zs) != Z_OK) return false;
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(in.data()));
  zs.avail_in = static_cast<uInt>(in.size());
  std::vector<char> buf(64 * 1024);
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    zs.next_out = reinterpret_cast<Bytef*>(buf.data());
    zs.avail_out = static_cast<uInt>(buf.size());
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      return false;
    }
    out.append(buf.data(), buf.size() - zs.avail_out);
    if (out.size() > kMaxInflated) {
      inflateEnd(&zs);
      return false;
    }
    if (rc == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) break;  // truncated
  }
  inflateEnd(&zs);
  return rc == Z_STREAM_END;
}

// Decodes a PDF literal string starting after '('. Returns position past ')'.
std::size_t decode_literal(std::string_view s, std::size_t i, std::string& out) {
  int depth = 1;
  while (i < s.size()) {
    char c = s[i];
    if (c == '\\' && i + 1 < s.size()) {
      char e = s[i + 1];
      switch (e) {
        case 'n': out.push_back('\n'); i += 2; continue;
        case 'r': out.push_back('\r'); i += 2; continue;
        case 't': out.push_back('\t'); i += 2; continue;
        case 'b': out.push_back('\b'); i += 2; continue;
        case 'f': out.push_back('\f'); i += 2; continue;
        case '(': out.push_back('('); i += 2; continue;
        case ')': out.push_back(')'); i += 2; continue;
        case '\\': out.push_back('\\'); i += 2; continue;
        case '\n': i += 2; continue;  // line continuation
        case '\r':
          i += 2;
          if (i < s.size() && s[i] == '\n') ++i;
          continue;
        default:
          if (e >= '0' && e <= '7') {
            int val = 0;
            std::size_t j = i + 1;
            for (int k = 0; k < 3 && j < s.size() && s[j] >= '0' && s[j] <= '7'; ++k, ++j) {
              val = val * 8 + (s[j] - '0');
            }
            out.push_back(static_cast<char>(val & 0xFF));
            i = j;
            continue;
          }
          out.push_back(e);
          i += 2;
          continue;
      }
    }
    if (c == '(') depth++;
    if (c == ')') {
      depth--;
      if (depth == 0) return i + 1;
    }
    out.push_back(c);
    ++i;
  }
  return i;
}

std::size_t decode_hex_string(std::string_view s, std::size_t i, std::string& out) {
  int hi = -1;
  while (i < s.size() && s[i] != '>') {
    char c = s[i++];
    int v;
    if (c >= '0' && c <= '9') v = c - '0';
    else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') v = c - 'A' + 10;
    else continue;
    if (hi < 0) {
      hi = v;
    } else {
      out.push_back(static_cast<char>((hi << 4) | v));
      hi = -1;
    }
  }
  if (hi >= 0) out.push_back(static_cast<char>(hi << 4));  // odd count: pad 0
  return i < s.size() ? i + 1 : i;
}

// Pulls the text-show operands out of one decoded content stream.
void extract_from_content(std::string_view s, std::string& out) {
  std::vector<std::string> pending;  // operands since the last operator
  std::size_t i = 0;
  auto flush_as_text = [&]() {
    for (auto& p : pending) out += p;
    pending.clear();
  };
  while (i < s.size()) {
    char c = s[i];
    if (c == '(') {
      std::string str;
      i = decode_literal(s, i + 1, str);
      pending.push_back(std::move(str));
      continue;
    }
    if (c == '<') {
      if (i + 1 < s.size() && s[i + 1] == '<') {  // dictionary, skip both
        i += 2;
        continue;
      }
      std::string str;
      i = decode_hex_string(s, i + 1, str);
      pending.push_back(std::move(str));
      continue;
    }
    if (c == '%') {  // comment to end of line
      while (i < s.size() && s[i] != '\n' && s[i] != '\r') ++i;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '\'' || c == '"' || c == '*') {
      std::size_t start = i;
      while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) != 0 ||
                              s[i] == '\'' || s[i] == '"' || s[i] == '*')) {
        ++i;
      }
      std::string_view op = s.substr(start, i - start);
      if (op == "Tj" || op == "TJ" || op == "'" || op == "\"") {
        flush_as_text();
      } else if (op == "Td" || op == "TD" || op == "T*" || op == "ET") {
        pending.clear();
        if (!out.empty() && out.back() != '\n') out.push_back('\n');
      } else {
        pending.clear();
      }
      continue;
    }
    ++i;
  }
}

bool looks_like_content(std::string_view s) {
  return s.find("Tj") != std::string_view::npos ||
         s.find("TJ") != std::string_view::npos ||
         (s.find("BT") != std::string_view::npos &&
          s.find("ET") != std::string_view::npos);
}

}  // namespace

PdfTextResult pdf_to_text(std::string_view bytes) {
  PdfTextResult result;
  if (bytes.size() < 5 || bytes.compare(0, 5, "%PDF-") != 0) {
    result.diagnostic = "missing %PDF header";
    return result;
  }

  std::size_t pos = 0;
  std::size_t streams_seen = 0;
  std::size_t streams_failed = 0;
  while ((pos = bytes.find("stream", pos)) != std::string_view::npos) {
    // Must be the keyword, not part of a longer token.
    if (pos > 0 && std::isalnum(static_cast<unsigned char>(bytes[pos - 1]))) {
      pos += 6;
      continue;
    }
    std::size_t data_start = pos + 6;
    if (data_start < bytes.size() && bytes[data_start] == '\r') ++data_start;
    if (data_start < bytes.size() && bytes[data_start] == '\n') ++data_start;
    std::size_t data_end = bytes.find("endstream", data_start);
    if (data_end == std::string_view::npos) break;

    // The object's dictionary sits between the previous "obj" and "stream".
    std::size_t dict_start = bytes.rfind("<<", pos);
    std::string_view dict =
        dict_start == std::string_view::npos
            ? std::string_view{}
            : bytes.substr(dict_start, pos - dict_start);
    bool flate = dict.find("/FlateDecode") != std::string_view::npos;
    bool other_filter = !flate && dict.find("/Filter") != std::string_view::npos;

    std::string_view raw = bytes.substr(data_start, data_end - data_start);
    ++streams_seen;
    std::string decoded;
    std::string_view content;
    if (flate) {
      if (!inflate_stream(raw, decoded)) {
        ++streams_failed;
        pos = data_end + 9;
        continue;
      }
      content = decoded;
    } else if (other_filter) {
      ++streams_failed;  // DCT, LZW etc.: not text we can read
      pos = data_end + 9;
      continue;
    } else {
      content = raw;
    }
    if (looks_like_content(content)) extract_from_content(content, result.text);
    pos = data_end + 9;
  }

  if (streams_seen == 0) {
    result.diagnostic = "no streams found";
    return result;
  }
  if (result.text.empty() && streams_failed > 0) {
    result.diagnostic = "no decodable content streams (" +
                        std::to_string(streams_failed) + " of " +
                        std::to_string(streams_seen) + " undecodable)";
    return result;
  }
  result.ok = true;
  if (streams_failed > 0) {
    result.diagnostic = std::to_string(streams_failed) + " streams undecodable";
  }
  return result;
}

}  // namespace ctiprof

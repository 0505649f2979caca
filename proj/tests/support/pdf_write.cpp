#include "support/pdf_write.hpp"

#include <zlib.h>

#include <sstream>
#include <stdexcept>

namespace ctiprof::testing {

namespace {

std::string deflate_bytes(const std::string& in) {
  uLongf bound = compressBound(static_cast<uLong>(in.size()));
  std::string out(bound, '\0');
  if (compress(reinterpret_cast<Bytef*>(out.data()), &bound,
               reinterpret_cast<const Bytef*>(in.data()),
               static_cast<uLong>(in.size())) != Z_OK) {
    throw std::runtime_error("deflate failed");
  }
  out.resize(bound);
  return out;
}

std::string escape_pdf_string(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '(' || c == ')' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

}  // namespace

std::string make_pdf(const std::vector<std::string>& lines, bool compress_stream) {
  std::ostringstream content;
  content << "BT\n/F1 11 Tf\n72 720 Td\n";
  bool first = true;
  for (const auto& line : lines) {
    if (!first) content << "0 -14 Td\n";
    first = false;
    content << "(" << escape_pdf_string(line) << ") Tj\n";
  }
  content << "ET\n";
  std::string stream_data = content.str();
  std::string filter;
  if (compress_stream) {
    stream_data = deflate_bytes(stream_data);
    filter = " /Filter /FlateDecode";
  }

  std::vector<std::string> objects;
  objects.push_back("1 0 obj\n<< /Type /Catalog /Pages 2 0 R >>\nendobj\n");
  objects.push_back("2 0 obj\n<< /Type /Pages /Kids [3 0 R] /Count 1 >>\nendobj\n");
  objects.push_back(
      "3 0 obj\n<< /Type /Page /Parent 2 0 R /MediaBox [0 0 612 792] "
      "/Contents 4 0 R /Resources << /Font << /F1 5 0 R >> >> >>\nendobj\n");
  objects.push_back("4 0 obj\n<< /Length " + std::to_string(stream_data.size()) + filter +
                    " >>\nstream\n" + stream_data + "\nendstream\nendobj\n");
  objects.push_back(
      "5 0 obj\n<< /Type /Font /Subtype /Type1 /BaseFont /Helvetica >>\nendobj\n");

  std::string pdf = "%PDF-1.4\n";
  std::vector<std::size_t> offsets;
  for (const auto& obj : objects) {
    offsets.push_back(pdf.size());
    pdf += obj;
  }
  std::size_t xref_pos = pdf.size();
  std::ostringstream xref;
  xref << "xref\n0 " << objects.size() + 1 << "\n0000000000 65535 f \n";
  for (std::size_t off : offsets) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%010zu 00000 n \n", off);
    xref << buf;
  }
  xref << "trailer\n<< /Size " << objects.size() + 1
       << " /Root 1 0 R >>\nstartxref\n" << xref_pos << "\n%%EOF\n";
  return pdf + xref.str();
}

}  // namespace ctiprof::testing

#pragma once

#include <string>
#include <string_view>

namespace ctiprof {

struct PdfTextResult {
  std::string text;
  bool ok = false;
  std::string diagnostic;  // set when extraction failed or was partial
};

/// Extracts the text-show operands from a PDF's content streams (literal and
/// hex strings under Tj/TJ/quote operators, FlateDecode supported). Handles
/// the common simple-font case; a corrupt or unsupported document yields an
/// empty text with a diagnostic, never an exception.
PdfTextResult pdf_to_text(std::string_view bytes);

}  // namespace ctiprof

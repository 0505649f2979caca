#pragma once

#include <string>
#include <string_view>

namespace ctiprof {

/// Visible text of an HTML document: tags stripped, script/style/noscript
/// contents dropped, basic entities decoded, whitespace collapsed. Block
/// elements separate their contents with newlines.
std::string html_to_text(std::string_view html);

}  // namespace ctiprof

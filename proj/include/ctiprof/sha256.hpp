#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace ctiprof {

/// Lower-case hex SHA-256 of a byte buffer.
std::string sha256_hex(std::string_view bytes);

}  // namespace ctiprof

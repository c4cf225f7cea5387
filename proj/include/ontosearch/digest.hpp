#pragma once

#include <string>
#include <string_view>

namespace ontosearch {

/// SHA-256 of `bytes` as 64 lowercase hex characters.
std::string sha256_hex(std::string_view bytes);

}  // namespace ontosearch

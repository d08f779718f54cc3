#pragma once

#include <string>

namespace forage {

// Lowercase hex SHA-256. Used for embedding cache keys and config hashes.
std::string sha256_hex(const std::string& data);

}  // namespace forage

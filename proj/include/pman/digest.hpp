#pragma once

#include <string>
#include <string_view>

namespace pman {

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

/// SHA-256 of a file's bytes; throws DataError if it cannot be read.
std::string sha256_file_hex(const std::string& path);

}  // namespace pman

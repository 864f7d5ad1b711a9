#pragma once

#include <string>

namespace distgeo {

/// Hex-encoded SHA-256 of a byte string.
std::string sha256_hex(const std::string& data);

/// Hex-encoded SHA-256 of a file's contents. Throws std::runtime_error if
/// the file cannot be read.
std::string sha256_file(const std::string& path);

}  // namespace distgeo

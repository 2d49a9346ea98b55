#pragma once

#include <string>

namespace aist {

// Lowercase hex SHA-256 digests (OpenSSL EVP).
std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

}  // namespace aist

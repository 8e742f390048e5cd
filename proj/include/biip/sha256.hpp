#pragma once

#include <cstddef>
#include <filesystem>
#include <string>

namespace biip {

// SHA-256 digest as a lowercase hex string. Used to fingerprint artifacts in
// run manifests; not a security boundary.
std::string sha256_hex(const void* data, std::size_t len);
std::string sha256_hex(const std::string& s);
std::string sha256_file(const std::filesystem::path& p);  // IoError on failure

}  // namespace biip

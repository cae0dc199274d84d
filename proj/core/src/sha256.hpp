#pragma once

#include <cstddef>
#include <string>

namespace qpnls {

std::string sha256_hex(const void* data, std::size_t len);
std::string sha256_hex(const std::string& data);
std::string sha256_file_hex(const std::string& path);

}  // namespace qpnls

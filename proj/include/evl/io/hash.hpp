#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace evl::io {

/// Hex SHA-1 of "blob <size>\0" + data, the content hash git assigns to a file.
std::string git_blob_sha1(std::string_view data);

std::string sha256_hex(std::string_view data);

std::string read_file(const std::filesystem::path& path);

}  // namespace evl::io

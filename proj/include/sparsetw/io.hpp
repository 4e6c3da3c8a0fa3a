#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace sparsetw {

/// Writes `content` to a sibling temp file and renames it over `path`, creating
/// missing parent directories. Readers never observe a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

}  // namespace sparsetw

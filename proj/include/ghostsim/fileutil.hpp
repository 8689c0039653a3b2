#pragma once

#include <filesystem>
#include <string_view>

namespace ghostsim {

/// Writes to a sibling temporary file and renames it over `path`, so readers
/// never observe a half-written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace ghostsim

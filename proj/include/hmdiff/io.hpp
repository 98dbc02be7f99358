#pragma once

#include <filesystem>
#include <map>
#include <string>

namespace hmdiff {

// Writes `<path>.tmp` then renames it over `path`. Throws Io.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

// Writes every file to a temporary name first and renames only after all
// temporaries were written; on failure the temporaries are removed and no
// target file is touched.
void write_files_atomic(const std::filesystem::path& dir, const std::map<std::string, std::string>& files);

}  // namespace hmdiff

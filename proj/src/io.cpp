#include "hmdiff/io.hpp"

#include <fstream>
#include <vector>

#include "hmdiff/error.hpp"

namespace hmdiff {

namespace fs = std::filesystem;

namespace {

fs::path temp_path(const fs::path& path) { return fs::path(path.string() + ".tmp"); }

void write_raw(const fs::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.close();
    if (!out) throw Error(ErrorCode::Io, "failed writing '" + path.string() + "'");
}

void rename_or_throw(const fs::path& from, const fs::path& to) {
    std::error_code ec;
    fs::rename(from, to, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot rename '" + from.string() + "': " + ec.message());
}

}  // namespace

void write_file_atomic(const fs::path& path, const std::string& contents) {
    const fs::path tmp = temp_path(path);
    try {
        write_raw(tmp, contents);
        rename_or_throw(tmp, path);
    } catch (...) {
        std::error_code ec;
        fs::remove(tmp, ec);
        throw;
    }
}

void write_files_atomic(const fs::path& dir, const std::map<std::string, std::string>& files) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create '" + dir.string() + "': " + ec.message());

    std::vector<fs::path> written;
    try {
        for (const auto& [name, contents] : files) {
            const fs::path tmp = temp_path(dir / name);
            write_raw(tmp, contents);
            written.push_back(tmp);
        }
    } catch (...) {
        for (const auto& tmp : written) fs::remove(tmp, ec);
        throw;
    }
    for (const auto& [name, contents] : files) rename_or_throw(temp_path(dir / name), dir / name);
}

}  // namespace hmdiff

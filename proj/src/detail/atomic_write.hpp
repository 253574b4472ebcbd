#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <system_error>

#include "botsort/error.hpp"

namespace botsort::detail {

/// Writes `content` to a sibling temp file and renames it over `path`.
inline void write_file_atomically(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move result into " + path.string());
  }
}

}  // namespace botsort::detail

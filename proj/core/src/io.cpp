#include "spikeloc/io.hpp"

#include <fmt/format.h>

#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <system_error>

#include "spikeloc/errors.hpp"

namespace spikeloc {

std::string format_g(double v, int precision) {
  return fmt::format("{:.{}g}", v, precision);
}

void write_csv_atomic(const std::filesystem::path& path, const CsvDoc& doc) {
  std::string body;
  for (const auto& [key, val] : doc.meta) body += fmt::format("# {} {}\n", key, val);
  for (std::size_t i = 0; i < doc.columns.size(); ++i) {
    if (i) body += ',';
    body += doc.columns[i];
  }
  body += '\n';
  for (const auto& row : doc.rows) {
    if (row.size() != doc.columns.size())
      throw IoError(fmt::format("cli.write_csv: row width {} vs {} columns in {}", row.size(),
                                doc.columns.size(), path.string()));
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) body += ',';
      body += row[i];
    }
    body += '\n';
  }

  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec)
      throw IoError(fmt::format("cli.write_csv: cannot create directory {}: {}",
                                path.parent_path().string(), ec.message()));
  }
  std::filesystem::path tmp = path;
  tmp += fmt::format(".tmp.{}", static_cast<unsigned long>(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cli.write_csv: cannot open {}", tmp.string()));
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    out.flush();
    if (!out) {
      std::filesystem::remove(tmp, ec);
      throw IoError(fmt::format("cli.write_csv: short write to {}", tmp.string()));
    }
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError(fmt::format("cli.write_csv: cannot move {} into place: {}", path.string(),
                              ec.message()));
  }
}

}  // namespace spikeloc

// CSV output: "#"-prefixed metadata lines, a header row, data rows. Writes
// go through a temporary file and an atomic rename so readers never see a
// partial file, and the content is byte-identical across reruns of the
// same configuration (no timestamps, fixed formatting).
#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace spikeloc {

struct CsvDoc {
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

void write_csv_atomic(const std::filesystem::path& path, const CsvDoc& doc);

// Shortest-faithful %g rendering at the given significant-digit count.
std::string format_g(double v, int precision);

}  // namespace spikeloc

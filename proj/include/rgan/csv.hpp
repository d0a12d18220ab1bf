#pragma once

// Small CSV helpers shared by the trace, curve, snapshot and report writers.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace rgan {

/// Shortest decimal form that round-trips to the same double.
std::string format_real(double v);

std::vector<std::string> split_csv_line(std::string_view line);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Reads a numeric CSV with a header row. Throws std::runtime_error on
/// missing files, ragged rows or unparsable cells.
CsvTable read_numeric_csv(const std::filesystem::path& path);

}  // namespace rgan

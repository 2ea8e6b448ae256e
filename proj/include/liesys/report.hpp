#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace liesys {

/// Fixed 17-significant-digit scientific notation ("%.16e").
std::string format_number(double v);

/// Numeric CSV table: header row, then one row per record. The first column
/// is the independent variable (time for time series).
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(const std::vector<double>& row);
  std::size_t rows() const noexcept { return rows_.size(); }
  const std::vector<std::string>& header() const noexcept { return header_; }
  std::string render() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<double>> rows_;
};

/// Writes `content` to a temporary sibling and renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace liesys

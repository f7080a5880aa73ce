#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace morphotok {

// A rectangular CSV table with a header row. Cells are kept as text and
// converted on access.
class AnalysisTable {
 public:
  AnalysisTable() = default;
  explicit AnalysisTable(std::vector<std::string> header);

  static AnalysisTable Parse(std::string_view text, const std::string& source);
  static AnalysisTable Read(const std::filesystem::path& path);

  const std::vector<std::string>& header() const { return header_; }
  std::size_t row_count() const { return rows_.size(); }
  const std::vector<std::string>& row(std::size_t i) const { return rows_[i]; }

  bool HasColumn(std::string_view name) const;
  // Throws Error naming the column if absent.
  std::size_t ColumnIndex(std::string_view name) const;

  std::vector<std::string> Strings(std::string_view column) const;
  // Throws Error naming the column and row on a missing or non-numeric cell.
  std::vector<double> Numbers(std::string_view column) const;

  void AddRow(std::vector<std::string> cells);

  // RFC 4180 style; fields are quoted only when needed.
  void Write(std::ostream& out) const;
  std::string ToCsv() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace morphotok

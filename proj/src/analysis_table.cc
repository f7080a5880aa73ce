#include "morphotok/analysis_table.h"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

#include "morphotok/error.h"

namespace morphotok {
namespace {

// Splits CSV text into records. Quoted fields may contain commas, quotes
// ("") and newlines.
std::vector<std::pair<std::size_t, std::vector<std::string>>> ParseRecords(
    std::string_view text, const std::string& source) {
  std::vector<std::pair<std::size_t, std::vector<std::string>>> records;
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t line = 1;
  std::size_t record_line = 1;

  auto end_field = [&] {
    fields.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    if (!(fields.size() == 1 && fields[0].empty())) {
      records.emplace_back(record_line, std::move(fields));
    }
    fields.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started) throw ParseError(source, line, "stray quote in field");
        quoted = true;
        field_started = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        ++line;
        record_line = line;
        break;
      default:
        field += c;
        field_started = true;
    }
  }
  if (quoted) throw ParseError(source, line, "unterminated quoted field");
  if (field_started || !fields.empty()) end_record();
  return records;
}

std::string Quote(const std::string& cell) {
  if (cell.find_first_of(",\"\n\r") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

AnalysisTable::AnalysisTable(std::vector<std::string> header)
    : header_(std::move(header)) {
  for (std::size_t i = 0; i < header_.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (header_[i] == header_[j]) {
        throw Error("duplicate column '" + header_[i] + "'");
      }
    }
  }
}

AnalysisTable AnalysisTable::Parse(std::string_view text,
                                   const std::string& source) {
  auto records = ParseRecords(text, source);
  if (records.empty()) throw ParseError(source, 1, "missing header row");
  AnalysisTable table(std::move(records[0].second));
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].second.size() != table.header_.size()) {
      throw ParseError(source, records[r].first,
                       "expected " + std::to_string(table.header_.size()) +
                           " fields, found " +
                           std::to_string(records[r].second.size()));
    }
    table.rows_.push_back(std::move(records[r].second));
  }
  return table;
}

AnalysisTable AnalysisTable::Read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return Parse(buffer.str(), path.string());
}

bool AnalysisTable::HasColumn(std::string_view name) const {
  for (const std::string& h : header_) {
    if (h == name) return true;
  }
  return false;
}

std::size_t AnalysisTable::ColumnIndex(std::string_view name) const {
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (header_[i] == name) return i;
  }
  throw Error("no column named '" + std::string(name) + "'");
}

std::vector<std::string> AnalysisTable::Strings(std::string_view column) const {
  const std::size_t c = ColumnIndex(column);
  std::vector<std::string> out;
  out.reserve(rows_.size());
  for (const auto& row : rows_) out.push_back(row[c]);
  return out;
}

std::vector<double> AnalysisTable::Numbers(std::string_view column) const {
  const std::size_t c = ColumnIndex(column);
  std::vector<double> out;
  out.reserve(rows_.size());
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    const std::string& cell = rows_[r][c];
    double v = 0.0;
    const char* end = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(cell.data(), end, v);
    if (cell.empty() || ec != std::errc() || ptr != end) {
      throw Error("column '" + std::string(column) + "' row " +
                  std::to_string(r + 1) + ": '" + cell + "' is not a number");
    }
    out.push_back(v);
  }
  return out;
}

void AnalysisTable::AddRow(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) {
    throw ContractError("row has " + std::to_string(cells.size()) +
                        " cells, table has " + std::to_string(header_.size()) +
                        " columns");
  }
  rows_.push_back(std::move(cells));
}

void AnalysisTable::Write(std::ostream& out) const {
  auto write_row = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out << ',';
      out << Quote(row[i]);
    }
    out << '\n';
  };
  write_row(header_);
  for (const auto& row : rows_) write_row(row);
}

std::string AnalysisTable::ToCsv() const {
  std::ostringstream out;
  Write(out);
  return out.str();
}

}  // namespace morphotok

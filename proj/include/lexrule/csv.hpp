#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "lexrule/error.hpp"

namespace lexrule::csv {

using Row = std::vector<std::string>;

/// RFC-4180 reader. Fields may be quoted; quoted fields may contain
/// separators, doubled quotes and line breaks. Accepts LF and CRLF.
class Reader {
 public:
  Reader(std::istream& in, std::string source_name);

  /// Reads the next record. Returns false at end of input.
  bool next(Row& row);

  /// Line number where the last returned record started (1-based).
  std::size_t line() const noexcept { return record_line_; }
  const std::string& source() const noexcept { return source_; }

 private:
  std::istream& in_;
  std::string source_;
  std::size_t line_ = 1;
  std::size_t record_line_ = 0;
};

/// A CSV file with a header row, addressed by column name.
struct Table {
  std::vector<std::string> header;
  std::vector<Row> rows;
  std::vector<std::size_t> lines;  // source line per row

  /// Index of `name` in the header; throws DataError if absent.
  std::size_t column(std::string_view name, const std::string& source) const;
};

Table read_table(std::istream& in, const std::string& source_name);
Table read_table_file(const std::string& path);

/// Quotes a field only when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);
void write_row(std::ostream& out, const Row& row);

}  // namespace lexrule::csv

#include "lexrule/csv.hpp"

#include <fstream>

namespace lexrule::csv {

Reader::Reader(std::istream& in, std::string source_name)
    : in_(in), source_(std::move(source_name)) {}

bool Reader::next(Row& row) {
  row.clear();
  int c = in_.get();
  if (c == std::char_traits<char>::eof()) return false;

  record_line_ = line_;
  std::string field;
  bool quoted = false;
  bool field_started = false;  // a quoted field has been closed
  for (;; c = in_.get()) {
    if (c == std::char_traits<char>::eof()) {
      if (quoted) throw DataError(source_, record_line_, "unterminated quoted field");
      row.push_back(std::move(field));
      return true;
    }
    char ch = static_cast<char>(c);
    if (quoted) {
      if (ch == '"') {
        if (in_.peek() == '"') {
          in_.get();
          field.push_back('"');
        } else {
          quoted = false;
          field_started = true;
        }
      } else {
        if (ch == '\n') ++line_;
        field.push_back(ch);
      }
      continue;
    }
    switch (ch) {
      case ',':
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
        break;
      case '\r':
        if (in_.peek() == '\n') in_.get();
        [[fallthrough]];
      case '\n':
        ++line_;
        row.push_back(std::move(field));
        return true;
      case '"':
        if (!field.empty() || field_started)
          throw DataError(source_, line_, "stray quote inside unquoted field");
        quoted = true;
        break;
      default:
        if (field_started)
          throw DataError(source_, line_, "text after closing quote");
        field.push_back(ch);
    }
  }
}

std::size_t Table::column(std::string_view name, const std::string& source) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw DataError(source, 1, "missing column '" + std::string(name) + "'");
}

Table read_table(std::istream& in, const std::string& source_name) {
  Reader reader(in, source_name);
  Table t;
  Row row;
  if (!reader.next(row)) throw DataError(source_name, 1, "empty CSV (no header)");
  // Tolerate a UTF-8 byte-order mark on the header.
  if (!row.empty() && row[0].starts_with("\xEF\xBB\xBF")) row[0].erase(0, 3);
  t.header = row;
  while (reader.next(row)) {
    if (row.size() == 1 && row[0].empty()) continue;  // blank line
    if (row.size() != t.header.size())
      throw DataError(source_name, reader.line(),
                      "expected " + std::to_string(t.header.size()) + " fields, got " +
                          std::to_string(row.size()));
    t.rows.push_back(row);
    t.lines.push_back(reader.line());
  }
  return t;
}

Table read_table_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return read_table(in, path);
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const Row& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out << ',';
    out << escape(row[i]);
  }
  out << '\n';
}

}  // namespace lexrule::csv

#include "stratkit/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "stratkit/errors.hpp"

namespace stratkit::csv {

std::optional<std::size_t> Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

namespace {

// Splits one logical record starting at `pos`; advances `pos` past the
// record's line terminator.
std::vector<std::string> parse_record(std::string_view text, std::size_t& pos) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  while (pos < text.size()) {
    const char c = text[pos];
    if (quoted) {
      if (c == '"') {
        if (pos + 1 < text.size() && text[pos + 1] == '"') {
          field.push_back('"');
          pos += 2;
        } else {
          quoted = false;
          ++pos;
        }
      } else {
        field.push_back(c);
        ++pos;
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        ++pos;
        break;
      case ',':
        fields.push_back(std::move(field));
        field.clear();
        ++pos;
        break;
      case '\r':
        ++pos;
        if (pos < text.size() && text[pos] == '\n') ++pos;
        fields.push_back(std::move(field));
        return fields;
      case '\n':
        ++pos;
        fields.push_back(std::move(field));
        return fields;
      default:
        field.push_back(c);
        ++pos;
        break;
    }
  }
  if (quoted) throw IoError("csv: unterminated quoted field");
  fields.push_back(std::move(field));
  return fields;
}

}  // namespace

Table parse(std::string_view text) {
  Table table;
  std::size_t pos = 0;
  if (text.empty()) throw IoError("csv: empty document (missing header)");
  table.header = parse_record(text, pos);
  while (pos < text.size()) {
    // A trailing newline produces no extra record.
    if (text.size() - pos == 0) break;
    std::vector<std::string> row = parse_record(text, pos);
    if (row.size() == 1 && row[0].empty() && pos >= text.size()) break;
    if (row.size() != table.header.size()) {
      throw IoError("csv: row " + std::to_string(table.rows.size() + 1) +
                    " has " + std::to_string(row.size()) + " fields, header has " +
                    std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

Table read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse(buf.str());
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

std::string escape(std::string_view field) {
  const bool needs_quotes =
      field.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!needs_quotes) return std::string(field);
  std::string out;
  out.reserve(field.size() + 2);
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << escape(fields[i]);
  }
  out << '\n';
}

void write_file(const std::string& path, const Table& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write file: " + path);
  write_row(out, table.header);
  for (const auto& row : table.rows) write_row(out, row);
  if (!out) throw IoError("write failed: " + path);
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw IoError("format_double failed");
  return std::string(buf, ptr);
}

double parse_double(std::string_view field, std::string_view context) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw DataError(std::string(context) + ": not a number: '" +
                    std::string(field) + "'");
  }
  return v;
}

std::int64_t parse_int(std::string_view field, std::string_view context) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw DataError(std::string(context) + ": not an integer: '" +
                    std::string(field) + "'");
  }
  return v;
}

}  // namespace stratkit::csv

#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stratkit::csv {

/// In-memory CSV document: one header row plus data rows of equal width.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> column(std::string_view name) const;
  std::size_t width() const { return header.size(); }
};

/// RFC-4180-style parse: quoted fields may contain commas, quotes ("" escape)
/// and newlines. Every row must match the header width.
Table parse(std::string_view text);
Table read_file(const std::string& path);

/// Quotes the field only when it contains a comma, quote, or newline.
std::string escape(std::string_view field);

void write_row(std::ostream& out, const std::vector<std::string>& fields);
void write_file(const std::string& path, const Table& table);

/// Shortest decimal string that round-trips the value (std::to_chars).
/// Deterministic, used for every numeric field the tool emits.
std::string format_double(double value);

double parse_double(std::string_view field, std::string_view context);
std::int64_t parse_int(std::string_view field, std::string_view context);

}  // namespace stratkit::csv

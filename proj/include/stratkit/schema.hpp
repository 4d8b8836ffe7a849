#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace stratkit {

/// Category 1 is the most difficult / least wealthy end (hard_to_easy) or
/// the easiest / wealthiest end (easy_to_hard). Only the orientation of the
/// final index depends on this; estimation never does.
enum class Direction { HardToEasy, EasyToHard };

enum class SchemaRole { Geographic, Wealth };

struct VariableSpec {
  std::string name;
  std::vector<std::string> categories;  // ordered labels, 2..9 of them
  Direction direction = Direction::HardToEasy;

  int category_count() const { return static_cast<int>(categories.size()); }
};

struct Schema {
  SchemaRole role = SchemaRole::Geographic;
  std::vector<VariableSpec> variables;

  std::size_t variable_count() const { return variables.size(); }
  /// Throws DataError on duplicate names, duplicate labels, or B < 2.
  void validate() const;
};

/// Immutable ordinal microdata: one 1-based category code per (record,
/// variable). group_keys is empty when the source had no group column.
struct OrdinalDataset {
  Schema schema;
  std::vector<std::string> unit_ids;
  std::vector<std::string> group_keys;
  std::vector<int> codes;  // row-major, record_count x variable_count

  std::size_t record_count() const { return unit_ids.size(); }
  int code(std::size_t record, std::size_t variable) const {
    return codes[record * schema.variable_count() + variable];
  }
  bool has_groups() const { return !group_keys.empty(); }
};

Direction direction_from_string(const std::string& s);
std::string to_string(Direction d);
SchemaRole role_from_string(const std::string& s);
std::string to_string(SchemaRole r);

/// Reads a schema document (JSON: {role, variables:[{name, categories,
/// direction}]}) and validates it.
Schema load_schema(const std::string& path);
Schema parse_schema(const std::string& json_text);
void save_schema(const Schema& schema, const std::string& path);

struct RowRejection {
  std::size_t row;  // 1-based data row number
  std::string message;
};

struct IngestOptions {
  /// When true, rows with unmappable labels are skipped and reported instead
  /// of aborting the ingest. Structural problems always throw.
  bool collect_rejections = false;
};

struct IngestResult {
  OrdinalDataset dataset;
  std::vector<RowRejection> rejections;
};

/// Reads delimited microdata. Column 1 is the unit id; a column named
/// "group" carries the optional group key; every schema variable must have a
/// column matching its name. Cells hold either the category label or the
/// 1..B integer code.
IngestResult ingest_records(const std::string& path, const Schema& schema,
                            const IngestOptions& options = {});
IngestResult ingest_csv_text(const std::string& text, const Schema& schema,
                             const IngestOptions& options = {});

/// One-hot expansion of a record: length sum(B_a), exactly one 1 per
/// variable block.
std::vector<int> one_hot(const OrdinalDataset& dataset, std::size_t record);

/// Writes the dataset back out with integer codes (round-trips through
/// ingest_records exactly).
void write_codes_csv(const OrdinalDataset& dataset, const std::string& path);

}  // namespace stratkit

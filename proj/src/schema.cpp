#include "stratkit/schema.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "stratkit/csv.hpp"
#include "stratkit/errors.hpp"

namespace stratkit {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

void Schema::validate() const {
  if (variables.empty()) throw DataError("schema: no variables");
  std::unordered_set<std::string> names;
  for (const auto& v : variables) {
    if (v.name.empty()) throw DataError("schema: empty variable name");
    if (!names.insert(v.name).second) {
      throw DataError("schema: duplicate variable name '" + v.name + "'");
    }
    if (v.category_count() < 2) {
      throw DataError("schema: variable '" + v.name +
                      "' needs at least 2 categories");
    }
    if (v.category_count() > 9) {
      throw DataError("schema: variable '" + v.name +
                      "' has more than 9 categories");
    }
    std::unordered_set<std::string> labels;
    for (const auto& label : v.categories) {
      if (!labels.insert(label).second) {
        throw DataError("schema: variable '" + v.name +
                        "' has duplicate category label '" + label + "'");
      }
    }
  }
}

Direction direction_from_string(const std::string& s) {
  if (s == "hard_to_easy") return Direction::HardToEasy;
  if (s == "easy_to_hard") return Direction::EasyToHard;
  throw DataError("schema: unknown direction '" + s + "'");
}

std::string to_string(Direction d) {
  return d == Direction::HardToEasy ? "hard_to_easy" : "easy_to_hard";
}

SchemaRole role_from_string(const std::string& s) {
  if (s == "geographic") return SchemaRole::Geographic;
  if (s == "wealth") return SchemaRole::Wealth;
  throw DataError("schema: unknown role '" + s + "'");
}

std::string to_string(SchemaRole r) {
  return r == SchemaRole::Geographic ? "geographic" : "wealth";
}

Schema parse_schema(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw IoError(std::string("schema: JSON parse failure: ") + e.what());
  }
  Schema schema;
  try {
    schema.role = role_from_string(doc.at("role").get<std::string>());
    for (const auto& v : doc.at("variables")) {
      VariableSpec spec;
      spec.name = v.at("name").get<std::string>();
      for (const auto& c : v.at("categories")) {
        spec.categories.push_back(c.get<std::string>());
      }
      spec.direction =
          direction_from_string(v.at("direction").get<std::string>());
      schema.variables.push_back(std::move(spec));
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("schema: malformed document: ") + e.what());
  }
  schema.validate();
  return schema;
}

Schema load_schema(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open schema file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_schema(buf.str());
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

void save_schema(const Schema& schema, const std::string& path) {
  ordered_json doc;
  doc["role"] = to_string(schema.role);
  doc["variables"] = ordered_json::array();
  for (const auto& v : schema.variables) {
    ordered_json var;
    var["name"] = v.name;
    var["categories"] = v.categories;
    var["direction"] = to_string(v.direction);
    doc["variables"].push_back(std::move(var));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write schema file: " + path);
  out << doc.dump(2) << '\n';
}

namespace {

// Accepts the category label verbatim, or the 1..B code as digits.
int map_code(const std::string& cell, const VariableSpec& var) {
  for (int b = 0; b < var.category_count(); ++b) {
    if (var.categories[static_cast<std::size_t>(b)] == cell) return b + 1;
  }
  int code = 0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), code);
  if (ec == std::errc() && ptr == cell.data() + cell.size() && code >= 1 &&
      code <= var.category_count()) {
    return code;
  }
  return 0;
}

}  // namespace

IngestResult ingest_csv_text(const std::string& text, const Schema& schema,
                             const IngestOptions& options) {
  schema.validate();
  const csv::Table table = csv::parse(text);
  if (table.header.empty()) throw DataError("microdata: empty header");

  // Column 1 is the unit id whatever its header says; "group" is reserved.
  std::optional<std::size_t> group_col;
  std::unordered_map<std::string, std::size_t> var_col;
  for (std::size_t i = 1; i < table.header.size(); ++i) {
    const std::string& name = table.header[i];
    if (name == "group") {
      if (group_col) throw DataError("microdata: duplicate 'group' column");
      group_col = i;
      continue;
    }
    bool known = false;
    for (const auto& v : schema.variables) {
      if (v.name == name) {
        known = true;
        break;
      }
    }
    if (!known) throw DataError("microdata: unexpected column '" + name + "'");
    if (!var_col.emplace(name, i).second) {
      throw DataError("microdata: duplicate column '" + name + "'");
    }
  }
  for (const auto& v : schema.variables) {
    if (!var_col.count(v.name)) {
      throw DataError("microdata: missing column '" + v.name + "'");
    }
  }

  IngestResult result;
  result.dataset.schema = schema;
  const std::size_t n_vars = schema.variable_count();
  std::unordered_set<std::string> seen_ids;

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t row_no = r + 1;
    const std::string& unit_id = row[0];
    if (unit_id.empty()) {
      throw DataError("microdata: row " + std::to_string(row_no) +
                      ": empty unit id");
    }
    std::vector<int> record(n_vars, 0);
    std::string bad;
    for (std::size_t a = 0; a < n_vars; ++a) {
      const VariableSpec& var = schema.variables[a];
      const std::string& cell = row[var_col.at(var.name)];
      const int code = map_code(cell, var);
      if (code == 0) {
        bad = "row " + std::to_string(row_no) + ": unknown label '" + cell +
              "' for variable '" + var.name + "'";
        break;
      }
      record[a] = code;
    }
    if (!bad.empty()) {
      if (options.collect_rejections) {
        result.rejections.push_back({row_no, bad});
        continue;
      }
      throw DataError("microdata: " + bad);
    }
    if (!seen_ids.insert(unit_id).second) {
      throw DataError("microdata: row " + std::to_string(row_no) +
                      ": duplicate unit id '" + unit_id + "'");
    }
    result.dataset.unit_ids.push_back(unit_id);
    if (group_col) {
      result.dataset.group_keys.push_back(row[*group_col]);
    }
    result.dataset.codes.insert(result.dataset.codes.end(), record.begin(),
                                record.end());
  }
  return result;
}

IngestResult ingest_records(const std::string& path, const Schema& schema,
                            const IngestOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open microdata file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return ingest_csv_text(buf.str(), schema, options);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

std::vector<int> one_hot(const OrdinalDataset& dataset, std::size_t record) {
  if (record >= dataset.record_count()) {
    throw DataError("one_hot: record index out of range");
  }
  std::size_t total = 0;
  for (const auto& v : dataset.schema.variables) {
    total += static_cast<std::size_t>(v.category_count());
  }
  std::vector<int> out(total, 0);
  std::size_t offset = 0;
  for (std::size_t a = 0; a < dataset.schema.variable_count(); ++a) {
    out[offset + static_cast<std::size_t>(dataset.code(record, a) - 1)] = 1;
    offset += static_cast<std::size_t>(
        dataset.schema.variables[a].category_count());
  }
  return out;
}

void write_codes_csv(const OrdinalDataset& dataset, const std::string& path) {
  csv::Table table;
  table.header.push_back("unit_id");
  if (dataset.has_groups()) table.header.push_back("group");
  for (const auto& v : dataset.schema.variables) table.header.push_back(v.name);
  for (std::size_t r = 0; r < dataset.record_count(); ++r) {
    std::vector<std::string> row;
    row.push_back(dataset.unit_ids[r]);
    if (dataset.has_groups()) row.push_back(dataset.group_keys[r]);
    for (std::size_t a = 0; a < dataset.schema.variable_count(); ++a) {
      row.push_back(std::to_string(dataset.code(r, a)));
    }
    table.rows.push_back(std::move(row));
  }
  csv::write_file(path, table);
}

}  // namespace stratkit

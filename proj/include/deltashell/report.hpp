#pragma once

// Table and summary emission.  Tables go out as CSV with '#' metadata
// lines; the optional JSON mirror carries the same metadata, column names
// and stringified cells verbatim, so both formats are byte-reproducible.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "deltashell/common.hpp"

namespace deltashell {

enum class OutputFormat { csv, json, both };

inline OutputFormat parse_format(const std::string& s) {
  if (s == "csv") return OutputFormat::csv;
  if (s == "json") return OutputFormat::json;
  if (s == "both") return OutputFormat::both;
  throw ConfigError("format must be one of csv, json, both: " + s);
}

struct Table {
  std::string name;  // file stem, e.g. "critical_levels"
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> cells) {
    if (cells.size() != columns.size())
      throw std::logic_error("Table: row width does not match columns");
    rows.push_back(std::move(cells));
  }
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file: " + path);
  out << content;
  if (!out) throw ConfigError("failed writing output file: " + path);
}

inline std::string table_csv(const Table& t) {
  std::string out;
  for (const auto& [k, v] : t.meta) out += "# " + k + " = " + v + "\n";
  for (std::size_t c = 0; c < t.columns.size(); ++c)
    out += (c ? "," : "") + t.columns[c];
  out += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "," : "") + row[c];
    out += "\n";
  }
  return out;
}

inline std::string table_json(const Table& t) {
  nlohmann::ordered_json j;
  for (const auto& [k, v] : t.meta) j["meta"][k] = v;
  j["columns"] = t.columns;
  j["rows"] = t.rows;
  return j.dump(2) + "\n";
}

// Writes <dir>/<name>.csv and/or .json according to the format choice.
inline void emit_table(const Table& t, const std::string& dir, OutputFormat fmt) {
  std::filesystem::create_directories(dir);
  if (fmt != OutputFormat::json)
    write_file(dir + "/" + t.name + ".csv", table_csv(t));
  if (fmt != OutputFormat::csv)
    write_file(dir + "/" + t.name + ".json", table_json(t));
}

// Keyed-text summaries ("key = value" lines) with the same metadata block.
inline void emit_summary(const std::string& name, const std::string& body,
                         const std::vector<std::pair<std::string, std::string>>& meta,
                         const std::string& dir, OutputFormat fmt) {
  std::filesystem::create_directories(dir);
  std::string head;
  for (const auto& [k, v] : meta) head += "# " + k + " = " + v + "\n";
  if (fmt != OutputFormat::json)
    write_file(dir + "/" + name + ".txt", head + body);
  if (fmt != OutputFormat::csv) {
    nlohmann::ordered_json j;
    for (const auto& [k, v] : meta) j["meta"][k] = v;
    std::istringstream lines(body);
    std::string line;
    while (std::getline(lines, line)) {
      std::size_t eq = line.find(" = ");
      if (eq == std::string::npos) continue;
      j["values"][line.substr(0, eq)] = line.substr(eq + 3);
    }
    write_file(dir + "/" + name + ".json", j.dump(2) + "\n");
  }
}

}  // namespace deltashell

#pragma once

#include <string>
#include <utility>
#include <vector>

namespace taushape {

// Columnar text container used for every persisted artifact: a kind line
// with a schema version, ordered `key: value` metadata, then named columns.
// Doubles are written with 17 significant digits, so a read-back reproduces
// them bit-exactly, and rewriting an unchanged table is byte-identical.
//
//   taushape <kind> <schema_version>
//   <key>: <value>
//   ...
//   columns: [id] <name> <name> ...
//   <id?> <v> <v> ...
struct TextTable {
  std::string kind;
  int schema_version = 1;
  std::vector<std::pair<std::string, std::string>> meta;
  std::string id_column;            // optional leading string column
  std::vector<std::string> columns; // numeric column names
  std::vector<std::string> ids;     // one per row when id_column set
  std::vector<std::vector<double>> rows;

  void set_meta(const std::string& key, const std::string& value);
  void set_meta(const std::string& key, double value);
  void set_meta(const std::string& key, long value);
  bool has_meta(const std::string& key) const;
  const std::string& get_meta(const std::string& key) const;
  double get_meta_double(const std::string& key) const;
  long get_meta_long(const std::string& key) const;

  int column_index(const std::string& name) const;
  std::vector<double> column(const std::string& name) const;

  void save(const std::string& path) const;
  std::string to_string() const;
  static TextTable load(const std::string& path);
  static TextTable parse(const std::string& text, const std::string& origin);
};

// Shortest round-trip-exact decimal rendering (17 significant digits).
std::string format_double(double v);

}  // namespace taushape

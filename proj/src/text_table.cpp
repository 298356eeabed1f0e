#include "taushape/text_table.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "taushape/errors.hpp"

namespace taushape {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void TextTable::set_meta(const std::string& key, const std::string& value) {
  for (auto& kv : meta)
    if (kv.first == key) {
      kv.second = value;
      return;
    }
  meta.emplace_back(key, value);
}

void TextTable::set_meta(const std::string& key, double value) {
  set_meta(key, format_double(value));
}

void TextTable::set_meta(const std::string& key, long value) {
  set_meta(key, std::to_string(value));
}

bool TextTable::has_meta(const std::string& key) const {
  for (const auto& kv : meta)
    if (kv.first == key) return true;
  return false;
}

const std::string& TextTable::get_meta(const std::string& key) const {
  for (const auto& kv : meta)
    if (kv.first == key) return kv.second;
  throw SchemaError("missing metadata field: " + key);
}

double TextTable::get_meta_double(const std::string& key) const {
  return std::stod(get_meta(key));
}

long TextTable::get_meta_long(const std::string& key) const {
  return std::stol(get_meta(key));
}

int TextTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<int>(i);
  throw SchemaError("missing column: " + name);
}

std::vector<double> TextTable::column(const std::string& name) const {
  int idx = column_index(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[idx]);
  return out;
}

std::string TextTable::to_string() const {
  std::ostringstream os;
  os << "taushape " << kind << ' ' << schema_version << '\n';
  for (const auto& kv : meta) os << kv.first << ": " << kv.second << '\n';
  os << "columns:";
  if (!id_column.empty()) os << " #" << id_column;
  for (const auto& c : columns) os << ' ' << c;
  os << '\n';
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!id_column.empty()) os << ids[i] << ' ';
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      if (j) os << ' ';
      os << format_double(rows[i][j]);
    }
    os << '\n';
  }
  return os.str();
}

void TextTable::save(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path);
  f << to_string();
  if (!f) throw IoError("write failed: " + path);
}

TextTable TextTable::load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse(buf.str(), path);
}

TextTable TextTable::parse(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    throw SchemaError(origin + ": empty file");
  TextTable t;
  {
    std::istringstream head(line);
    std::string magic;
    head >> magic >> t.kind >> t.schema_version;
    if (magic != "taushape" || t.kind.empty())
      throw SchemaError(origin + ": not a taushape table");
  }
  bool in_meta = true;
  bool has_id = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (in_meta) {
      if (line.rfind("columns:", 0) == 0) {
        std::istringstream cs(line.substr(8));
        std::string name;
        std::vector<std::string> names;
        while (cs >> name) names.push_back(name);
        if (names.empty()) throw SchemaError(origin + ": no columns");
        // A leading non-numeric id column is marked with a '#' prefix.
        if (names.front().front() == '#') {
          t.id_column = names.front().substr(1);
          has_id = true;
          names.erase(names.begin());
        }
        t.columns = names;
        in_meta = false;
        continue;
      }
      auto pos = line.find(": ");
      if (pos == std::string::npos)
        throw SchemaError(origin + ": malformed metadata line: " + line);
      t.meta.emplace_back(line.substr(0, pos), line.substr(pos + 2));
      continue;
    }
    std::istringstream rs(line);
    std::vector<double> row(t.columns.size());
    if (has_id) {
      std::string id;
      rs >> id;
      t.ids.push_back(id);
    }
    for (std::size_t j = 0; j < t.columns.size(); ++j) {
      if (!(rs >> row[j]))
        throw SchemaError(origin + ": short data row: " + line);
    }
    t.rows.push_back(std::move(row));
  }
  if (in_meta) throw SchemaError(origin + ": missing columns line");
  return t;
}

}  // namespace taushape

#include "malsim/csv.hpp"

#include <cstdio>

namespace malsim {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string CsvTable::to_string() const {
  std::string out;
  for (const std::string& line : provenance) out += "# " + line + "\n";
  for (std::size_t k = 0; k < columns.size(); ++k) {
    if (k) out += ',';
    out += columns[k];
  }
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k) out += ',';
      out += format_double(row[k]);
    }
    out += '\n';
  }
  return out;
}

void KeyValueReport::add(const std::string& key, const std::string& value) {
  entries.emplace_back(key, value);
}

void KeyValueReport::add(const std::string& key, double value) {
  entries.emplace_back(key, format_double(value));
}

std::string KeyValueReport::to_string() const {
  std::string out;
  for (const auto& [key, value] : entries) out += key + " = " + value + "\n";
  return out;
}

} // namespace malsim

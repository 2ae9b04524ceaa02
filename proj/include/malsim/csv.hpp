#pragma once

#include <string>
#include <utility>
#include <vector>

namespace malsim {

// Deterministic CSV document: '#'-prefixed provenance lines, one header row,
// then numeric rows printed with 17 significant digits (lossless round-trip).
struct CsvTable {
  std::vector<std::string> provenance; // emitted as "# key: value" lines
  std::vector<std::string> columns;    // header cells, e.g. "t_years"
  std::vector<std::vector<double>> rows;

  std::string to_string() const;
};

// %.17g formatting shared by every emitter.
std::string format_double(double v);

// Flat key-value results file ("key = value" lines, fixed order).
struct KeyValueReport {
  std::vector<std::pair<std::string, std::string>> entries;

  void add(const std::string& key, const std::string& value);
  void add(const std::string& key, double value);
  std::string to_string() const;
};

} // namespace malsim

#pragma once

#include <stdexcept>
#include <string>

namespace malsim {

// Numerical failure inside an integrator (NaN/overflow in a cell).
class BlowupError : public std::runtime_error {
public:
  BlowupError(const std::string& what, int cell_index, double time)
      : std::runtime_error(what), cell(cell_index), t(time) {}
  int cell;
  double t;
};

// Fixed-point iteration in the characteristics oracle failed to converge.
class OracleError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Config-file problem with source location (1-based line/column).
class ConfigError : public std::runtime_error {
public:
  ConfigError(const std::string& what, int line_, int col_)
      : std::runtime_error(what + " (line " + std::to_string(line_) + ", col " +
                           std::to_string(col_) + ")"),
        line(line_), col(col_) {}
  int line;
  int col;
};

} // namespace malsim

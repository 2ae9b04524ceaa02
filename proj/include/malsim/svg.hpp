#pragma once

#include <string>
#include <vector>

namespace malsim {

struct SvgSeries {
  std::string label;
  std::vector<double> x, y;
};

struct SvgStyle {
  std::string title;
  std::string x_label = "t (years)";
  std::string y_label;
  bool log_y = false;
  int width = 860;
  int height = 520;
};

// Self-contained deterministic SVG 1.1 line chart: one polyline per series,
// axes with tick labels, legend, optional log-scale y axis. With log_y,
// nonpositive values are clamped to a tenth of the smallest positive value
// and the figure carries a warning annotation saying how many were clamped.
// Throws std::invalid_argument when there is nothing to plot (no series, no
// points, mismatched x/y) or when log_y finds no positive value at all.
std::string line_chart_svg(const std::vector<SvgSeries>& series,
                           const SvgStyle& style);

} // namespace malsim

#include "malsim/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace malsim {

namespace {

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&')
      out += "&amp;";
    else if (c == '<')
      out += "&lt;";
    else if (c == '>')
      out += "&gt;";
    else
      out += c;
  }
  return out;
}

// 1-2-5 tick step covering roughly `target` divisions of `range`.
double nice_step(double range, int target) {
  const double rough = range / target;
  const double mag = std::pow(10.0, std::floor(std::log10(rough)));
  for (double mult : {1.0, 2.0, 5.0, 10.0})
    if (mult * mag >= rough) return mult * mag;
  return 10.0 * mag;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#9467bd", "#ff7f0e", "#8c564b"};

} // namespace

std::string line_chart_svg(const std::vector<SvgSeries>& series,
                           const SvgStyle& style) {
  if (series.empty())
    throw std::invalid_argument("line_chart_svg: no series to plot");
  std::size_t points = 0;
  for (const SvgSeries& s : series) {
    if (s.x.size() != s.y.size())
      throw std::invalid_argument("line_chart_svg: x/y size mismatch in '" +
                                  s.label + "'");
    points += s.x.size();
  }
  if (points == 0)
    throw std::invalid_argument("line_chart_svg: all series are empty");

  // Value transform (identity or log10 with clamping).
  double min_pos = std::numeric_limits<double>::infinity();
  long clamped = 0;
  if (style.log_y) {
    for (const SvgSeries& s : series)
      for (double v : s.y)
        if (v > 0.0) min_pos = std::min(min_pos, v);
    if (!std::isfinite(min_pos))
      throw std::invalid_argument(
          "line_chart_svg: log scale needs at least one positive value");
    for (const SvgSeries& s : series)
      for (double v : s.y)
        if (!(v > 0.0)) ++clamped;
  }
  const double floor_value = style.log_y ? min_pos / 10.0 : 0.0;
  auto transform = [&](double v) {
    if (!style.log_y) return v;
    return std::log10(std::max(v, floor_value));
  };

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0;
  double y0 = std::numeric_limits<double>::infinity(), y1 = -y0;
  for (const SvgSeries& s : series)
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      x0 = std::min(x0, s.x[k]);
      x1 = std::max(x1, s.x[k]);
      const double v = transform(s.y[k]);
      y0 = std::min(y0, v);
      y1 = std::max(y1, v);
    }
  if (x1 <= x0) x1 = x0 + 1.0;
  if (y1 <= y0) {
    y0 -= style.log_y ? 0.5 : 1.0;
    y1 += style.log_y ? 0.5 : 1.0;
  }
  const double y_pad = 0.05 * (y1 - y0);
  y0 -= y_pad;
  y1 += y_pad;

  const double W = style.width, H = style.height;
  const double L = 74, R = 18, T = 42, B = 52;
  auto map_x = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto map_y = [&](double v) {
    return H - B - (v - y0) / (y1 - y0) * (H - T - B);
  };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
         std::to_string(style.width) + "\" height=\"" +
         std::to_string(style.height) + "\" viewBox=\"0 0 " +
         std::to_string(style.width) + " " + std::to_string(style.height) +
         "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";

  // Gridlines and ticks.
  out += "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"#333333\">\n";
  const double xstep = nice_step(x1 - x0, 6);
  for (double tx = std::ceil(x0 / xstep) * xstep; tx <= x1 + 1e-9 * xstep;
       tx += xstep) {
    const double gx = map_x(tx);
    out += "<line x1=\"" + px(gx) + "\" y1=\"" + px(T) + "\" x2=\"" + px(gx) +
           "\" y2=\"" + px(H - B) + "\" stroke=\"#e0e0e0\"/>\n";
    out += "<text x=\"" + px(gx) + "\" y=\"" + px(H - B + 18) +
           "\" text-anchor=\"middle\">" + tick_label(tx) + "</text>\n";
  }
  if (style.log_y) {
    const int d0 = static_cast<int>(std::ceil(y0));
    const int d1 = static_cast<int>(std::floor(y1));
    const int step = std::max(1, (d1 - d0) / 8 + ((d1 - d0) % 8 ? 1 : 0));
    for (int d = d0; d <= d1; d += step) {
      const double gy = map_y(d);
      out += "<line x1=\"" + px(L) + "\" y1=\"" + px(gy) + "\" x2=\"" +
             px(W - R) + "\" y2=\"" + px(gy) + "\" stroke=\"#e0e0e0\"/>\n";
      out += "<text x=\"" + px(L - 8) + "\" y=\"" + px(gy + 4) +
             "\" text-anchor=\"end\">1e" + std::to_string(d) + "</text>\n";
    }
  } else {
    const double ystep = nice_step(y1 - y0, 6);
    for (double ty = std::ceil(y0 / ystep) * ystep; ty <= y1 + 1e-9 * ystep;
         ty += ystep) {
      const double gy = map_y(ty);
      out += "<line x1=\"" + px(L) + "\" y1=\"" + px(gy) + "\" x2=\"" +
             px(W - R) + "\" y2=\"" + px(gy) + "\" stroke=\"#e0e0e0\"/>\n";
      out += "<text x=\"" + px(L - 8) + "\" y=\"" + px(gy + 4) +
             "\" text-anchor=\"end\">" + tick_label(ty) + "</text>\n";
    }
  }
  out += "</g>\n";

  // Axes.
  out += "<line x1=\"" + px(L) + "\" y1=\"" + px(H - B) + "\" x2=\"" +
         px(W - R) + "\" y2=\"" + px(H - B) +
         "\" stroke=\"#333333\" stroke-width=\"1.2\"/>\n";
  out += "<line x1=\"" + px(L) + "\" y1=\"" + px(T) + "\" x2=\"" + px(L) +
         "\" y2=\"" + px(H - B) +
         "\" stroke=\"#333333\" stroke-width=\"1.2\"/>\n";

  // Series polylines.
  for (std::size_t si = 0; si < series.size(); ++si) {
    const SvgSeries& s = series[si];
    if (s.x.empty()) continue;
    const char* color = kPalette[si % (sizeof kPalette / sizeof *kPalette)];
    std::string pts;
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      if (k) pts += ' ';
      pts += px(map_x(s.x[k])) + "," + px(map_y(transform(s.y[k])));
    }
    out += "<polyline fill=\"none\" stroke=\"";
    out += color;
    out += "\" stroke-width=\"1.6\" points=\"" + pts + "\"/>\n";
  }

  // Labels, title, legend, clamp warning.
  out += "<g font-family=\"sans-serif\" font-size=\"13\" fill=\"#111111\">\n";
  if (!style.title.empty())
    out += "<text x=\"" + px(0.5 * W) + "\" y=\"24\" text-anchor=\"middle\" "
           "font-size=\"15\">" +
           escape(style.title) + "</text>\n";
  out += "<text x=\"" + px(L + 0.5 * (W - L - R)) + "\" y=\"" + px(H - 10) +
         "\" text-anchor=\"middle\">" + escape(style.x_label) + "</text>\n";
  if (!style.y_label.empty())
    out += "<text x=\"16\" y=\"" + px(T + 0.5 * (H - T - B)) +
           "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
           px(T + 0.5 * (H - T - B)) + ")\">" +
           escape(style.y_label + (style.log_y ? " (log scale)" : "")) +
           "</text>\n";
  double ly = T + 14;
  for (std::size_t si = 0; si < series.size(); ++si) {
    const char* color = kPalette[si % (sizeof kPalette / sizeof *kPalette)];
    const double lx = W - R - 170;
    out += "<line x1=\"" + px(lx) + "\" y1=\"" + px(ly - 4) + "\" x2=\"" +
           px(lx + 24) + "\" y2=\"" + px(ly - 4) + "\" stroke=\"";
    out += color;
    out += "\" stroke-width=\"1.6\"/>\n";
    out += "<text x=\"" + px(lx + 30) + "\" y=\"" + px(ly) + "\">" +
           escape(series[si].label) + "</text>\n";
    ly += 18;
  }
  if (clamped > 0)
    out += "<text x=\"" + px(L + 6) + "\" y=\"" + px(T + 14) +
           "\" fill=\"#b04000\" font-size=\"12\">warning: " +
           std::to_string(clamped) + " nonpositive value(s) clamped to " +
           tick_label(floor_value) + " for the log scale</text>\n";
  out += "</g>\n</svg>\n";
  return out;
}

} // namespace malsim

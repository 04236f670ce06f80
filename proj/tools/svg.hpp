#pragma once

// Bare-bones SVG line plots and CSV tables for figure data.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "unhippo/errors.hpp"
#include "unhippo/signals.hpp"

namespace unhippo::cli {

struct Series {
  std::string name;
  std::vector<double> y;
};

struct Plot {
  std::string title;
  std::string x_label;
  std::vector<double> x;
  std::vector<Series> series;
  bool log_y = false;
};

/// Columns x, series... with a header row.
inline void write_plot_csv(const std::string& path, const Plot& plot) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << plot.x_label;
  for (const Series& s : plot.series) out << ',' << s.name;
  out << '\n';
  for (std::size_t i = 0; i < plot.x.size(); ++i) {
    out << format_double(plot.x[i]);
    for (const Series& s : plot.series) {
      out << ',' << (i < s.y.size() ? format_double(s.y[i]) : std::string("nan"));
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

namespace detail {

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

}  // namespace detail

inline void write_plot_svg(const std::string& path, const Plot& plot) {
  constexpr double width = 720, height = 420, left = 70, right = 170, top = 40,
                   bottom = 50;
  const auto ty = [&](double v) { return plot.log_y ? std::log10(std::abs(v)) : v; };
  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = x_lo, y_hi = -x_lo;
  for (double x : plot.x) {
    x_lo = std::min(x_lo, x);
    x_hi = std::max(x_hi, x);
  }
  for (const Series& s : plot.series) {
    for (double v : s.y) {
      const double y = ty(v);
      if (!std::isfinite(y)) continue;
      y_lo = std::min(y_lo, y);
      y_hi = std::max(y_hi, y);
    }
  }
  if (!std::isfinite(x_lo) || x_hi <= x_lo) { x_lo = 0; x_hi = 1; }
  if (!std::isfinite(y_lo)) { y_lo = 0; y_hi = 1; }
  if (y_hi <= y_lo) { y_lo -= 0.5; y_hi += 0.5; }
  const double pw = width - left - right, ph = height - top - bottom;
  const auto px = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * pw; };
  const auto py = [&](double y) { return top + (y_hi - y) / (y_hi - y_lo) * ph; };

  static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                 "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << left << "\" y=\"24\" font-size=\"15\">"
      << detail::xml_escape(plot.title) << "</text>\n"
      << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\""
      << ph << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x_lo + (x_hi - x_lo) * i / 4.0;
    const double yv = y_lo + (y_hi - y_lo) * i / 4.0;
    out << "<text x=\"" << px(xv) << "\" y=\"" << top + ph + 16
        << "\" text-anchor=\"middle\">" << detail::fmt(xv) << "</text>\n"
        << "<text x=\"" << left - 6 << "\" y=\"" << py(yv) + 4
        << "\" text-anchor=\"end\">" << (plot.log_y ? "1e" : "") << detail::fmt(yv)
        << "</text>\n";
  }
  out << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 10
      << "\" text-anchor=\"middle\">" << detail::xml_escape(plot.x_label) << "</text>\n";
  for (std::size_t s = 0; s < plot.series.size(); ++s) {
    const char* color = colors[s % 8];
    std::string points;
    const auto flush = [&] {
      if (!points.empty()) {
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\""
            << points << "\"/>\n";
      }
      points.clear();
    };
    const auto& ys = plot.series[s].y;
    for (std::size_t i = 0; i < plot.x.size() && i < ys.size(); ++i) {
      const double y = ty(ys[i]);
      if (!std::isfinite(y)) {
        flush();
        continue;
      }
      points += detail::fmt(px(plot.x[i])) + "," +
                detail::fmt(py(std::clamp(y, y_lo, y_hi))) + " ";
    }
    flush();
    const double ly = top + 14 + 16 * static_cast<double>(s);
    out << "<line x1=\"" << left + pw + 10 << "\" y1=\"" << ly - 4 << "\" x2=\""
        << left + pw + 30 << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n<text x=\"" << left + pw + 34 << "\" y=\"" << ly
        << "\">" << detail::xml_escape(plot.series[s].name) << "</text>\n";
  }
  out << "</svg>\n";
  if (!out) throw IoError("write failed: " + path);
}

/// Writes <dir>/<stem>.csv and <dir>/<stem>.svg; returns the csv path.
inline std::string emit_plot(const std::string& dir, const std::string& stem,
                             const Plot& plot) {
  const std::string base = dir + "/" + stem;
  write_plot_csv(base + ".csv", plot);
  write_plot_svg(base + ".svg", plot);
  return base + ".csv";
}

}  // namespace unhippo::cli

#include "firewatch/sim/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace firewatch {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

std::string render_line_chart(const std::string& title,
                              const std::string& x_label,
                              const std::string& y_label,
                              const std::vector<PlotSeries>& series) {
  constexpr double kW = 720, kH = 440;
  constexpr double kL = 70, kR = 160, kT = 48, kB = 56;

  double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
  double y_min = x_min, y_max = -x_min;
  for (const PlotSeries& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x_min = std::min(x_min, s.x[i]);
      x_max = std::max(x_max, s.x[i]);
      y_min = std::min(y_min, s.y[i]);
      y_max = std::max(y_max, s.y[i]);
    }
  }
  if (!std::isfinite(x_min)) {
    x_min = 0, x_max = 1, y_min = 0, y_max = 1;
  }
  if (x_max == x_min) x_max = x_min + 1;
  if (y_max == y_min) y_max = y_min + 1;

  auto px = [&](double x) { return kL + (x - x_min) / (x_max - x_min) * (kW - kL - kR); };
  auto py = [&](double y) { return kH - kB - (y - y_min) / (y_max - y_min) * (kH - kT - kB); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW
      << "\" height=\"" << kH << "\" viewBox=\"0 0 " << kW << ' ' << kH
      << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">"
      << title << "</text>\n";

  // Axes with 5 ticks each.
  svg << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = x_min + (x_max - x_min) * i / 5.0;
    const double yv = y_min + (y_max - y_min) * i / 5.0;
    svg << "<line x1=\"" << num(px(xv)) << "\" y1=\"" << kH - kB << "\" x2=\""
        << num(px(xv)) << "\" y2=\"" << kT << "\" stroke=\"#eee\"/>\n";
    svg << "<line x1=\"" << kL << "\" y1=\"" << num(py(yv)) << "\" x2=\""
        << kW - kR << "\" y2=\"" << num(py(yv)) << "\" stroke=\"#eee\"/>\n";
    svg << "<text x=\"" << num(px(xv)) << "\" y=\"" << kH - kB + 16
        << "\" text-anchor=\"middle\">" << num(xv) << "</text>\n";
    svg << "<text x=\"" << kL - 6 << "\" y=\"" << num(py(yv) + 4)
        << "\" text-anchor=\"end\">" << num(yv) << "</text>\n";
  }
  svg << "</g>\n";
  svg << "<line x1=\"" << kL << "\" y1=\"" << kH - kB << "\" x2=\"" << kW - kR
      << "\" y2=\"" << kH - kB << "\" stroke=\"#333\"/>\n";
  svg << "<line x1=\"" << kL << "\" y1=\"" << kH - kB << "\" x2=\"" << kL
      << "\" y2=\"" << kT << "\" stroke=\"#333\"/>\n";
  svg << "<text x=\"" << (kL + kW - kR) / 2 << "\" y=\"" << kH - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\">"
      << x_label << "</text>\n";
  svg << "<text x=\"18\" y=\"" << (kT + kH - kB) / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\" transform=\"rotate(-90 18 "
      << (kT + kH - kB) / 2 << ")\">" << y_label << "</text>\n";

  int ci = 0;
  for (const PlotSeries& s : series) {
    const char* color = kPalette[ci % 8];
    svg << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      svg << num(px(s.x[i])) << ',' << num(py(s.y[i])) << ' ';
    }
    svg << "\"/>\n";
    svg << "<text x=\"" << kW - kR + 14 << "\" y=\"" << kT + 16 + 16 * ci
        << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << color
        << "\">" << s.name << "</text>\n";
    ++ci;
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<PlotSeries>& series) {
  std::ofstream out(path);
  out << render_line_chart(title, x_label, y_label, series);
}

}  // namespace firewatch

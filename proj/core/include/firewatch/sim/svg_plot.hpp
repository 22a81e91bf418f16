#pragma once

#include <string>
#include <vector>

namespace firewatch {

// Minimal standalone SVG line chart, enough to eyeball metric series without
// an interactive UI.
struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

std::string render_line_chart(const std::string& title,
                              const std::string& x_label,
                              const std::string& y_label,
                              const std::vector<PlotSeries>& series);

void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<PlotSeries>& series);

}  // namespace firewatch

#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace bct {

struct SvgSeries {
  std::string label;
  std::string color;
  std::vector<std::pair<double, double>> points;
};

struct SvgChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::optional<double> hline;  // horizontal reference line
  std::string hline_label;
  int width = 880;
  int height = 540;
};

/// Minimal line chart: axes with ticks, one polyline per series, an
/// optional dashed reference line and a legend. Pure function of its
/// inputs so charts are reproducible from their CSVs.
std::string render_line_chart(const SvgChartSpec& spec,
                              const std::vector<SvgSeries>& series);

}  // namespace bct

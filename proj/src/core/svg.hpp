#pragma once

#include <string>
#include <vector>

namespace aist {

// Minimal static-plot writer; enough for the report bundle, no dependencies.
struct SvgSeries {
  std::string label;
  std::string color;            // CSS color
  bool connect = false;         // draw a polyline through the points
  std::vector<double> x, y;
};

void svg_scatter(const std::string& path, const std::string& title,
                 const std::string& x_label, const std::string& y_label,
                 const std::vector<SvgSeries>& series);

// values is rows x cols row-major; rendered as a white->red grid.
void svg_heatmap(const std::string& path, const std::string& title,
                 const std::vector<std::string>& col_labels,
                 const std::vector<double>& values, size_t rows, size_t cols);

}  // namespace aist

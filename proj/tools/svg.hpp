#pragma once

// Minimal SVG output: line plots and an equirectangular heatmap.

#include <string>
#include <vector>

namespace biphoton::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

std::string line_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                      const std::vector<Series>& series);

/// values[i * cols + j]; row 0 drawn at the top.
std::string heatmap(const std::string& title, const std::vector<double>& values, int rows, int cols);

}  // namespace biphoton::svg

#pragma once

#include <string>
#include <vector>

#include "grokdyn/types.hpp"

namespace grokdyn::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  double opacity = 1.0;
  double width = 1.5;
  bool markers = false;
};

struct LinePlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<Series> series;
  /// Extra line segments drawn underneath the data (e.g. a zero-loss set).
  std::vector<Series> overlays;
};

struct BarGroup {
  std::string label;
  std::vector<double> values;  // one value per category
  std::string color;
};

struct BarChart {
  std::string title;
  std::string y_label;
  std::vector<std::string> categories;
  std::vector<BarGroup> groups;
};

struct Heatmap {
  std::string title;
  Matrix values;  // expected in [0, 1]
  std::vector<std::string> row_labels;
};

std::string render(const LinePlot& plot);
std::string render(const BarChart& chart);
std::string render(const Heatmap& map);

/// Palette colour for series i.
std::string palette(std::size_t i);

}  // namespace grokdyn::svg

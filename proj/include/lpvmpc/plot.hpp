#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace lpvmpc::plot {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  double width = 1.5;
  bool dashed = false;
};

/// Minimal self-contained SVG line chart: axes, ticks, grid, legend. No
/// external assets or stylesheets.
struct Figure {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  std::vector<Series> series;
  bool equal_aspect = false;
  int width = 860;
  int height = 560;

  std::string render() const;
  void save(const std::filesystem::path& path) const;
};

}  // namespace lpvmpc::plot

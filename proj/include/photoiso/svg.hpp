#pragma once
// Minimal self-contained SVG line plots.
#include <string>
#include <vector>

namespace photoiso {

struct Series {
  std::string label;
  std::vector<double> x, y;
  std::string dash;  // SVG stroke-dasharray, empty for solid
};

struct Plot {
  std::string title, xlabel, ylabel;
  bool logx = false, logy = false;
  std::vector<Series> series;
};

std::string render_svg(const std::vector<Plot>& panels, int panel_width = 520, int panel_height = 360);
void write_svg(const std::string& path, const std::vector<Plot>& panels);

}  // namespace photoiso

#pragma once

#include <string>
#include <vector>

namespace taushape {

// Minimal self-contained SVG line charts with credible ribbons, used for the
// type-I-error / power / assurance figures. No external renderer.
struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> lo;  // optional ribbon; empty to skip
  std::vector<double> hi;
  bool dashed = false;
};

struct SvgMarkerSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct SvgPlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  std::vector<SvgSeries> series;
  std::vector<SvgMarkerSeries> markers;
  // Dashed vertical annotation lines, e.g. assurance-target crossings.
  std::vector<std::pair<double, std::string>> vlines;

  std::string render(int width = 720, int height = 480) const;
  void save(const std::string& path, int width = 720, int height = 480) const;
};

}  // namespace taushape

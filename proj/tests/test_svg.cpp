#include <doctest.h>

#include "taushape/errors.hpp"
#include "taushape/svg.hpp"

using namespace taushape;

namespace {

SvgPlot sample_plot() {
  SvgPlot plot;
  plot.title = "demo";
  plot.x_label = "n";
  plot.y_label = "oc";
  SvgSeries s;
  s.label = "curve";
  s.x = {10, 100, 1000};
  s.y = {0.4, 0.3, 0.25};
  s.lo = {0.35, 0.28, 0.24};
  s.hi = {0.45, 0.32, 0.26};
  plot.series.push_back(s);
  SvgSeries dashed;
  dashed.label = "other";
  dashed.dashed = true;
  dashed.x = {10, 100, 1000};
  dashed.y = {0.2, 0.22, 0.21};
  plot.series.push_back(dashed);
  plot.vlines.emplace_back(300.0, "n=300");
  return plot;
}

}  // namespace

TEST_CASE("svg rendering contains the expected elements") {
  std::string svg = sample_plot().render();
  CHECK(svg.find("<svg") == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK(svg.find("<polygon") != std::string::npos);       // credible ribbon
  CHECK(svg.find("stroke-dasharray") != std::string::npos);  // dashed line
  CHECK(svg.find("n=300") != std::string::npos);           // vline annotation
  CHECK(svg.find("curve") != std::string::npos);           // legend entry
  CHECK(svg.find("demo") != std::string::npos);
}

TEST_CASE("svg rendering is deterministic") {
  CHECK(sample_plot().render() == sample_plot().render());
}

TEST_CASE("log-x rendering") {
  SvgPlot plot = sample_plot();
  plot.log_x = true;
  std::string svg = plot.render();
  CHECK(svg.find("<polyline") != std::string::npos);
}

TEST_CASE("empty plot raises") {
  SvgPlot plot;
  CHECK_THROWS_AS(plot.render(), InvalidParameter);
}

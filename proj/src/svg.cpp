#include "taushape/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "taushape/errors.hpp"

namespace taushape {

namespace {

const char* kPalette[] = {"#1f6fb4", "#d95f02", "#2ca05a", "#7550a3",
                          "#c23b61", "#6b6b6b"};
constexpr int kPaletteSize = 6;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (!(hi > lo)) {
      lo -= 0.5;
      hi += 0.5;
    }
    double m = 0.05 * (hi - lo);
    lo -= m;
    hi += m;
  }
};

// Round tick spacing to 1/2/5 times a power of ten.
std::vector<double> ticks(double lo, double hi, int want = 6) {
  double span = hi - lo;
  double raw = span / want;
  double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double norm = raw / mag;
  double step = (norm < 1.5 ? 1.0 : norm < 3.5 ? 2.0 : norm < 7.5 ? 5.0 : 10.0) * mag;
  std::vector<double> out;
  double t = std::ceil(lo / step) * step;
  for (; t <= hi + 1e-12 * span; t += step) out.push_back(t);
  return out;
}

}  // namespace

std::string SvgPlot::render(int width, int height) const {
  const double ml = 64, mr = 16, mt = title.empty() ? 16 : 36, mb = 48;
  const double pw = width - ml - mr, ph = height - mt - mb;

  auto tx = [&](double v) { return log_x ? std::log10(v) : v; };
  Range xr, yr;
  for (const auto& s : series) {
    for (double v : s.x) xr.add(tx(v));
    for (double v : s.y) yr.add(v);
    for (double v : s.lo) yr.add(v);
    for (double v : s.hi) yr.add(v);
  }
  for (const auto& s : markers) {
    for (double v : s.x) xr.add(tx(v));
    for (double v : s.y) yr.add(v);
  }
  for (const auto& vl : vlines) xr.add(tx(vl.first));
  if (!std::isfinite(xr.lo) || !std::isfinite(yr.lo))
    throw InvalidParameter("svg plot: no finite data");
  xr.pad();
  yr.pad();

  auto px = [&](double v) { return ml + (tx(v) - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double v) { return mt + (yr.hi - v) / (yr.hi - yr.lo) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
     << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' '
     << height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<g font-family=\"sans-serif\" font-size=\"12\">\n";

  // axes + grid
  for (double t : ticks(xr.lo, xr.hi)) {
    double raw = log_x ? std::pow(10.0, t) : t;
    double x = ml + (t - xr.lo) / (xr.hi - xr.lo) * pw;
    os << "<line x1=\"" << num(x) << "\" y1=\"" << num(mt) << "\" x2=\""
       << num(x) << "\" y2=\"" << num(mt + ph)
       << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    os << "<text x=\"" << num(x) << "\" y=\"" << num(mt + ph + 16)
       << "\" text-anchor=\"middle\">" << num(raw) << "</text>\n";
  }
  for (double t : ticks(yr.lo, yr.hi)) {
    double y = py(t);
    os << "<line x1=\"" << num(ml) << "\" y1=\"" << num(y) << "\" x2=\""
       << num(ml + pw) << "\" y2=\"" << num(y)
       << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    os << "<text x=\"" << num(ml - 6) << "\" y=\"" << num(y + 4)
       << "\" text-anchor=\"end\">" << num(t) << "</text>\n";
  }
  os << "<rect x=\"" << num(ml) << "\" y=\"" << num(mt) << "\" width=\""
     << num(pw) << "\" height=\"" << num(ph)
     << "\" fill=\"none\" stroke=\"#333333\"/>\n";

  if (!title.empty())
    os << "<text x=\"" << num(ml + pw / 2) << "\" y=\"20\" text-anchor=\"middle\""
       << " font-size=\"15\">" << title << "</text>\n";
  if (!x_label.empty())
    os << "<text x=\"" << num(ml + pw / 2) << "\" y=\"" << num(height - 10)
       << "\" text-anchor=\"middle\">" << x_label << "</text>\n";
  if (!y_label.empty())
    os << "<text x=\"14\" y=\"" << num(mt + ph / 2)
       << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
       << num(mt + ph / 2) << ")\">" << y_label << "</text>\n";

  // ribbons first so lines draw on top
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    if (s.lo.size() != s.x.size() || s.hi.size() != s.x.size()) continue;
    os << "<polygon fill=\"" << kPalette[i % kPaletteSize]
       << "\" fill-opacity=\"0.18\" stroke=\"none\" points=\"";
    for (std::size_t j = 0; j < s.x.size(); ++j)
      os << num(px(s.x[j])) << ',' << num(py(s.hi[j])) << ' ';
    for (std::size_t j = s.x.size(); j-- > 0;)
      os << num(px(s.x[j])) << ',' << num(py(s.lo[j])) << ' ';
    os << "\"/>\n";
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    os << "<polyline fill=\"none\" stroke=\"" << kPalette[i % kPaletteSize]
       << "\" stroke-width=\"2\"";
    if (s.dashed) os << " stroke-dasharray=\"7 4\"";
    os << " points=\"";
    for (std::size_t j = 0; j < s.x.size(); ++j)
      os << num(px(s.x[j])) << ',' << num(py(s.y[j])) << ' ';
    os << "\"/>\n";
  }
  for (std::size_t i = 0; i < markers.size(); ++i) {
    const auto& s = markers[i];
    for (std::size_t j = 0; j < s.x.size(); ++j)
      os << "<circle cx=\"" << num(px(s.x[j])) << "\" cy=\"" << num(py(s.y[j]))
         << "\" r=\"3.4\" fill=\"#222222\"/>\n";
  }
  for (const auto& vl : vlines) {
    double x = px(vl.first);
    os << "<line x1=\"" << num(x) << "\" y1=\"" << num(mt) << "\" x2=\""
       << num(x) << "\" y2=\"" << num(mt + ph)
       << "\" stroke=\"#444444\" stroke-width=\"1.5\" stroke-dasharray=\"4 4\"/>\n";
    os << "<text x=\"" << num(x + 4) << "\" y=\"" << num(mt + 14) << "\">"
       << vl.second << "</text>\n";
  }

  // legend
  double lx = ml + 10, ly = mt + 10;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series[i].label.empty()) continue;
    os << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly) << "\" x2=\""
       << num(lx + 22) << "\" y2=\"" << num(ly) << "\" stroke=\""
       << kPalette[i % kPaletteSize] << "\" stroke-width=\"2\""
       << (series[i].dashed ? " stroke-dasharray=\"7 4\"" : "") << "/>\n";
    os << "<text x=\"" << num(lx + 28) << "\" y=\"" << num(ly + 4) << "\">"
       << series[i].label << "</text>\n";
    ly += 18;
  }

  os << "</g>\n</svg>\n";
  return os.str();
}

void SvgPlot::save(const std::string& path, int width, int height) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path);
  f << render(width, height);
  if (!f) throw IoError("write failed: " + path);
}

}  // namespace taushape

#ifndef SPAM_SVG_HPP
#define SPAM_SVG_HPP

// Deterministic pure-text SVG line charts: x = communication rounds,
// y = relative gradient-norm decay.  No external assets, no fonts beyond a
// generic family name, coordinates printed with %.6g so output is diffable.
// The first comment inside the <svg> element records the axis ranges
// (`<!-- xrange a b yrange c d -->`), which equal the data extent padded by
// 5% on each side; tests recompute that from the CSVs.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace spam {

struct SvgSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

namespace svgdetail {

inline std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline const char* palette(size_t i) {
  static const char* colors[8] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  return colors[i % 8];
}

}  // namespace svgdetail

struct AxisRange {
  double x_lo = 0.0, x_hi = 1.0, y_lo = 0.0, y_hi = 1.0;
};

// Data extent padded by 5% per side; degenerate extents get a unit pad.
inline AxisRange chart_axis_range(const std::vector<SvgSeries>& series) {
  bool any = false;
  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  for (const SvgSeries& s : series) {
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if (!any) {
        xmin = xmax = x;
        ymin = ymax = y;
        any = true;
      } else {
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
      }
    }
  }
  if (!any) throw std::invalid_argument("chart_axis_range: no finite points");
  AxisRange r;
  const double xpad = xmax > xmin ? 0.05 * (xmax - xmin) : 1.0;
  const double ypad = ymax > ymin ? 0.05 * (ymax - ymin) : 1.0;
  r.x_lo = xmin - xpad;
  r.x_hi = xmax + xpad;
  r.y_lo = ymin - ypad;
  r.y_hi = ymax + ypad;
  return r;
}

inline void write_line_chart(const std::string& path, const std::vector<SvgSeries>& series,
                             const std::string& x_label, const std::string& y_label) {
  if (series.empty()) throw std::invalid_argument("write_line_chart: no series");
  const AxisRange r = chart_axis_range(series);

  const double W = 800, H = 500;
  const double ml = 70, mr = 20, mt = 20, mb = 50;  // margins
  const double pw = W - ml - mr, ph = H - mt - mb;  // plot area
  const auto X = [&](double x) { return ml + (x - r.x_lo) / (r.x_hi - r.x_lo) * pw; };
  const auto Y = [&](double y) { return mt + (r.y_hi - y) / (r.y_hi - r.y_lo) * ph; };

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  using svgdetail::escape;
  using svgdetail::fmt6;

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 500\">\n";
  out << "<!-- xrange " << fmt6(r.x_lo) << ' ' << fmt6(r.x_hi) << " yrange " << fmt6(r.y_lo)
      << ' ' << fmt6(r.y_hi) << " -->\n";
  out << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"500\" fill=\"white\"/>\n";
  out << "<rect x=\"" << fmt6(ml) << "\" y=\"" << fmt6(mt) << "\" width=\"" << fmt6(pw)
      << "\" height=\"" << fmt6(ph) << "\" fill=\"none\" stroke=\"#333333\"/>\n";

  for (int t = 0; t < 5; ++t) {
    const double fx = r.x_lo + (r.x_hi - r.x_lo) * t / 4.0;
    const double fy = r.y_lo + (r.y_hi - r.y_lo) * t / 4.0;
    out << "<line x1=\"" << fmt6(X(fx)) << "\" y1=\"" << fmt6(mt + ph) << "\" x2=\""
        << fmt6(X(fx)) << "\" y2=\"" << fmt6(mt + ph + 5) << "\" stroke=\"#333333\"/>\n";
    out << "<text x=\"" << fmt6(X(fx)) << "\" y=\"" << fmt6(mt + ph + 18)
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" << fmt6(fx)
        << "</text>\n";
    out << "<line x1=\"" << fmt6(ml - 5) << "\" y1=\"" << fmt6(Y(fy)) << "\" x2=\"" << fmt6(ml)
        << "\" y2=\"" << fmt6(Y(fy)) << "\" stroke=\"#333333\"/>\n";
    out << "<text x=\"" << fmt6(ml - 8) << "\" y=\"" << fmt6(Y(fy) + 4)
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" << fmt6(fy)
        << "</text>\n";
  }
  out << "<text x=\"" << fmt6(ml + pw / 2) << "\" y=\"" << fmt6(H - 10)
      << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">"
      << escape(x_label) << "</text>\n";
  out << "<text x=\"15\" y=\"" << fmt6(mt + ph / 2)
      << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
      << fmt6(mt + ph / 2) << ")\">" << escape(y_label) << "</text>\n";

  for (size_t i = 0; i < series.size(); ++i) {
    const SvgSeries& s = series[i];
    if (s.points.empty()) continue;
    out << "<polyline fill=\"none\" stroke=\"" << svgdetail::palette(i)
        << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if (!first) out << ' ';
      out << fmt6(X(x)) << ',' << fmt6(Y(y));
      first = false;
    }
    out << "\"/>\n";
  }

  // Legend, top-right inside the plot area.
  const double lx = ml + pw - 240, ly0 = mt + 12;
  for (size_t i = 0; i < series.size(); ++i) {
    const double ly = ly0 + 16.0 * static_cast<double>(i);
    out << "<line x1=\"" << fmt6(lx) << "\" y1=\"" << fmt6(ly - 4) << "\" x2=\"" << fmt6(lx + 22)
        << "\" y2=\"" << fmt6(ly - 4) << "\" stroke=\"" << svgdetail::palette(i)
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << fmt6(lx + 28) << "\" y=\"" << fmt6(ly)
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape(series[i].label)
        << "</text>\n";
  }
  out << "</svg>\n";
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace spam

#endif  // SPAM_SVG_HPP

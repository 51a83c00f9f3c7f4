#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "stablab/errors.hpp"

namespace stablab {

struct PlotSeriesPoint {
  double x;
  double mean;
  double std;
};

struct PlotSpec {
  std::string title;
  std::string x_label = "x";
  std::string y_label = "y";
  bool log_x = false;
  bool log_y = false;
};

namespace svg_detail {

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace svg_detail

// Single self-contained line chart with error bars. Byte-deterministic for
// identical inputs: fixed canvas, fixed number formatting, no timestamps.
inline std::string render_svg_chart(const std::vector<PlotSeriesPoint>& points,
                                    const PlotSpec& spec) {
  using svg_detail::num;
  if (points.empty()) throw FormatError("render_svg_chart: no data points");

  const double W = 640, H = 440;
  const double ml = 70, mr = 20, mt = 40, mb = 55;

  auto tx = [&](double x) { return spec.log_x ? std::log10(x) : x; };
  auto ty = [&](double y) { return spec.log_y ? std::log10(y) : y; };

  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& p : points) {
    if ((spec.log_x && p.x <= 0) || (spec.log_y && p.mean - p.std <= 0 && spec.log_y))
      throw FormatError("render_svg_chart: nonpositive value on a log axis");
    xmin = std::min(xmin, tx(p.x));
    xmax = std::max(xmax, tx(p.x));
    ymin = std::min(ymin, ty(spec.log_y ? p.mean : p.mean - p.std));
    ymax = std::max(ymax, ty(spec.log_y ? p.mean : p.mean + p.std));
  }
  if (xmax == xmin) { xmax += 0.5; xmin -= 0.5; }
  if (ymax == ymin) { ymax += 0.5; ymin -= 0.5; }
  double xpad = 0.05 * (xmax - xmin), ypad = 0.05 * (ymax - ymin);
  xmin -= xpad; xmax += xpad; ymin -= ypad; ymax += ypad;

  auto px = [&](double x) { return ml + (tx(x) - xmin) / (xmax - xmin) * (W - ml - mr); };
  auto py = [&](double y) { return H - mb - (ty(y) - ymin) / (ymax - ymin) * (H - mt - mb); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  os << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
     << spec.title << "</text>\n";

  // axes
  os << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\""
     << H - mb << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
     << "\" stroke=\"black\"/>\n";

  // x ticks at the data's factor values
  for (const auto& p : points) {
    double x = px(p.x);
    os << "<line x1=\"" << num(x) << "\" y1=\"" << H - mb << "\" x2=\"" << num(x)
       << "\" y2=\"" << H - mb + 5 << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << num(x) << "\" y=\"" << H - mb + 20
       << "\" text-anchor=\"middle\" font-size=\"12\">" << num(p.x) << "</text>\n";
  }
  // 5 evenly spaced y ticks in the transformed scale
  for (int k = 0; k <= 4; ++k) {
    double yv = ymin + (ymax - ymin) * k / 4.0;
    double y = H - mb - (yv - ymin) / (ymax - ymin) * (H - mt - mb);
    double label = spec.log_y ? std::pow(10.0, yv) : yv;
    os << "<line x1=\"" << ml - 5 << "\" y1=\"" << num(y) << "\" x2=\"" << ml << "\" y2=\""
       << num(y) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << ml - 8 << "\" y=\"" << num(y + 4)
       << "\" text-anchor=\"end\" font-size=\"12\">" << num(label) << "</text>\n";
  }

  os << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 12
     << "\" text-anchor=\"middle\" font-size=\"13\">" << spec.x_label << "</text>\n";
  os << "<text x=\"18\" y=\"" << (mt + H - mb) / 2
     << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
     << (mt + H - mb) / 2 << ")\">" << spec.y_label << "</text>\n";

  // error bars
  for (const auto& p : points) {
    if (p.std <= 0) continue;
    double lo = p.mean - p.std, hi = p.mean + p.std;
    if (spec.log_y) lo = std::max(lo, std::pow(10.0, ymin));
    double x = px(p.x);
    os << "<line x1=\"" << num(x) << "\" y1=\"" << num(py(lo)) << "\" x2=\"" << num(x)
       << "\" y2=\"" << num(py(hi)) << "\" stroke=\"#4477aa\" stroke-width=\"1\"/>\n";
    os << "<line x1=\"" << num(x - 4) << "\" y1=\"" << num(py(lo)) << "\" x2=\""
       << num(x + 4) << "\" y2=\"" << num(py(lo)) << "\" stroke=\"#4477aa\"/>\n";
    os << "<line x1=\"" << num(x - 4) << "\" y1=\"" << num(py(hi)) << "\" x2=\""
       << num(x + 4) << "\" y2=\"" << num(py(hi)) << "\" stroke=\"#4477aa\"/>\n";
  }

  // polyline through the means
  os << "<polyline fill=\"none\" stroke=\"#4477aa\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i) os << ' ';
    os << num(px(points[i].x)) << ',' << num(py(points[i].mean));
  }
  os << "\"/>\n";
  for (const auto& p : points)
    os << "<circle cx=\"" << num(px(p.x)) << "\" cy=\"" << num(py(p.mean))
       << "\" r=\"3.5\" fill=\"#4477aa\"/>\n";

  os << "</svg>\n";
  return os.str();
}

}  // namespace stablab

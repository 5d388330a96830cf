#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace hybridsim {

struct PlotSeries {
  std::string label;
  std::vector<double> x, y, err;  // err may be empty
  bool guide = false;             // dashed line, no markers
};

struct Plot {
  std::string title, xlabel, ylabel;
  bool log_x = false, log_y = false;
  std::vector<PlotSeries> series;
};

namespace detail {

inline std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

struct Axis {
  double lo = 0, hi = 1;
  bool log = false;
  double map(double v, double a, double b) const {
    const double t = log ? (std::log10(v) - std::log10(lo)) / (std::log10(hi) - std::log10(lo)) : (v - lo) / (hi - lo);
    return a + t * (b - a);
  }
  std::vector<double> ticks() const {
    std::vector<double> t;
    if (log) {
      for (double d = std::pow(10.0, std::floor(std::log10(lo))); d <= hi * 1.0001; d *= 10)
        for (double m : {1.0, 2.0, 5.0})
          if (d * m >= lo * 0.9999 && d * m <= hi * 1.0001) t.push_back(d * m);
      return t;
    }
    const double raw = (hi - lo) / 5.0, mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double step = raw / mag < 2 ? 2 * mag : raw / mag < 5 ? 5 * mag : 10 * mag;
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) t.push_back(v);
    return t;
  }
};

inline Axis fit_axis(std::vector<double> v, bool log) {
  if (log) v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return !(x > 0); }), v.end());
  Axis a;
  a.log = log;
  if (v.empty()) return a.log ? Axis{1, 10, true} : a;
  a.lo = *std::min_element(v.begin(), v.end());
  a.hi = *std::max_element(v.begin(), v.end());
  if (log) {
    a.lo /= 1.25;
    a.hi *= 1.25;
  } else {
    const double pad = a.hi > a.lo ? 0.06 * (a.hi - a.lo) : std::max(1.0, std::abs(a.lo) * 0.1);
    a.lo -= pad;
    a.hi += pad;
  }
  return a;
}

}  // namespace detail

/// Static SVG of a scatter/line plot with optional error bars and guide lines.
inline std::string render_svg(const Plot& plot) {
  using detail::svg_num;
  constexpr double W = 640, H = 440, ml = 70, mr = 170, mt = 40, mb = 55;
  std::vector<double> xs, ys;
  for (const auto& s : plot.series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      xs.push_back(s.x[i]);
      ys.push_back(s.y[i]);
      if (!s.err.empty() && !s.guide) {
        ys.push_back(s.y[i] - s.err[i]);
        ys.push_back(s.y[i] + s.err[i]);
      }
    }
  const auto ax = detail::fit_axis(xs, plot.log_x), ay = detail::fit_axis(ys, plot.log_y);
  auto px = [&](double v) { return ax.map(v, ml, W - mr); };
  auto py = [&](double v) { return ay.map(v, H - mb, mt); };
  auto visible = [&](double x, double y) { return (!plot.log_x || x > 0) && (!plot.log_y || y > 0); };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"};
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
    << detail::xml_escape(plot.title) << "</text>\n";
  o << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\"" << H - mt - mb
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : ax.ticks()) {
    const double x = px(t);
    o << "<line x1=\"" << x << "\" y1=\"" << H - mb << "\" x2=\"" << x << "\" y2=\"" << H - mb + 5
      << "\" stroke=\"black\"/><text x=\"" << x << "\" y=\"" << H - mb + 18 << "\" text-anchor=\"middle\">"
      << svg_num(t) << "</text>\n";
  }
  for (double t : ay.ticks()) {
    const double y = py(t);
    o << "<line x1=\"" << ml - 5 << "\" y1=\"" << y << "\" x2=\"" << ml << "\" y2=\"" << y
      << "\" stroke=\"black\"/><text x=\"" << ml - 8 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">" << svg_num(t)
      << "</text>\n";
  }
  o << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">"
    << detail::xml_escape(plot.xlabel) << "</text>\n";
  o << "<text transform=\"translate(18," << (mt + H - mb) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
    << detail::xml_escape(plot.ylabel) << "</text>\n";

  for (std::size_t k = 0; k < plot.series.size(); ++k) {
    const auto& s = plot.series[k];
    const std::string color = s.guide ? "#555555" : colors[k % 8];
    std::string path;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!visible(s.x[i], s.y[i])) continue;
      path += (path.empty() ? "M" : " L") + svg_num(px(s.x[i])) + "," + svg_num(py(s.y[i]));
    }
    if (!path.empty())
      o << "<path d=\"" << path << "\" fill=\"none\" stroke=\"" << color << "\""
        << (s.guide ? " stroke-dasharray=\"6,4\"" : "") << "/>\n";
    if (!s.guide)
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!visible(s.x[i], s.y[i])) continue;
        const double x = px(s.x[i]), y = py(s.y[i]);
        if (!s.err.empty() && s.err[i] > 0) {
          const double lo = s.y[i] - s.err[i], hi = s.y[i] + s.err[i];
          if (visible(s.x[i], lo))
            o << "<line x1=\"" << svg_num(x) << "\" y1=\"" << svg_num(py(lo)) << "\" x2=\"" << svg_num(x)
              << "\" y2=\"" << svg_num(py(hi)) << "\" stroke=\"" << color << "\"/>\n";
        }
        o << "<circle cx=\"" << svg_num(x) << "\" cy=\"" << svg_num(y) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
      }
    const double ly = mt + 10 + 18 * double(k);
    o << "<line x1=\"" << W - mr + 12 << "\" y1=\"" << ly << "\" x2=\"" << W - mr + 32 << "\" y2=\"" << ly
      << "\" stroke=\"" << color << "\"" << (s.guide ? " stroke-dasharray=\"6,4\"" : "") << "/><text x=\""
      << W - mr + 38 << "\" y=\"" << ly + 4 << "\">" << detail::xml_escape(s.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace hybridsim

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "advprobe/csv.hpp"

namespace advprobe {
namespace io {

namespace detail {

inline std::string coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

struct Frame {
  double width = 640, height = 440;
  double left = 70, right = 20, top = 40, bottom = 55;

  double plot_w() const { return width - left - right; }
  double plot_h() const { return height - top - bottom; }
  double px(double t) const { return left + t * plot_w(); }        // t in [0,1]
  double py(double t) const { return top + (1.0 - t) * plot_h(); } // t in [0,1]
};

inline void open_svg(std::string& s, const Frame& f, const std::string& title) {
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
       coord(f.width) + "\" height=\"" + coord(f.height) + "\" viewBox=\"0 0 " +
       coord(f.width) + " " + coord(f.height) + "\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + coord(f.width / 2) +
       "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"15\">" + title + "</text>\n";
}

inline void axes(std::string& s, const Frame& f, const std::string& x_label,
                 const std::string& y_label) {
  s += "<line x1=\"" + coord(f.left) + "\" y1=\"" + coord(f.top) + "\" x2=\"" +
       coord(f.left) + "\" y2=\"" + coord(f.height - f.bottom) +
       "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + coord(f.left) + "\" y1=\"" + coord(f.height - f.bottom) +
       "\" x2=\"" + coord(f.width - f.right) + "\" y2=\"" +
       coord(f.height - f.bottom) + "\" stroke=\"black\"/>\n";
  s += "<text x=\"" + coord(f.left + f.plot_w() / 2) + "\" y=\"" +
       coord(f.height - 12) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" +
       x_label + "</text>\n";
  s += "<text x=\"16\" y=\"" + coord(f.top + f.plot_h() / 2) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
       "transform=\"rotate(-90 16 " + coord(f.top + f.plot_h() / 2) + ")\">" +
       y_label + "</text>\n";
}

inline void tick_labels(std::string& s, const Frame& f, double x_min,
                        double x_max, double y_min, double y_max) {
  for (int i = 0; i <= 4; ++i) {
    const double t = i / 4.0;
    const double xv = x_min + t * (x_max - x_min);
    const double yv = y_min + t * (y_max - y_min);
    s += "<text x=\"" + coord(f.px(t)) + "\" y=\"" +
         coord(f.height - f.bottom + 18) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"11\">" + format_double(xv) + "</text>\n";
    s += "<text x=\"" + coord(f.left - 6) + "\" y=\"" + coord(f.py(t) + 4) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
         format_double(yv) + "</text>\n";
  }
}

}  // namespace detail

// Single-polyline line chart, axes labeled; SVG 1.1, self-contained.
inline std::string svg_line_chart(const std::string& title,
                                  const std::string& x_label,
                                  const std::string& y_label,
                                  const std::vector<double>& xs,
                                  const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.empty())
    throw std::invalid_argument("svg_line_chart: bad series");
  const detail::Frame f;
  const double x_min = *std::min_element(xs.begin(), xs.end());
  const double x_max = *std::max_element(xs.begin(), xs.end());
  double y_min = *std::min_element(ys.begin(), ys.end());
  double y_max = *std::max_element(ys.begin(), ys.end());
  if (y_max == y_min) {
    y_max += 1.0;
    y_min -= y_min == 0.0 ? 0.0 : 1.0;
  }
  const double x_span = x_max == x_min ? 1.0 : x_max - x_min;
  const double y_span = y_max - y_min;

  std::string s;
  detail::open_svg(s, f, title);
  detail::axes(s, f, x_label, y_label);
  detail::tick_labels(s, f, x_min, x_max, y_min, y_max);
  s += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += " ";
    s += detail::coord(f.px((xs[i] - x_min) / x_span)) + "," +
         detail::coord(f.py((ys[i] - y_min) / y_span));
  }
  s += "\"/>\n";
  for (std::size_t i = 0; i < xs.size(); ++i)
    s += "<circle cx=\"" + detail::coord(f.px((xs[i] - x_min) / x_span)) +
         "\" cy=\"" + detail::coord(f.py((ys[i] - y_min) / y_span)) +
         "\" r=\"3\" fill=\"#1f77b4\"/>\n";
  s += "</svg>\n";
  return s;
}

// Paired bar chart: two bars per category (e.g. per-class probability
// before and after an attack).
inline std::string svg_paired_bars(const std::string& title,
                                   const std::string& x_label,
                                   const std::string& y_label,
                                   const std::vector<std::string>& categories,
                                   const std::vector<double>& series_a,
                                   const std::vector<double>& series_b,
                                   const std::string& name_a,
                                   const std::string& name_b) {
  if (categories.empty() || categories.size() != series_a.size() ||
      categories.size() != series_b.size())
    throw std::invalid_argument("svg_paired_bars: bad series");
  const detail::Frame f;
  double y_max = 0.0;
  for (double v : series_a) y_max = std::max(y_max, v);
  for (double v : series_b) y_max = std::max(y_max, v);
  if (y_max <= 0.0) y_max = 1.0;

  std::string s;
  detail::open_svg(s, f, title);
  detail::axes(s, f, x_label, y_label);
  for (int i = 0; i <= 4; ++i) {
    const double t = i / 4.0;
    s += "<text x=\"" + detail::coord(f.left - 6) + "\" y=\"" +
         detail::coord(f.py(t) + 4) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
         format_double(t * y_max) + "</text>\n";
  }
  const std::size_t n = categories.size();
  const double slot = f.plot_w() / static_cast<double>(n);
  const double bar = slot * 0.35;
  for (std::size_t i = 0; i < n; ++i) {
    const double cx = f.left + (static_cast<double>(i) + 0.5) * slot;
    const double ha = series_a[i] / y_max * f.plot_h();
    const double hb = series_b[i] / y_max * f.plot_h();
    s += "<rect x=\"" + detail::coord(cx - bar) + "\" y=\"" +
         detail::coord(f.height - f.bottom - ha) + "\" width=\"" +
         detail::coord(bar) + "\" height=\"" + detail::coord(ha) +
         "\" fill=\"#1f77b4\"/>\n";
    s += "<rect x=\"" + detail::coord(cx) + "\" y=\"" +
         detail::coord(f.height - f.bottom - hb) + "\" width=\"" +
         detail::coord(bar) + "\" height=\"" + detail::coord(hb) +
         "\" fill=\"#ff7f0e\"/>\n";
    s += "<text x=\"" + detail::coord(cx) + "\" y=\"" +
         detail::coord(f.height - f.bottom + 18) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"11\">" + categories[i] + "</text>\n";
  }
  s += "<rect x=\"" + detail::coord(f.width - 170) + "\" y=\"30\" width=\"12\" "
       "height=\"12\" fill=\"#1f77b4\"/>\n";
  s += "<text x=\"" + detail::coord(f.width - 154) +
       "\" y=\"40\" font-family=\"sans-serif\" font-size=\"12\">" + name_a +
       "</text>\n";
  s += "<rect x=\"" + detail::coord(f.width - 170) + "\" y=\"48\" width=\"12\" "
       "height=\"12\" fill=\"#ff7f0e\"/>\n";
  s += "<text x=\"" + detail::coord(f.width - 154) +
       "\" y=\"58\" font-family=\"sans-serif\" font-size=\"12\">" + name_b +
       "</text>\n";
  s += "</svg>\n";
  return s;
}

}  // namespace io
}  // namespace advprobe

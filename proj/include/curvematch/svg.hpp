#pragma once

// Schematic SVG plots of curves: a filmstrip (one panel per curve, shared
// scale, labeled) and an overlay (all curves in one panel).

#include <algorithm>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "curvematch/splines.hpp"

namespace curvematch {

struct SvgStyle {
  double panel = 160.0;  ///< panel size in px
  double margin = 12.0;
  std::size_t samples = 200;  ///< points per curve
};

namespace detail {

inline double y_of(const Controls& pts, Eigen::Index i) { return pts.cols() > 1 ? pts(i, 1) : 0.0; }

struct Bounds {
  double x0 = std::numeric_limits<double>::infinity();
  double y0 = std::numeric_limits<double>::infinity();
  double x1 = -std::numeric_limits<double>::infinity();
  double y1 = -std::numeric_limits<double>::infinity();

  void add(const Controls& pts) {
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
      x0 = std::min(x0, pts(i, 0));
      x1 = std::max(x1, pts(i, 0));
      y0 = std::min(y0, y_of(pts, i));
      y1 = std::max(y1, y_of(pts, i));
    }
  }
  double size() const { return std::max({x1 - x0, y1 - y0, 1e-12}); }
};

inline std::string svg_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

inline std::string svg_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

/// Polyline of the curve's first two coordinates, mapped into a square of
/// side `side` at (ox, oy) with y pointing up.
inline std::string polyline(const Controls& pts, const Bounds& b, double ox, double oy, double side,
                            const std::string& attrs) {
  const double s = side / b.size();
  const double cx = 0.5 * (b.x0 + b.x1), cy = 0.5 * (b.y0 + b.y1);
  std::string out = "<polygon fill=\"none\" " + attrs + " points=\"";
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    if (i) out += ' ';
    out += svg_num(ox + 0.5 * side + s * (pts(i, 0) - cx)) + "," + svg_num(oy + 0.5 * side - s * (y_of(pts, i) - cy));
  }
  return out + "\"/>\n";
}

inline std::string header(double w, double h) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + svg_num(w) + "\" height=\"" + svg_num(h) +
         "\" viewBox=\"0 0 " + svg_num(w) + " " + svg_num(h) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

}  // namespace detail

/// One panel per curve, left to right, all at the same scale.
inline std::string svg_filmstrip(const std::vector<Curve>& curves, const std::vector<std::string>& labels = {},
                                 const SvgStyle& style = {}) {
  detail::Bounds b;
  std::vector<Controls> pts;
  for (const auto& c : curves) {
    pts.push_back(sample_curve(c, style.samples));
    b.add(pts.back());
  }
  const double cell = style.panel + style.margin;
  const double w = style.margin + cell * static_cast<double>(curves.size());
  const double h = style.panel + 2.0 * style.margin + 16.0;
  std::string out = detail::header(w, h);
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const double ox = style.margin + cell * static_cast<double>(k);
    out += detail::polyline(pts[k], b, ox, style.margin, style.panel, "stroke=\"#1f4e79\" stroke-width=\"1.5\"");
    if (k < labels.size()) {
      out += "<text x=\"" + detail::svg_num(ox + 0.5 * style.panel) + "\" y=\"" +
             detail::svg_num(style.panel + style.margin + 14.0) +
             "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + detail::svg_escape(labels[k]) +
             "</text>\n";
    }
  }
  return out + "</svg>\n";
}

/// All curves in one panel; the highlighted one (if any) is drawn last in red.
inline std::string svg_overlay(const std::vector<Curve>& curves, std::ptrdiff_t highlight = -1,
                               const std::string& title = {}, const SvgStyle& style = {}) {
  detail::Bounds b;
  std::vector<Controls> pts;
  for (const auto& c : curves) {
    pts.push_back(sample_curve(c, style.samples));
    b.add(pts.back());
  }
  const double side = 2.0 * style.panel;
  std::string out = detail::header(side + 2.0 * style.margin, side + 2.0 * style.margin + 16.0);
  for (std::size_t k = 0; k < pts.size(); ++k) {
    if (static_cast<std::ptrdiff_t>(k) == highlight) continue;
    out += detail::polyline(pts[k], b, style.margin, style.margin, side, "stroke=\"#888888\" stroke-width=\"1\"");
  }
  if (highlight >= 0 && static_cast<std::size_t>(highlight) < pts.size()) {
    out += detail::polyline(pts[static_cast<std::size_t>(highlight)], b, style.margin, style.margin, side,
                            "stroke=\"#c00000\" stroke-width=\"2.5\"");
  }
  if (!title.empty()) {
    out += "<text x=\"" + detail::svg_num(style.margin + 0.5 * side) + "\" y=\"" +
           detail::svg_num(side + style.margin + 14.0) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + detail::svg_escape(title) +
           "</text>\n";
  }
  return out + "</svg>\n";
}

}  // namespace curvematch

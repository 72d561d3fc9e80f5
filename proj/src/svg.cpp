#include "tacgraph/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "tacgraph/error.hpp"

namespace tacgraph {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
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

/// Maps world coordinates (+y up) into a square viewport with a margin.
struct Viewport {
  double min_x = 0, min_y = 0, scale = 1, size = 600, margin = 30;

  Viewport(double lo_x, double hi_x, double lo_y, double hi_y, double px = 600, double m = 30)
      : min_x(lo_x), min_y(lo_y), size(px), margin(m) {
    const double span = std::max({hi_x - lo_x, hi_y - lo_y, 1e-9});
    scale = (size - 2 * margin) / span;
    max_y = hi_y;
  }
  double sx(double x) const { return margin + (x - min_x) * scale; }
  double sy(double y) const { return margin + (max_y - y) * scale; }

  double max_y = 0;
};

std::string header(double w, double h) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "\" height=\"" + num(h) +
         "\" viewBox=\"0 0 " + num(w) + " " + num(h) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

std::string ramp(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const int r = static_cast<int>(std::lround(40 + 215 * t));
  const int g = static_cast<int>(std::lround(90 + 80 * (1.0 - std::abs(2 * t - 1))));
  const int b = static_cast<int>(std::lround(255 - 215 * t));
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

}  // namespace

std::string voronoi_heatmap_svg(const MarkerFrame& frame, const VoronoiFeatures& vf) {
  if (vf.cells.size() != frame.size()) throw ShapeError("heat map: cells and frame differ in size");
  double lo_x = std::numeric_limits<double>::infinity(), hi_x = -lo_x, lo_y = lo_x, hi_y = -lo_x;
  for (const auto& c : vf.cells) {
    for (const auto& p : c.polygon) {
      lo_x = std::min(lo_x, p.x);
      hi_x = std::max(hi_x, p.x);
      lo_y = std::min(lo_y, p.y);
      hi_y = std::max(hi_y, p.y);
    }
  }
  const Viewport vp(lo_x, hi_x, lo_y, hi_y);
  double mean = 0, sq = 0;
  for (double a : vf.areas) {
    mean += a;
    sq += a * a;
  }
  mean /= static_cast<double>(vf.areas.size());
  const double sd = std::sqrt(std::max(sq / static_cast<double>(vf.areas.size()) - mean * mean, 1e-18));

  std::ostringstream out;
  out << header(vp.size, vp.size + 30);
  for (const auto& c : vf.cells) {
    const double z = (c.area - mean) / sd;
    out << "<polygon points=\"";
    for (const auto& p : c.polygon) out << num(vp.sx(p.x)) << ',' << num(vp.sy(p.y)) << ' ';
    out << "\" fill=\"" << ramp((z + 2.0) / 4.0) << "\" stroke=\"#444\" stroke-width=\"0.4\"/>\n";
  }
  for (const auto& p : frame.positions) {
    out << "<circle cx=\"" << num(vp.sx(p.x)) << "\" cy=\"" << num(vp.sy(p.y)) << "\" r=\"1.2\" fill=\"black\"/>\n";
  }
  out << "<text x=\"10\" y=\"" << num(vp.size + 20) << "\" font-family=\"sans-serif\" font-size=\"12\">"
      << "cell area, standardised: blue -2, red +2 (mean " << num(mean) << " mm^2)</text>\n</svg>\n";
  return out.str();
}

std::string trajectory_svg(const Contour& contour, std::span<const Trajectory> trajectories) {
  double lo_x = std::numeric_limits<double>::infinity(), hi_x = -lo_x, lo_y = lo_x, hi_y = -lo_x;
  auto grow = [&](const Vec2& p) {
    lo_x = std::min(lo_x, p.x);
    hi_x = std::max(hi_x, p.x);
    lo_y = std::min(lo_y, p.y);
    hi_y = std::max(hi_y, p.y);
  };
  for (const auto& p : contour.outline()) grow(p);
  for (const auto& t : trajectories) {
    for (const auto& s : t.steps) grow(s.sensor.position);
  }
  const Viewport vp(lo_x - 5, hi_x + 5, lo_y - 5, hi_y + 5);
  std::ostringstream out;
  out << header(vp.size, vp.size + 20.0 * static_cast<double>(trajectories.size()) + 10);
  out << "<polygon points=\"";
  for (const auto& p : contour.outline()) out << num(vp.sx(p.x)) << ',' << num(vp.sy(p.y)) << ' ';
  out << "\" fill=\"#eeeeee\" stroke=\"black\" stroke-width=\"1\"/>\n";
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    const auto& t = trajectories[i];
    const char* colour = kPalette[i % std::size(kPalette)];
    out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.2\" points=\"";
    for (const auto& s : t.steps) out << num(vp.sx(s.sensor.position.x)) << ',' << num(vp.sy(s.sensor.position.y)) << ' ';
    out << "\"/>\n";
    const double ly = vp.size + 20.0 * static_cast<double>(i) + 5;
    out << "<rect x=\"10\" y=\"" << num(ly) << "\" width=\"12\" height=\"12\" fill=\"" << colour << "\"/>"
        << "<text x=\"28\" y=\"" << num(ly + 11) << "\" font-family=\"sans-serif\" font-size=\"12\">"
        << escape(t.estimator + " on " + t.contour + ": " + to_string(t.termination)) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string residual_scatter_svg(const EvalReport& report, const std::string& title) {
  const double panel = 320, margin = 40;
  std::ostringstream out;
  out << header(2 * panel, panel + 40);
  out << "<text x=\"10\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" << escape(title) << "</text>\n";
  for (int k = 0; k < 2; ++k) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& r : report.residuals) {
      const double t = k == 0 ? r.truth.y : r.truth.theta;
      const double p = k == 0 ? r.predicted.y : r.predicted.theta;
      lo = std::min({lo, t, p});
      hi = std::max({hi, t, p});
    }
    if (!(hi > lo)) {
      lo -= 1;
      hi += 1;
    }
    const double ox = k * panel;
    const double s = (panel - 2 * margin) / (hi - lo);
    auto X = [&](double v) { return ox + margin + (v - lo) * s; };
    auto Y = [&](double v) { return 30 + panel - margin - (v - lo) * s; };
    out << "<line x1=\"" << num(X(lo)) << "\" y1=\"" << num(Y(lo)) << "\" x2=\"" << num(X(hi)) << "\" y2=\""
        << num(Y(hi)) << "\" stroke=\"#888\" stroke-dasharray=\"4 3\"/>\n";
    for (const auto& r : report.residuals) {
      const double t = k == 0 ? r.truth.y : r.truth.theta;
      const double p = k == 0 ? r.predicted.y : r.predicted.theta;
      out << "<circle cx=\"" << num(X(t)) << "\" cy=\"" << num(Y(p)) << "\" r=\"1.5\" fill=\""
          << kPalette[k] << "\" fill-opacity=\"0.6\"/>\n";
    }
    const std::string label = k == 0 ? "depth (mm), MAE " + num(report.mae_y) : "roll (deg), MAE " + num(report.mae_theta);
    out << "<text x=\"" << num(ox + margin) << "\" y=\"" << num(panel + 30) << "\" font-family=\"sans-serif\" "
        << "font-size=\"12\">true vs predicted " << label << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace tacgraph

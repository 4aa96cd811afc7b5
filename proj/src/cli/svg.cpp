#include "losstopo/cli/svg.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace losstopo::cli {

namespace {

constexpr double kWidth = 480, kHeight = 360;
constexpr double kLeft = 60, kRight = 20, kTop = 36, kBottom = 48;

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

struct Frame {
  AxisRange x, y;

  double px(double v) const { return kLeft + (v - x.lo) / (x.hi - x.lo) * (kWidth - kLeft - kRight); }
  double py(double v) const { return kHeight - kBottom - (v - y.lo) / (y.hi - y.lo) * (kHeight - kTop - kBottom); }
};

std::string header(const std::string& title) {
  return fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n"
      "<rect width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n"
      "<text x=\"{2}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{3}</text>\n",
      kWidth, kHeight, kWidth / 2, escape(title));
}

std::string axes(const Frame& f, const std::string& x_label, const std::string& y_label) {
  std::string out;
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  out += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n", x0, y0, x1, y0);
  out += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n", x0, y0, x0, y1);
  for (int i = 0; i <= 4; ++i) {
    const double vx = f.x.lo + (f.x.hi - f.x.lo) * i / 4.0;
    const double vy = f.y.lo + (f.y.hi - f.y.lo) * i / 4.0;
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{:.3g}</text>\n", f.px(vx), y0 + 16, vx);
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{:.3g}</text>\n", x0 - 4, f.py(vy) + 4, vy);
  }
  out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{}</text>\n", (x0 + x1) / 2, kHeight - 10,
                     escape(x_label));
  out += fmt::format(
      "<text x=\"14\" y=\"{:.2f}\" text-anchor=\"middle\" transform=\"rotate(-90 14 {:.2f})\">{}</text>\n",
      (y0 + y1) / 2, (y0 + y1) / 2, escape(y_label));
  // Axis ranges, machine-readable.
  out += fmt::format("<desc>x-range {:.17g} {:.17g}; y-range {:.17g} {:.17g}</desc>\n", f.x.lo, f.x.hi, f.y.lo, f.y.hi);
  return out;
}

std::string segment(const Frame& f, double xa, double ya, double xb, double yb, const char* style) {
  return fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" {}/>\n", f.px(xa), f.py(ya),
                     f.px(xb), f.py(yb), style);
}

}  // namespace

AxisRange padded_range(std::span<const double> values) {
  if (values.empty()) return {0.0, 1.0};
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  double lo = *mn, hi = *mx;
  if (hi - lo <= 0.0) return {lo - 0.5, hi + 0.5};
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

std::string scatter_svg(const ScatterPlot& plot) {
  Frame f{padded_range(plot.x), padded_range(plot.y)};
  std::string out = header(plot.title) + axes(f, plot.x_label, plot.y_label);
  if (plot.diagonal) {
    const double lo = std::max(f.x.lo, f.y.lo), hi = std::min(f.x.hi, f.y.hi);
    if (lo < hi) out += segment(f, lo, lo, hi, hi, "stroke=\"gray\" stroke-dasharray=\"4 3\"");
  }
  if (plot.fit) {
    // Clip the fitted line to the plotting box.
    double xa = f.x.lo, xb = f.x.hi;
    auto at = [&](double x) { return plot.fit->slope * x + plot.fit->intercept; };
    if (plot.fit->slope != 0.0) {
      const double xlo = (f.y.lo - plot.fit->intercept) / plot.fit->slope;
      const double xhi = (f.y.hi - plot.fit->intercept) / plot.fit->slope;
      xa = std::max(xa, std::min(xlo, xhi));
      xb = std::min(xb, std::max(xlo, xhi));
    }
    if (xa < xb) out += segment(f, xa, at(xa), xb, at(xb), "stroke=\"red\" stroke-width=\"2\"");
  }
  for (std::size_t i = 0; i < plot.x.size() && i < plot.y.size(); ++i)
    out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"steelblue\"/>\n", f.px(plot.x[i]),
                       f.py(plot.y[i]));
  out += "</svg>\n";
  return out;
}

std::string diagram_svg(const persistence::PersistenceDiagram& dgm, const std::string& title) {
  std::vector<double> values;
  for (const auto& p : dgm.points) {
    values.push_back(p.birth);
    if (!p.essential()) values.push_back(p.death);
  }
  auto range = padded_range(values);
  const double essential_level = range.hi + 0.1 * (range.hi - range.lo);
  const AxisRange full{range.lo, essential_level + 0.05 * (range.hi - range.lo)};
  Frame f{full, full};
  std::string out = header(title) + axes(f, "birth", "death");
  out += segment(f, full.lo, full.lo, full.hi, full.hi, "stroke=\"gray\"");
  out += segment(f, full.lo, essential_level, full.hi, essential_level, "stroke=\"gray\" stroke-dasharray=\"4 3\"");
  out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\">inf</text>\n", kLeft + 4, f.py(essential_level) - 4);
  for (const auto& p : dgm.points) {
    const double d = p.essential() ? essential_level : p.death;
    const char* color = p.dimension == 0 ? "steelblue" : "darkorange";
    out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"{}\" fill-opacity=\"0.7\"/>\n", f.px(p.birth),
                       f.py(d), color);
  }
  out += fmt::format("<text x=\"{}\" y=\"{}\" fill=\"steelblue\">H0</text>\n", kWidth - 60, kTop + 12);
  out += fmt::format("<text x=\"{}\" y=\"{}\" fill=\"darkorange\">H1</text>\n", kWidth - 60, kTop + 26);
  out += "</svg>\n";
  return out;
}

std::string heatmap_svg(const Eigen::MatrixXd& values, const std::vector<std::string>& labels,
                        const std::string& title) {
  const auto n = values.rows(), m = values.cols();
  const double size = 360.0;
  const double cell_w = m > 0 ? size / static_cast<double>(m) : size;
  const double cell_h = n > 0 ? size / static_cast<double>(n) : size;
  const double mn = values.size() ? values.minCoeff() : 0.0, mx = values.size() ? values.maxCoeff() : 1.0;
  const double span = mx > mn ? mx - mn : 1.0;
  const double left = 80, top = 40;
  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
      "font-family=\"sans-serif\" font-size=\"10\">\n<rect width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n"
      "<text x=\"{2}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{3}</text>\n",
      left + size + 20, top + size + 20, (left + size) / 2, escape(title));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const double t = (values(i, j) - mn) / span;
      const int r = static_cast<int>(std::lround(255 * (1 - t) + 30 * t));
      const int g = static_cast<int>(std::lround(255 * (1 - t) + 60 * t));
      const int b = static_cast<int>(std::lround(255 * (1 - t) + 140 * t));
      out += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"rgb({},{},{})\"/>\n",
                         left + j * cell_w, top + i * cell_h, cell_w, cell_h, r, g, b);
    }
    if (static_cast<std::size_t>(i) < labels.size())
      out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{}</text>\n", left - 4,
                         top + (i + 0.5) * cell_h + 3, escape(labels[static_cast<std::size_t>(i)]));
  }
  out += "</svg>\n";
  return out;
}

}  // namespace losstopo::cli

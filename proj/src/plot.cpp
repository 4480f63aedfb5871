#include "coordnet/plot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>

namespace coordnet {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 55;

const char* const kPalette[] = {"#6a3d9a", "#1f78b4", "#b2182b", "#33a02c", "#ff7f00",
                                "#a6cee3", "#fb9a99", "#b15928", "#cab2d6", "#666666"};

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

struct Range {
  double lo = 0, hi = 1;
};

Range range_of(const std::vector<double>& v, bool include_zero) {
  Range r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (double x : v)
    if (std::isfinite(x)) {
      r.lo = std::min(r.lo, x);
      r.hi = std::max(r.hi, x);
    }
  if (!std::isfinite(r.lo)) return {0, 1};
  if (include_zero) {
    r.lo = std::min(r.lo, 0.0);
    r.hi = std::max(r.hi, 0.0);
  }
  if (r.hi - r.lo < 1e-12) {
    r.lo -= 0.5;
    r.hi += 0.5;
  }
  return r;
}

struct Frame {
  Range x, y;
  double px(double v) const { return kLeft + (v - x.lo) / (x.hi - x.lo) * (kWidth - kLeft - kRight); }
  double py(double v) const { return kHeight - kBottom - (v - y.lo) / (y.hi - y.lo) * (kHeight - kTop - kBottom); }
};

void open(std::ostream& out, const Axes& axes, const Frame& f, bool x_ticks = true) {
  out << fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n",
      kWidth, kHeight);
  out << fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n", kWidth, kHeight);
  out << fmt::format("<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n", kWidth / 2,
                     escape(axes.title));
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  out << fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n", x0, y0, x1, y0);
  out << fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n", x0, y0, x0, y1);
  for (int i = 0; i <= 4; ++i) {
    const double yv = f.y.lo + (f.y.hi - f.y.lo) * i / 4;
    out << fmt::format("<text x=\"{}\" y=\"{:.1f}\" text-anchor=\"end\">{:.3g}</text>\n", x0 - 6, f.py(yv) + 4, yv);
    if (x_ticks) {
      const double xv = f.x.lo + (f.x.hi - f.x.lo) * i / 4;
      out << fmt::format("<text x=\"{:.1f}\" y=\"{}\" text-anchor=\"middle\">{:.3g}</text>\n", f.px(xv), y0 + 18, xv);
    }
  }
  out << fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", (x0 + x1) / 2, kHeight - 12,
                     escape(axes.x_label));
  out << fmt::format("<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>\n",
                     (y0 + y1) / 2, (y0 + y1) / 2, escape(axes.y_label));
}

}  // namespace

void svg_line_chart(std::ostream& out, const Axes& axes, const std::vector<double>& x, const std::vector<double>& y) {
  const Frame f{range_of(x, false), range_of(y, true)};
  open(out, axes, f);
  std::string path;
  for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) continue;
    path += fmt::format("{}{:.2f},{:.2f} ", path.empty() ? "M" : "L", f.px(x[i]), f.py(y[i]));
    out << fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"2.5\" fill=\"{}\"/>\n", f.px(x[i]), f.py(y[i]),
                       kPalette[1]);
  }
  if (!path.empty()) out << fmt::format("<path d=\"{}\" fill=\"none\" stroke=\"{}\"/>\n", path, kPalette[1]);
  out << "</svg>\n";
}

void svg_bar_chart(std::ostream& out, const Axes& axes, const std::vector<std::string>& labels,
                   const std::vector<double>& values, const std::vector<double>& shaded) {
  Frame f{{0, static_cast<double>(std::max<std::size_t>(1, values.size()))}, range_of(values, true)};
  open(out, axes, f, false);
  const double slot = (kWidth - kLeft - kRight) / std::max<std::size_t>(1, values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double x = kLeft + slot * i + slot * 0.1;
    const double top = f.py(values[i]), base = f.py(0);
    out << fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\"/>\n", x, top,
                       slot * 0.8, base - top, kPalette[i % 10]);
    if (i < shaded.size() && shaded[i] > 0) {
      const double stop = f.py(shaded[i]);
      out << fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"black\"/>\n", x,
                         stop, slot * 0.8, base - stop);
    }
    if (i < labels.size())
      out << fmt::format("<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", x + slot * 0.4,
                         kHeight - kBottom + 18, escape(labels[i]));
  }
  out << "</svg>\n";
}

void svg_scatter(std::ostream& out, const Axes& axes, const std::vector<double>& x, const std::vector<double>& y,
                 const std::vector<int>& group) {
  const Frame f{range_of(x, false), range_of(y, false)};
  open(out, axes, f);
  for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) continue;
    const int g = i < group.size() ? group[i] : 0;
    const char* colour = g < 0 ? "#bbbbbb" : kPalette[g % 10];
    out << fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"1.8\" fill=\"{}\" fill-opacity=\"0.6\"/>\n", f.px(x[i]),
                       f.py(y[i]), colour);
  }
  out << "</svg>\n";
}

}  // namespace coordnet

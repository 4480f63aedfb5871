#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace coordnet {

struct Axes {
  std::string title;
  std::string x_label;
  std::string y_label;
};

// Minimal static SVG charts. NaN points are skipped.
void svg_line_chart(std::ostream& out, const Axes& axes, const std::vector<double>& x, const std::vector<double>& y);
void svg_bar_chart(std::ostream& out, const Axes& axes, const std::vector<std::string>& labels,
                   const std::vector<double>& values, const std::vector<double>& shaded = {});
void svg_scatter(std::ostream& out, const Axes& axes, const std::vector<double>& x, const std::vector<double>& y,
                 const std::vector<int>& group = {});

}  // namespace coordnet

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "losstopo/persistence/diagram.hpp"

namespace losstopo::cli {

struct AxisRange {
  double lo = 0.0;
  double hi = 1.0;
};

// Data extrema padded by 5% on each side; a degenerate range widens to +-0.5.
AxisRange padded_range(std::span<const double> values);

struct Line {
  double slope = 0.0;
  double intercept = 0.0;
};

struct ScatterPlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<double> x;
  std::vector<double> y;
  std::optional<Line> fit;
  bool diagonal = false;  // y = x reference line
};

std::string scatter_svg(const ScatterPlot& plot);

// Birth/death scatter with the diagonal. Essential classes sit on a dashed
// line above the finite points.
std::string diagram_svg(const persistence::PersistenceDiagram& dgm, const std::string& title);

// Cells shaded from white (0) to dark blue (1) after min-max scaling.
std::string heatmap_svg(const Eigen::MatrixXd& values, const std::vector<std::string>& labels,
                        const std::string& title);

}  // namespace losstopo::cli

#pragma once

#include <optional>
#include <span>

namespace losstopo::persistence {

// Gap ~ -alpha * Pers + beta.
struct GapModel {
  double alpha = 0.034;
  double beta = 0.12;
  std::optional<double> r_squared;  // absent for the default constants
};

// Ordinary least squares of gaps on pers_values; alpha is minus the slope.
GapModel fit_gap_model(std::span<const double> pers_values, std::span<const double> gaps);

double predict_gap(const GapModel& model, double pers);

}  // namespace losstopo::persistence

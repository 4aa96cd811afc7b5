#include "losstopo/persistence/gap_model.hpp"

#include <cmath>

#include "losstopo/error.hpp"

namespace losstopo::persistence {

GapModel fit_gap_model(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError("persistence and gap lists differ in length");
  if (x.size() < 2) throw ConfigError("gap model needs at least 2 points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw NumericError("persistence values have zero variance");
  const double slope = sxy / sxx;
  GapModel m;
  m.alpha = -slope;
  m.beta = my - slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (m.beta + slope * x[i]);
    ss_res += r * r;
  }
  m.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return m;
}

double predict_gap(const GapModel& model, double pers) { return -model.alpha * pers + model.beta; }

}  // namespace losstopo::persistence

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "losstopo/persistence/landscape.hpp"

namespace fixtures {

// Euclidean MST edge weights by Prim's algorithm on the dense distance matrix.
inline std::vector<double> mst_weights(const Eigen::MatrixXd& pts) {
  const auto n = pts.rows();
  std::vector<double> out;
  if (n < 2) return out;
  std::vector<bool> in_tree(static_cast<std::size_t>(n), false);
  std::vector<double> best(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  best[0] = 0.0;
  for (Eigen::Index step = 0; step < n; ++step) {
    Eigen::Index u = -1;
    for (Eigen::Index v = 0; v < n; ++v)
      if (!in_tree[v] && (u < 0 || best[v] < best[u])) u = v;
    in_tree[u] = true;
    if (step > 0) out.push_back(best[u]);
    for (Eigen::Index v = 0; v < n; ++v)
      if (!in_tree[v]) best[v] = std::min(best[v], (pts.row(u) - pts.row(v)).norm());
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline Eigen::MatrixXd noisy_circle(std::size_t n, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  Eigen::MatrixXd pts(static_cast<Eigen::Index>(n), 2);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
    pts(static_cast<Eigen::Index>(i), 0) = std::cos(a) + noise(rng);
    pts(static_cast<Eigen::Index>(i), 1) = std::sin(a) + noise(rng);
  }
  return pts;
}

// f(x) = (x^2 - 1)^2 + 0.3 x: global minimum near -1, shallower one near +1.
inline double double_well(double x) { return (x * x - 1.0) * (x * x - 1.0) + 0.3 * x; }
inline double double_well_slope(double x) { return 4.0 * x * x * x - 4.0 * x + 0.3; }

inline double bisect_slope_root(double lo, double hi) {
  double flo = double_well_slope(lo);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = double_well_slope(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

struct DoubleWellCritical {
  double global_min, saddle, local_min;  // x locations
};

// f' changes sign on [-2,-0.5], [-0.5,0.5] and [0.5,2].
inline DoubleWellCritical double_well_critical() {
  return {bisect_slope_root(-2.0, -0.5), bisect_slope_root(-0.5, 0.5), bisect_slope_root(0.5, 2.0)};
}

// Uniform 1-D grid over [-2, 2] as a landscape sample.
inline losstopo::persistence::LandscapeSample double_well_sample(std::size_t n) {
  losstopo::persistence::LandscapeSample s;
  s.center = Eigen::VectorXd::Zero(1);
  s.offsets.resize(static_cast<Eigen::Index>(n), 1);
  s.losses.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const double x = -2.0 + 4.0 * static_cast<double>(i) / static_cast<double>(n - 1);
    s.offsets(static_cast<Eigen::Index>(i), 0) = x;
    s.losses(static_cast<Eigen::Index>(i)) = double_well(x);
  }
  s.flagged.assign(n, false);
  s.radius = 2.0;
  return s;
}

inline const std::vector<std::pair<double, double>>& reference_points() {
  static const std::vector<std::pair<double, double>> pts = {
      {15, 8.1}, {18, 7.8}, {22, 7.2}, {25, 6.9}, {28, 6.5}, {32, 6.0}, {35, 5.7}, {38, 5.3}, {42, 4.9}, {45, 4.5},
      {48, 4.2}, {52, 3.8}, {55, 3.5}, {58, 3.1}, {62, 2.8}, {65, 2.5}, {68, 2.2}, {72, 1.9}, {75, 1.5}};
  return pts;
}

// Least squares by the 2x2 normal equations in raw (uncentred) sums.
struct LineFit {
  double alpha, beta, r2;
};
inline LineFit normal_equation_fit(const std::vector<std::pair<double, double>>& pts) {
  long double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [x, y] : pts) {
    n += 1;
    sx += x;
    sy += y;
    sxx += static_cast<long double>(x) * x;
    sxy += static_cast<long double>(x) * y;
  }
  const long double det = n * sxx - sx * sx;
  const long double slope = (n * sxy - sx * sy) / det;
  const long double icept = (sy * sxx - sx * sxy) / det;
  const long double mean = sy / n;
  long double res = 0, tot = 0;
  for (auto [x, y] : pts) {
    const long double r = y - (icept + slope * x);
    res += r * r;
    tot += (y - mean) * (y - mean);
  }
  return {static_cast<double>(-slope), static_cast<double>(icept), static_cast<double>(1 - res / tot)};
}

}  // namespace fixtures

#include "losstopo/persistence/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <tuple>

#include "losstopo/error.hpp"
#include "losstopo/parallel.hpp"
#include "losstopo/persistence/union_find.hpp"

namespace losstopo::persistence {

std::size_t LandscapeSample::flagged_count() const {
  return static_cast<std::size_t>(std::count(flagged.begin(), flagged.end(), true));
}

LandscapeSample sample_landscape(const Eigen::VectorXd& center, double radius, std::size_t n_samples,
                                 std::uint64_t seed, const homotopy::LossFn& loss, std::size_t jobs) {
  if (n_samples < 2) throw ConfigError("landscape sampling needs at least 2 samples");
  if (!(radius >= 0.0) || !std::isfinite(radius)) throw ConfigError("landscape radius must be finite and non-negative");

  LandscapeSample out;
  out.center = center;
  out.radius = radius;
  out.seed = seed;
  const auto n = static_cast<Eigen::Index>(n_samples);
  out.offsets.resize(n, center.size());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < center.size(); ++j) out.offsets(i, j) = normal(rng) * radius;

  out.losses.resize(n);
  std::vector<char> bad(n_samples, 0);
  parallel_for(n_samples, jobs, [&](std::size_t i) {
    const auto row = static_cast<Eigen::Index>(i);
    const Eigen::VectorXd theta = center + out.offsets.row(row).transpose();
    double value = loss(theta);
    if (!std::isfinite(value) || value > kLossSentinel) {
      value = kLossSentinel;
      bad[i] = 1;
    }
    out.losses(row) = value;
  });
  out.flagged.assign(bad.begin(), bad.end());
  return out;
}

std::vector<std::vector<std::size_t>> knn_graph(const Eigen::MatrixXd& points, std::size_t k, std::size_t jobs) {
  const auto n = static_cast<std::size_t>(points.rows());
  const Eigen::MatrixXd cols = points.transpose();  // one point per contiguous column
  std::vector<std::vector<std::size_t>> nearest(n);
  parallel_for(n, jobs, [&](std::size_t i) {
    std::vector<std::pair<double, std::size_t>> row;
    row.reserve(n);
    const auto a = cols.col(static_cast<Eigen::Index>(i));
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) row.emplace_back((a - cols.col(static_cast<Eigen::Index>(j))).squaredNorm(), j);
    const auto take = std::min(k, row.size());
    std::partial_sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(take), row.end());
    for (std::size_t m = 0; m < take; ++m) nearest[i].push_back(row[m].second);
  });
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i)
    for (auto j : nearest[i]) {
      adj[i].push_back(j);
      adj[j].push_back(i);
    }
  for (auto& nbrs : adj) {
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
  }
  return adj;
}

PersistenceDiagram sublevel_persistence_0d(const LandscapeSample& sample, std::size_t k_neighbors, std::size_t jobs) {
  const auto n = sample.size();
  if (static_cast<std::size_t>(sample.losses.size()) != n) throw DimensionError("landscape losses do not match offsets");
  if (k_neighbors < 1 || k_neighbors >= n) throw ConfigError("k_neighbors must be in [1, n_samples)");

  const auto adj = knn_graph(sample.offsets, k_neighbors, jobs);
  const auto& f = sample.losses;
  auto loss_of = [&](std::size_t v) { return f(static_cast<Eigen::Index>(v)); };

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::make_tuple(loss_of(a), a) < std::make_tuple(loss_of(b), b);
  });
  std::vector<std::size_t> rank(n);
  for (std::size_t r = 0; r < n; ++r) rank[order[r]] = r;

  PersistenceDiagram dgm;
  dgm.kind = FiltrationKind::kSublevel;
  dgm.k_neighbors = k_neighbors;

  // Roots are always the component's first (lowest-ranked) vertex, so rank
  // order on roots is the elder rule.
  UnionFind uf(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto v = order[r];
    const double level = loss_of(v);
    std::vector<std::size_t> roots;
    for (auto u : adj[v])
      if (rank[u] < r) roots.push_back(uf.find(u));
    std::sort(roots.begin(), roots.end(), [&](std::size_t a, std::size_t b) { return rank[a] < rank[b]; });
    roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
    if (roots.empty()) continue;  // v starts a new component rooted at itself
    const auto elder = roots.front();
    uf.attach(elder, v);
    for (std::size_t i = 1; i < roots.size(); ++i) {
      dgm.points.push_back({0, loss_of(roots[i]), level, false});
      uf.attach(elder, roots[i]);
    }
  }
  for (std::size_t v = 0; v < n; ++v)
    if (uf.find(v) == v) dgm.points.push_back({0, loss_of(v), kInfinity, false});
  dgm.canonicalize();
  return dgm;
}

}  // namespace losstopo::persistence

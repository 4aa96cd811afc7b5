#include "losstopo/persistence/rips.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <tuple>
#include <unordered_map>

#include "losstopo/error.hpp"
#include "losstopo/persistence/union_find.hpp"

namespace losstopo::persistence {

namespace {

using Index = std::uint64_t;

// Filtration position of a simplex: value first, then its combinatorial
// index. Only simplices of one dimension are ever compared.
struct Key {
  double value;
  Index index;

  bool operator<(const Key& o) const { return std::tie(value, index) < std::tie(o.value, o.index); }
  bool operator==(const Key& o) const { return index == o.index; }
};

Index choose2(Index n) { return n * (n - 1) / 2; }
Index choose3(Index n) { return n * (n - 1) * (n - 2) / 6; }

// Combinatorial number system index of {i < j < k}.
Index triangle_index(Index i, Index j, Index k) { return choose3(k) + choose2(j) + i; }

struct Edge {
  Key key;
  std::size_t u, v;
};

Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& points) {
  const auto n = points.rows();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) d(i, j) = d(j, i) = (points.row(i) - points.row(j)).norm();
  return d;
}

// In-place Z/2 sum of two sorted columns.
void add_column(std::vector<Key>& target, const std::vector<Key>& source, std::vector<Key>& scratch) {
  scratch.clear();
  auto a = target.cbegin();
  auto b = source.cbegin();
  while (a != target.cend() && b != source.cend()) {
    if (*a < *b) {
      scratch.push_back(*a++);
    } else if (*b < *a) {
      scratch.push_back(*b++);
    } else {
      ++a;
      ++b;
    }
  }
  scratch.insert(scratch.end(), a, target.cend());
  scratch.insert(scratch.end(), b, source.cend());
  target.swap(scratch);
}

}  // namespace

PersistenceDiagram rips_persistence(const Eigen::MatrixXd& points, int max_dim, double max_edge) {
  if (points.rows() == 0) throw DimensionError("rips persistence needs at least one point");
  if (max_dim < 0 || max_dim > 2) throw ConfigError("rips max_dim must be 0, 1 or 2");
  if (!(max_edge > 0)) throw ConfigError("max_edge must be positive");

  PersistenceDiagram dgm;
  dgm.kind = FiltrationKind::kRips;
  dgm.max_edge = max_edge;
  dgm.h2_requested = max_dim == 2;
  const int top_dim = std::min(max_dim, 1);
  const bool truncating = max_edge < kInfinity;

  const auto n = static_cast<std::size_t>(points.rows());
  const auto dist = pairwise_distances(points);

  std::vector<Edge> edges;
  edges.reserve(n * (n - 1) / 2);
  for (std::size_t j = 1; j < n; ++j)
    for (std::size_t i = 0; i < j; ++i) {
      const double d = dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (d <= max_edge) edges.push_back({{d, choose2(j) + i}, i, j});
    }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) { return a.key < b.key; });

  // Dimension 0.
  UnionFind components(n);
  std::vector<bool> cleared(edges.size(), false);
  std::size_t alive = n;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto ru = components.find(edges[e].u), rv = components.find(edges[e].v);
    if (ru == rv) continue;
    components.attach(std::min(ru, rv), std::max(ru, rv));
    dgm.points.push_back({0, 0.0, edges[e].key.value, false});
    cleared[e] = true;
    --alive;
  }
  dgm.points.push_back({0, 0.0, kInfinity, false});
  for (std::size_t c = 1; c < alive; ++c) dgm.points.push_back({0, 0.0, max_edge, true});

  if (top_dim >= 1 && n >= 3) {
    auto d = [&](std::size_t a, std::size_t b) { return dist(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)); };
    std::unordered_map<Index, std::size_t> pivot_of;  // triangle index -> stored column
    std::vector<std::vector<Key>> reduced;
    std::vector<Key> column, scratch;

    for (std::size_t e = edges.size(); e-- > 0;) {
      if (cleared[e]) continue;
      const auto& edge = edges[e];
      column.clear();
      for (std::size_t k = 0; k < n; ++k) {
        if (k == edge.u || k == edge.v) continue;
        const double value = std::max({edge.key.value, d(edge.u, k), d(edge.v, k)});
        if (value > max_edge) continue;
        Index a = edge.u, b = edge.v, c = k;
        if (c < a) std::swap(a, c);
        if (c < b) std::swap(b, c);
        if (b < a) std::swap(a, b);
        column.push_back({value, triangle_index(a, b, c)});
      }
      std::sort(column.begin(), column.end());

      while (!column.empty()) {
        auto it = pivot_of.find(column.front().index);
        if (it == pivot_of.end()) break;
        add_column(column, reduced[it->second], scratch);
      }

      if (column.empty()) {
        // Cocycle that never dies inside the truncated complex.
        dgm.points.push_back({1, edge.key.value, truncating ? max_edge : kInfinity, truncating});
        continue;
      }
      const double death = column.front().value;
      pivot_of.emplace(column.front().index, reduced.size());
      reduced.push_back(column);
      if (death > edge.key.value) dgm.points.push_back({1, edge.key.value, death, false});
    }
  }
  dgm.canonicalize();
  return dgm;
}

std::vector<std::size_t> maxmin_landmarks(const Eigen::MatrixXd& points, std::size_t count) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (n == 0 || count == 0) return {};
  if (count >= n) {
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    return all;
  }
  std::vector<std::size_t> chosen = {0};
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  while (chosen.size() < count) {
    const auto last = static_cast<Eigen::Index>(chosen.back());
    std::size_t best = 0;
    double best_d = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], (points.row(static_cast<Eigen::Index>(i)) - points.row(last)).norm());
      if (nearest[i] > best_d) {
        best_d = nearest[i];
        best = i;
      }
    }
    chosen.push_back(best);
  }
  return chosen;
}

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& m, const std::vector<std::size_t>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

}  // namespace losstopo::persistence

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "losstopo/homotopy/homotopy.hpp"
#include "losstopo/persistence/diagram.hpp"

namespace losstopo::persistence {

// Losses that are not finite are replaced by this value and flagged.
inline constexpr double kLossSentinel = 1e6;

struct LandscapeSample {
  Eigen::VectorXd center;
  Eigen::MatrixXd offsets;  // n_samples x n_params
  Eigen::VectorXd losses;   // loss at center + offsets.row(i)
  std::vector<bool> flagged;
  double radius = 0.0;
  std::uint64_t seed = 0;

  std::size_t size() const { return static_cast<std::size_t>(offsets.rows()); }
  std::size_t flagged_count() const;
};

// Offsets are i.i.d. N(0, radius^2) per coordinate, drawn in row order from
// one generator seeded with `seed`; losses are evaluated on `jobs` threads.
LandscapeSample sample_landscape(const Eigen::VectorXd& center, double radius, std::size_t n_samples,
                                 std::uint64_t seed, const homotopy::LossFn& loss, std::size_t jobs = 1);

// Sublevel H0 persistence of the loss on the symmetric k-nearest-neighbour
// graph of the offsets. Vertices enter in (loss, index) order. When
// components meet, the one with the lower (birth, root vertex) survives.
// Each connected component of the graph leaves one essential class.
PersistenceDiagram sublevel_persistence_0d(const LandscapeSample& sample, std::size_t k_neighbors,
                                            std::size_t jobs = 1);

// Symmetric kNN adjacency; ties in distance go to the lower index.
std::vector<std::vector<std::size_t>> knn_graph(const Eigen::MatrixXd& points, std::size_t k, std::size_t jobs = 1);

}  // namespace losstopo::persistence

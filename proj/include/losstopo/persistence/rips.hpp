#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "losstopo/persistence/diagram.hpp"

namespace losstopo::persistence {

// Vietoris-Rips persistence over Z/2 of the rows of `points` (Euclidean
// metric), dimensions 0 and 1.
//
// H0 comes from merging components along edges in filtration order; every
// vertex is born at 0 and one class is essential. H1 comes from reducing the
// coboundary matrix of the edges in reverse filtration order, with the
// H0-death edges cleared beforehand. Zero-length H1 intervals are dropped.
//
// Edges longer than `max_edge` are left out. Classes still alive at
// max_edge (other than the single essential H0 class) are reported with
// death = max_edge and `truncated` set.
//
// max_dim may be 0, 1 or 2; 2 is computed as 1 and flagged in the diagram.
PersistenceDiagram rips_persistence(const Eigen::MatrixXd& points, int max_dim, double max_edge = kInfinity);

// Greedy max-min (farthest point) subset of at most `count` row indices,
// starting from row 0. Ties go to the lowest index.
std::vector<std::size_t> maxmin_landmarks(const Eigen::MatrixXd& points, std::size_t count);

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& m, const std::vector<std::size_t>& rows);

}  // namespace losstopo::persistence

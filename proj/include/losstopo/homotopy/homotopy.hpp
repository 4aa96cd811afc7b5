#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "losstopo/nn/dataset.hpp"
#include "losstopo/nn/train.hpp"

namespace losstopo::homotopy {

// Loss as a function of a flat parameter vector.
using LossFn = std::function<double(const Eigen::VectorXd&)>;

// Loss of `arch` on a fixed evaluation batch.
LossFn network_loss(const nn::NetworkArch& arch, nn::LabeledData batch);

inline constexpr std::size_t kDefaultSSteps = 50;
inline constexpr std::size_t kDefaultTSteps = 20;
// Endpoints further apart than this are flagged: the straight-line grid then
// deforms paths with different endpoints.
inline constexpr double kEndpointTolerance = 1e-6;

// n points at uniform arc length along the polyline through `points`; the
// first and last points are copied exactly. A zero-length path yields n
// copies of its point.
std::vector<Eigen::VectorXd> resample_path(std::span<const Eigen::VectorXd> points, std::size_t n);

// resample_path on the trajectory's points. Losses are linearly interpolated
// along the same parameterization; step metadata is dropped.
nn::Trajectory resample_trajectory(const nn::Trajectory& gamma, std::size_t n);

// H(s, t) = (1 - t) gamma0(s) + t gamma1(s) for t on a uniform grid in
// [0, 1], stored row-major in s.
struct HomotopyGrid {
  std::size_t s_steps = 0;
  std::size_t t_steps = 0;
  std::vector<Eigen::VectorXd> params;
  Eigen::MatrixXd losses;  // s_steps x t_steps

  const Eigen::VectorXd& at(std::size_t s, std::size_t t) const { return params[s * t_steps + t]; }
};

// Both paths must already have the same number of points.
HomotopyGrid build_grid(std::span<const Eigen::VectorXd> path0, std::span<const Eigen::VectorXd> path1,
                        std::size_t t_steps, const LossFn& loss);

struct BarrierReport {
  bool homotopic = false;
  double max_loss = 0.0;  // non-finite losses report +inf
  std::optional<std::pair<std::size_t, std::size_t>> barrier_location;  // first (s, t) above threshold
  double threshold = 0.0;
  bool endpoints_differ = false;
  double endpoint_gap = 0.0;  // max-abs distance between matching endpoints
};

BarrierReport scan_grid(const HomotopyGrid& grid, double threshold);

// Resamples both trajectories to s_steps points and scans the full grid.
BarrierReport are_homotopic(const nn::Trajectory& g0, const nn::Trajectory& g1, double threshold,
                            std::size_t s_steps, std::size_t t_steps, const LossFn& loss);

// 1.5 x the largest loss at the four path endpoints.
double auto_threshold(const nn::Trajectory& g0, const nn::Trajectory& g1, const LossFn& loss);

// Fixed value, or per-pair auto_threshold when `automatic` is set.
struct Threshold {
  bool automatic = false;
  double value = 0.0;

  static Threshold fixed(double v) { return {false, v}; }
  static Threshold per_pair_auto() { return {true, 0.0}; }
};

using RelationMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct HomotopyMatrixResult {
  RelationMatrix relation;
  // Reports for i < j in row-major pair order.
  std::vector<std::pair<std::pair<std::size_t, std::size_t>, BarrierReport>> pairs;
};

// One evaluation per unordered pair, run on `jobs` threads. Throws
// DimensionError on mixed architectures.
HomotopyMatrixResult homotopy_matrix(std::span<const nn::Trajectory> trajs, Threshold threshold,
                                     std::size_t s_steps, std::size_t t_steps, const LossFn& loss,
                                     std::size_t jobs = 1);

struct HomotopyClassPartition {
  std::vector<std::vector<std::size_t>> classes;
  RelationMatrix relation;
};

// Connected components by breadth-first search; components ordered by
// smallest member, members ascending. Throws on non-square or asymmetric
// input or a false diagonal entry.
HomotopyClassPartition partition_classes(const RelationMatrix& relation);

struct ClassSummary {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 for singletons
  double min = 0.0;
  double max = 0.0;
  std::size_t size = 0;
};

struct ClassStatistics {
  std::vector<ClassSummary> classes;
  double within_class_max_spread = 0.0;  // max over classes of (max - min)
  double between_class_mean_gap = 0.0;   // max - min of class means
};

ClassStatistics class_statistics(const HomotopyClassPartition& partition, std::span<const double> accuracies);

nlohmann::json to_json(const BarrierReport& r);
nlohmann::json to_json(const HomotopyClassPartition& p);
nlohmann::json to_json(const ClassStatistics& s);

}  // namespace losstopo::homotopy

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "losstopo/nn/arch.hpp"
#include "losstopo/nn/dataset.hpp"
#include "losstopo/nn/train.hpp"

namespace losstopo::category {

// Object of Param: parameters plus the data and loss they are evaluated
// under. `loss` caches the training loss at theta and fills the loss column
// of identity trajectories.
struct ParamObject {
  nn::ParamVector theta;
  std::optional<nn::DatasetSpec> dataset;
  double loss = 0.0;

  nn::OutputHead head() const { return theta.arch.head; }
  // Exact theta equality plus matching dataset and loss head.
  bool operator==(const ParamObject& other) const;
};

ParamObject make_object(const nn::ParamVector& theta, const nn::LabeledData& train,
                        std::optional<nn::DatasetSpec> dataset = std::nullopt);

// Penultimate activations of one parameter vector over a probe set.
struct RepresentationSnapshot {
  Eigen::MatrixXd matrix;  // n_probe x width
  std::string probe_id;
  std::optional<std::size_t> point_index;
};

struct RepresentationPath {
  std::string probe_id;
  std::vector<RepresentationSnapshot> snapshots;

  std::size_t size() const { return snapshots.size(); }
};

inline constexpr double kJunctionTolerance = 1e-9;
inline constexpr double kFunctorialityTolerance = 1e-9;

// Path concatenation g2 after g1. g1's last point must match g2's first
// within `tolerance` (max-abs); the junction point is kept once (from g1).
nn::Trajectory compose_trajectories(const nn::Trajectory& g1, const nn::Trajectory& g2,
                                    double tolerance = kJunctionTolerance);

// Constant path of `length` copies of obj.theta.
nn::Trajectory identity_trajectory(const ParamObject& obj, std::size_t length);

// Snapshot i is forward(points[i], probe).penultimate.
RepresentationPath apply_functor(const nn::Trajectory& gamma, const Eigen::MatrixXd& probe,
                                 const std::string& probe_id = "probe");

// Concatenation in Rep, dropping p2's first snapshot.
RepresentationPath concatenate(const RepresentationPath& p1, const RepresentationPath& p2);

struct FunctorialityReport {
  double max_deviation = 0.0;
  bool passes = false;
};

// Compares L(g2 . g1) against L(g1) followed by L(g2), element-wise.
FunctorialityReport verify_functoriality(const nn::Trajectory& g1, const nn::Trajectory& g2,
                                         const Eigen::MatrixXd& probe);

// Largest change of any pairwise probe distance between consecutive
// snapshots. Monitoring statistic only.
double max_distance_distortion(const RepresentationPath& path);

// Element-wise mean. Each coordinate is accumulated in sorted order relative
// to its minimum, so the result is independent of input order and exact on
// identical inputs.
nn::ParamVector fedavg_colimit(std::span<const nn::ParamVector> thetas);

nlohmann::json to_json(const RepresentationPath& path);
RepresentationPath representation_path_from_json(const nlohmann::json& j);

}  // namespace losstopo::category

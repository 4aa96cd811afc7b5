#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "losstopo/error.hpp"
#include "losstopo/nn/arch.hpp"
#include "losstopo/nn/dataset.hpp"

namespace losstopo::nn {

enum class Optimizer { kSgd, kAdam, kNaturalGradient };

std::string_view to_string(Optimizer o);
Optimizer parse_optimizer(std::string_view s);

struct TrainConfig {
  Optimizer optimizer = Optimizer::kSgd;
  double learning_rate = 0.01;
  std::size_t batch_size = 32;
  std::size_t epochs = 1;
  std::size_t record_every = 1;  // in optimizer steps
  std::uint64_t seed = 0;
  double damping = 0.0;            // natural gradient only
  std::size_t frozen_prefix = 0;  // leading affine layers left untouched

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

// Loss above this (or non-finite) aborts training.
inline constexpr double kDivergenceLoss = 1e6;

// A recorded optimization path. points[0] is the initialization; every point
// parameterizes `arch`. losses[i] is the full training-set loss at points[i]
// and steps[i] the optimizer step it was recorded after.
struct Trajectory {
  NetworkArch arch;
  std::optional<DatasetSpec> dataset;
  std::optional<TrainConfig> config;
  std::vector<Eigen::VectorXd> points;
  std::vector<double> losses;
  std::vector<std::size_t> steps;

  std::size_t size() const { return points.size(); }
  ParamVector point(std::size_t i) const { return ParamVector(arch, points.at(i)); }
  ParamVector front() const { return point(0); }
  ParamVector back() const { return point(points.size() - 1); }

  // Throws on empty paths, length mismatches, wrong widths or non-finite
  // values.
  void validate() const;
};

class DivergenceError : public NumericError {
 public:
  DivergenceError(const std::string& what, Trajectory partial)
      : NumericError(what), partial_(std::move(partial)) {}
  // Recorded prefix; its last point is the last parameter vector whose loss
  // was still finite and below kDivergenceLoss.
  const Trajectory& partial() const { return partial_; }
  ParamVector last_valid() const { return partial_.back(); }

 private:
  Trajectory partial_;
};

// Minibatch training on already-materialized data. `dataset` is metadata
// copied into the trajectory.
Trajectory train(const NetworkArch& arch, const LabeledData& data, const TrainConfig& config,
                 const ParamVector& theta0, std::optional<DatasetSpec> dataset = std::nullopt);

// Materializes the dataset from its spec and trains on the training split.
Trajectory train(const NetworkArch& arch, const DatasetSpec& dataset, const TrainConfig& config,
                 const ParamVector& theta0);

// Number of optimizer steps a run performs.
std::size_t total_steps(const TrainConfig& config, std::size_t n_train);

}  // namespace losstopo::nn

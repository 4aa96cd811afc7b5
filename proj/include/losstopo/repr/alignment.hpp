#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "losstopo/category/category.hpp"
#include "losstopo/nn/arch.hpp"
#include "losstopo/nn/dataset.hpp"

namespace losstopo::repr {

enum class AlignmentMethod { kAffine, kProcrustes };

std::string_view to_string(AlignmentMethod m);
AlignmentMethod parse_alignment_method(std::string_view s);

// R1 ~ R0 A + 1 b^T.
struct AffineAlignment {
  Eigen::MatrixXd A;  // width x width
  Eigen::VectorXd b;
  // ||R1 - (R0 A + 1 b^T)||_F / ||R1||_F, or the absolute norm when R1 = 0.
  double residual = 0.0;
  // The design [R0 | 1] lacked full column rank; (A, b) is the minimum-norm
  // solution.
  bool rank_deficient = false;
  double min_singular_value = 0.0;  // of A
  AlignmentMethod method = AlignmentMethod::kAffine;
};

// Least squares on [R0 | 1] by complete orthogonal decomposition. The
// Procrustes variant restricts A to an orthogonal matrix fitted on centred
// data.
AffineAlignment fit_affine_alignment(const Eigen::MatrixXd& r0, const Eigen::MatrixXd& r1,
                                     AlignmentMethod method = AlignmentMethod::kAffine);
AffineAlignment fit_affine_alignment(const category::RepresentationSnapshot& r0,
                                     const category::RepresentationSnapshot& r1,
                                     AlignmentMethod method = AlignmentMethod::kAffine);

double alignment_residual(const Eigen::MatrixXd& r0, const Eigen::MatrixXd& r1, const Eigen::MatrixXd& A,
                          const Eigen::VectorXd& b);

struct AlignmentPathReport {
  std::vector<AffineAlignment> fits;
  double max_drift = 0.0;  // max_k ||A_{k+1} - A_k||_F
  double max_residual = 0.0;
};

AlignmentPathReport alignment_path(const category::RepresentationPath& p0, const category::RepresentationPath& p1,
                                   AlignmentMethod method = AlignmentMethod::kAffine, std::size_t jobs = 1);

inline constexpr double kFixedPointThreshold = 1e-4;
inline constexpr double kDefaultLossTolerance = 1e-3;
inline constexpr std::size_t kDefaultProbeSize = 256;

struct FixedPointReport {
  bool is_fixed_point = false;
  bool indeterminate = false;  // every direction left the loss band
  double max_repr_drift = 0.0;
  std::size_t kept_directions = 0;
  std::size_t rejected_directions = 0;
  double loss_at_center = 0.0;
};

// Directions with |loss(theta* + d) - loss(theta*)| > loss_tolerance are
// rejected. Drift for a kept direction is the probe mean of
// ||rho(theta* + d)(x) - rho(theta*)(x)||^2.
FixedPointReport fixed_point_check(const nn::ParamVector& theta_star, std::span<const Eigen::VectorXd> directions,
                                   double loss_tolerance, const Eigen::MatrixXd& probe,
                                   const nn::LabeledData& eval_batch);

// Seeded probe inputs drawn from a split.
Eigen::MatrixXd probe_set(const nn::LabeledData& split, std::size_t n = kDefaultProbeSize, std::uint64_t seed = 0);

nlohmann::json to_json(const AffineAlignment& a);
nlohmann::json to_json(const AlignmentPathReport& r);
nlohmann::json to_json(const FixedPointReport& r);

}  // namespace losstopo::repr

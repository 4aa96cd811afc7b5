#include "losstopo/repr/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "losstopo/error.hpp"
#include "losstopo/nn/network.hpp"
#include "losstopo/parallel.hpp"

namespace losstopo::repr {

std::string_view to_string(AlignmentMethod m) { return m == AlignmentMethod::kAffine ? "affine" : "procrustes"; }

AlignmentMethod parse_alignment_method(std::string_view s) {
  if (s == "affine") return AlignmentMethod::kAffine;
  if (s == "procrustes") return AlignmentMethod::kProcrustes;
  throw ConfigError("unknown alignment method: " + std::string(s));
}

double alignment_residual(const Eigen::MatrixXd& r0, const Eigen::MatrixXd& r1, const Eigen::MatrixXd& A,
                          const Eigen::VectorXd& b) {
  const Eigen::MatrixXd fitted = (r0 * A).rowwise() + b.transpose();
  const double err = (r1 - fitted).norm();
  const double scale = r1.norm();
  return scale > 0.0 ? err / scale : err;
}

AffineAlignment fit_affine_alignment(const Eigen::MatrixXd& r0, const Eigen::MatrixXd& r1, AlignmentMethod method) {
  if (r0.rows() != r1.rows() || r0.cols() != r1.cols())
    throw DimensionError("representation snapshots differ in shape");
  if (r0.rows() == 0 || r0.cols() == 0) throw DimensionError("empty representation snapshot");
  if (!r0.allFinite() || !r1.allFinite()) throw NumericError("representation snapshot has non-finite entries");

  const auto n = r0.rows(), w = r0.cols();
  AffineAlignment out;
  out.method = method;

  Eigen::MatrixXd design(n, w + 1);
  design << r0, Eigen::VectorXd::Ones(n);
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);
  out.rank_deficient = cod.rank() < w + 1;

  if (method == AlignmentMethod::kAffine) {
    const Eigen::MatrixXd coef = cod.solve(r1);
    out.A = coef.topRows(w);
    out.b = coef.row(w).transpose();
  } else {
    const Eigen::RowVectorXd m0 = r0.colwise().mean(), m1 = r1.colwise().mean();
    const Eigen::MatrixXd c0 = r0.rowwise() - m0, c1 = r1.rowwise() - m1;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(c0.transpose() * c1, Eigen::ComputeFullU | Eigen::ComputeFullV);
    out.A = svd.matrixU() * svd.matrixV().transpose();
    out.b = (m1 - m0 * out.A).transpose();
  }
  out.residual = alignment_residual(r0, r1, out.A, out.b);
  out.min_singular_value = Eigen::JacobiSVD<Eigen::MatrixXd>(out.A).singularValues().minCoeff();
  return out;
}

AffineAlignment fit_affine_alignment(const category::RepresentationSnapshot& r0,
                                     const category::RepresentationSnapshot& r1, AlignmentMethod method) {
  if (r0.probe_id != r1.probe_id) throw DimensionError("snapshots use different probe sets");
  return fit_affine_alignment(r0.matrix, r1.matrix, method);
}

AlignmentPathReport alignment_path(const category::RepresentationPath& p0, const category::RepresentationPath& p1,
                                   AlignmentMethod method, std::size_t jobs) {
  if (p0.size() != p1.size()) throw DimensionError("representation paths differ in length");
  if (p0.probe_id != p1.probe_id) throw DimensionError("representation paths use different probe sets");
  AlignmentPathReport report;
  report.fits.resize(p0.size());
  parallel_for(p0.size(), jobs, [&](std::size_t k) {
    report.fits[k] = fit_affine_alignment(p0.snapshots[k].matrix, p1.snapshots[k].matrix, method);
  });
  for (std::size_t k = 0; k < report.fits.size(); ++k) {
    report.max_residual = std::max(report.max_residual, report.fits[k].residual);
    if (k > 0) report.max_drift = std::max(report.max_drift, (report.fits[k].A - report.fits[k - 1].A).norm());
  }
  return report;
}

FixedPointReport fixed_point_check(const nn::ParamVector& theta_star, std::span<const Eigen::VectorXd> directions,
                                   double loss_tolerance, const Eigen::MatrixXd& probe,
                                   const nn::LabeledData& eval_batch) {
  if (directions.empty()) throw ConfigError("fixed point check needs at least one direction");
  if (!(loss_tolerance >= 0.0)) throw ConfigError("loss tolerance must be non-negative");

  FixedPointReport report;
  report.loss_at_center = nn::loss(theta_star, eval_batch);
  const Eigen::MatrixXd rho = nn::forward(theta_star, probe).penultimate;

  for (const auto& d : directions) {
    if (d.size() != static_cast<Eigen::Index>(theta_star.size()))
      throw DimensionError("perturbation length does not match parameter count");
    const nn::ParamVector moved(theta_star.arch, theta_star.values + d);
    double l = 0.0;
    try {
      l = nn::loss(moved, eval_batch);
    } catch (const NumericError&) {
      ++report.rejected_directions;
      continue;
    }
    if (!(std::abs(l - report.loss_at_center) <= loss_tolerance)) {
      ++report.rejected_directions;
      continue;
    }
    ++report.kept_directions;
    const Eigen::MatrixXd diff = nn::forward(moved, probe).penultimate - rho;
    const double drift = diff.rowwise().squaredNorm().mean();
    report.max_repr_drift = std::max(report.max_repr_drift, drift);
  }
  report.indeterminate = report.kept_directions == 0;
  report.is_fixed_point = !report.indeterminate && report.max_repr_drift < kFixedPointThreshold;
  return report;
}

Eigen::MatrixXd probe_set(const nn::LabeledData& split, std::size_t n, std::uint64_t seed) {
  return split.sample(n, seed).inputs;
}

namespace {

nlohmann::json matrix_rows(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

nlohmann::json to_json(const AffineAlignment& a) {
  return {{"method", to_string(a.method)},
          {"A", matrix_rows(a.A)},
          {"b", std::vector<double>(a.b.data(), a.b.data() + a.b.size())},
          {"residual", a.residual},
          {"rank_deficient", a.rank_deficient},
          {"min_singular_value", a.min_singular_value}};
}

nlohmann::json to_json(const AlignmentPathReport& r) {
  nlohmann::json fits = nlohmann::json::array();
  for (const auto& f : r.fits) fits.push_back(to_json(f));
  return {{"fits", std::move(fits)}, {"max_drift", r.max_drift}, {"max_residual", r.max_residual}};
}

nlohmann::json to_json(const FixedPointReport& r) {
  return {{"is_fixed_point", r.is_fixed_point},   {"indeterminate", r.indeterminate},
          {"max_repr_drift", r.max_repr_drift},   {"kept_directions", r.kept_directions},
          {"rejected_directions", r.rejected_directions}, {"loss_at_center", r.loss_at_center}};
}

}  // namespace losstopo::repr

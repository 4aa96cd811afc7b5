#include "losstopo/nn/fisher.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "losstopo/nn/network.hpp"

namespace losstopo::nn {

namespace {

void require_softmax(const ParamVector& theta) {
  if (theta.arch.head != OutputHead::kSoftmaxCrossEntropy)
    throw ConfigError("empirical Fisher needs a softmax-cross-entropy head (log-likelihood undefined for MSE)");
}

}  // namespace

FisherOperator::FisherOperator(const ParamVector& theta, const LabeledData& batch) {
  require_softmax(theta);
  per_example_ = nn::per_example_grads(theta, batch);
}

Eigen::VectorXd FisherOperator::apply(const Eigen::VectorXd& v) const {
  if (v.size() != per_example_.cols()) throw DimensionError("Fisher operator applied to wrong length");
  return per_example_.transpose() * (per_example_ * v) / static_cast<double>(per_example_.rows());
}

Eigen::MatrixXd FisherOperator::dense() const {
  const auto p = per_example_.cols();
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(p, p);
  f.selfadjointView<Eigen::Lower>().rankUpdate(per_example_.transpose(), 1.0 / static_cast<double>(per_example_.rows()));
  f.triangularView<Eigen::StrictlyUpper>() = f.transpose();
  return f;
}

Eigen::MatrixXd empirical_fisher(const ParamVector& theta, const LabeledData& batch) {
  return FisherOperator(theta, batch).dense();
}

CgResult conjugate_gradient(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& op,
                            const Eigen::VectorXd& b, double rel_tol, std::size_t max_iter) {
  CgResult res;
  res.x = Eigen::VectorXd::Zero(b.size());
  const double bnorm = b.norm();
  if (bnorm == 0.0) return res;

  Eigen::VectorXd r = b;
  Eigen::VectorXd p = r;
  double rr = r.squaredNorm();
  for (std::size_t it = 0; it < max_iter; ++it) {
    if (std::sqrt(rr) <= rel_tol * bnorm) {
      res.relative_residual = std::sqrt(rr) / bnorm;
      res.iterations = it;
      return res;
    }
    const Eigen::VectorXd ap = op(p);
    const double pap = p.dot(ap);
    if (!(pap > 0.0)) throw CgError("conjugate gradient hit a non-positive curvature direction", std::sqrt(rr) / bnorm);
    const double alpha = rr / pap;
    res.x += alpha * p;
    r -= alpha * ap;
    const double rr_next = r.squaredNorm();
    p = r + (rr_next / rr) * p;
    rr = rr_next;
  }
  // Recompute the true residual before giving up; the recursive one drifts.
  const double true_res = (b - op(res.x)).norm() / bnorm;
  if (true_res <= rel_tol) {
    res.relative_residual = true_res;
    res.iterations = max_iter;
    return res;
  }
  throw CgError("conjugate gradient did not converge in " + std::to_string(max_iter) +
                    " iterations (relative residual " + std::to_string(true_res) + ")",
                true_res);
}

Eigen::VectorXd natural_gradient_direction(const ParamVector& theta, const LabeledData& batch,
                                           const Eigen::VectorXd& gradient, double damping,
                                           const NaturalGradientOptions& options) {
  if (!(damping > 0.0)) throw ConfigError("natural gradient needs damping > 0");
  const FisherOperator fisher(theta, batch);
  const std::size_t cap =
      options.max_iterations ? options.max_iterations : std::max<std::size_t>(1000, 10 * theta.size());
  auto op = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return fisher.apply(v) + damping * v; };
  return conjugate_gradient(op, gradient, options.cg_tolerance, cap).x;
}

ParamVector natural_gradient_step(const ParamVector& theta, const LabeledData& batch, double learning_rate,
                                  double damping, const NaturalGradientOptions& options) {
  const Eigen::VectorXd g = grad(theta, batch);
  const Eigen::VectorXd dir = natural_gradient_direction(theta, batch, g, damping, options);
  return ParamVector(theta.arch, theta.values - learning_rate * dir);
}

}  // namespace losstopo::nn

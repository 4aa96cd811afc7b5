#pragma once

#include <cstddef>
#include <functional>

#include <Eigen/Dense>

#include "losstopo/error.hpp"
#include "losstopo/nn/arch.hpp"
#include "losstopo/nn/dataset.hpp"

namespace losstopo::nn {

// Empirical Fisher F = (1/n) sum_i g_i g_i^T over per-example
// log-likelihood gradients, kept in factored form.
class FisherOperator {
 public:
  FisherOperator(const ParamVector& theta, const LabeledData& batch);

  std::size_t dim() const { return static_cast<std::size_t>(per_example_.cols()); }
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
  Eigen::MatrixXd dense() const;
  const Eigen::MatrixXd& per_example_grads() const { return per_example_; }

 private:
  Eigen::MatrixXd per_example_;  // n x P
};

// Explicit P x P empirical Fisher. Throws ConfigError for MSE heads.
Eigen::MatrixXd empirical_fisher(const ParamVector& theta, const LabeledData& batch);

class CgError : public NumericError {
 public:
  CgError(const std::string& what, double residual) : NumericError(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

struct CgResult {
  Eigen::VectorXd x;
  std::size_t iterations = 0;
  double relative_residual = 0.0;
};

// Conjugate gradient for a symmetric positive definite operator. Stops at
// ||b - Ax|| <= rel_tol * ||b||; throws CgError after max_iter iterations.
CgResult conjugate_gradient(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& op,
                            const Eigen::VectorXd& b, double rel_tol, std::size_t max_iter);

struct NaturalGradientOptions {
  double cg_tolerance = 1e-6;
  std::size_t max_iterations = 0;  // 0 -> max(1000, 10 * P)
};

// theta - learning_rate * (F + damping I)^{-1} grad, solved matrix-free.
ParamVector natural_gradient_step(const ParamVector& theta, const LabeledData& batch, double learning_rate,
                                  double damping, const NaturalGradientOptions& options = {});

// The preconditioned direction (F + damping I)^{-1} grad alone; `gradient`
// is the mean loss gradient on the batch.
Eigen::VectorXd natural_gradient_direction(const ParamVector& theta, const LabeledData& batch,
                                           const Eigen::VectorXd& gradient, double damping,
                                           const NaturalGradientOptions& options = {});

}  // namespace losstopo::nn

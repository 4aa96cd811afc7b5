#pragma once

#include <Eigen/Dense>

#include "losstopo/nn/arch.hpp"
#include "losstopo/nn/dataset.hpp"

namespace losstopo::nn {

struct ForwardResult {
  Eigen::MatrixXd logits;       // n x output_dim, affine head output before the loss
  Eigen::MatrixXd penultimate;  // n x penultimate_dim, post-activation of the last hidden layer
};

ForwardResult forward(const ParamVector& theta, const Eigen::MatrixXd& inputs);

// Mean per-example loss. Softmax heads use log-sum-exp cross-entropy against
// labels; MSE heads use 0.5 * squared error summed over outputs.
double loss(const ParamVector& theta, const LabeledData& batch);

// Exact backprop gradient of loss(). Throws NumericError on non-finite
// intermediates.
Eigen::VectorXd grad(const ParamVector& theta, const LabeledData& batch);

// Same as grad() but also returns the loss from the shared forward pass.
double loss_and_grad(const ParamVector& theta, const LabeledData& batch, Eigen::VectorXd& gradient);

// Row i is the gradient of example i's own loss; the mean of the rows is
// grad(theta, batch).
Eigen::MatrixXd per_example_grads(const ParamVector& theta, const LabeledData& batch);

// Fraction of examples whose argmax logit equals the label.
double accuracy(const ParamVector& theta, const LabeledData& data);

}  // namespace losstopo::nn

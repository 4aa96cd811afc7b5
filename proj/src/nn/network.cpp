#include "losstopo/nn/network.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "losstopo/error.hpp"

namespace losstopo::nn {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMajor> weights(const ParamVector& theta, std::size_t layer) {
  const auto& a = theta.arch;
  return {theta.values.data() + a.layer_offset(layer), static_cast<Eigen::Index>(a.layer_sizes[layer + 1]),
          static_cast<Eigen::Index>(a.layer_sizes[layer])};
}

Eigen::Map<const Eigen::VectorXd> bias(const ParamVector& theta, std::size_t layer) {
  const auto& a = theta.arch;
  return {theta.values.data() + a.layer_offset(layer) + a.layer_sizes[layer] * a.layer_sizes[layer + 1],
          static_cast<Eigen::Index>(a.layer_sizes[layer + 1])};
}

void activate(Activation act, Eigen::MatrixXd& z) {
  switch (act) {
    case Activation::kRelu:
      z = z.cwiseMax(0.0);
      break;
    case Activation::kTanh:
      z = z.array().tanh();
      break;
    case Activation::kIdentity:
      break;
  }
}

// Derivative of the activation expressed through its output.
Eigen::MatrixXd activation_slope(Activation act, const Eigen::MatrixXd& out) {
  switch (act) {
    case Activation::kRelu:
      return (out.array() > 0.0).cast<double>();
    case Activation::kTanh:
      return 1.0 - out.array().square();
    case Activation::kIdentity:
      break;
  }
  return Eigen::MatrixXd::Ones(out.rows(), out.cols());
}

// layer_inputs[l] is the input of affine layer l; the last entry is the logits.
std::vector<Eigen::MatrixXd> forward_all(const ParamVector& theta, const Eigen::MatrixXd& inputs) {
  const auto& arch = theta.arch;
  if (static_cast<std::size_t>(inputs.cols()) != arch.input_dim())
    throw DimensionError("input width " + std::to_string(inputs.cols()) + " does not match " + arch.id());
  std::vector<Eigen::MatrixXd> acts;
  acts.reserve(arch.layer_sizes.size());
  acts.push_back(inputs);
  for (std::size_t l = 0; l < arch.num_affine_layers(); ++l) {
    Eigen::MatrixXd z = acts.back() * weights(theta, l).transpose();
    z.rowwise() += bias(theta, l).transpose();
    if (l + 1 < arch.num_affine_layers()) activate(arch.activation, z);
    acts.push_back(std::move(z));
  }
  return acts;
}

void check_batch(const ParamVector& theta, const LabeledData& batch) {
  if (batch.empty()) throw DimensionError("empty batch");
  if (theta.arch.head == OutputHead::kSoftmaxCrossEntropy && batch.labels.size() != batch.size())
    throw DimensionError("softmax head needs one label per example");
}

// Per-example losses and dLoss_i/dLogits_i (not divided by n).
double head_loss(const NetworkArch& arch, const Eigen::MatrixXd& logits, const LabeledData& batch,
                 Eigen::MatrixXd* dlogits) {
  const auto n = logits.rows();
  double total = 0.0;
  if (arch.head == OutputHead::kSoftmaxCrossEntropy) {
    if (dlogits) dlogits->resize(n, logits.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
      const int y = batch.labels[static_cast<std::size_t>(i)];
      if (y < 0 || y >= logits.cols()) throw DimensionError("label " + std::to_string(y) + " outside output width");
      const double m = logits.row(i).maxCoeff();
      const Eigen::RowVectorXd e = (logits.row(i).array() - m).exp();
      const double s = e.sum();
      total += m + std::log(s) - logits(i, y);
      if (dlogits) {
        dlogits->row(i) = e / s;
        (*dlogits)(i, y) -= 1.0;
      }
    }
  } else {
    const Eigen::MatrixXd t = batch.target_matrix(arch.output_dim());
    if (t.cols() != logits.cols()) throw DimensionError("target width does not match output width");
    const Eigen::MatrixXd r = logits - t;
    total = 0.5 * r.squaredNorm();
    if (dlogits) *dlogits = r;
  }
  return total / static_cast<double>(n);
}

void require_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) throw NumericError(std::string("non-finite values in ") + what);
}

}  // namespace

ForwardResult forward(const ParamVector& theta, const Eigen::MatrixXd& inputs) {
  auto acts = forward_all(theta, inputs);
  ForwardResult r;
  r.logits = std::move(acts.back());
  r.penultimate = std::move(acts[acts.size() - 2]);
  return r;
}

double loss(const ParamVector& theta, const LabeledData& batch) {
  check_batch(theta, batch);
  const auto acts = forward_all(theta, batch.inputs);
  return head_loss(theta.arch, acts.back(), batch, nullptr);
}

double loss_and_grad(const ParamVector& theta, const LabeledData& batch, Eigen::VectorXd& gradient) {
  check_batch(theta, batch);
  const auto& arch = theta.arch;
  const auto acts = forward_all(theta, batch.inputs);
  Eigen::MatrixXd dz;
  const double value = head_loss(arch, acts.back(), batch, &dz);
  dz /= static_cast<double>(batch.size());

  gradient.setZero(static_cast<Eigen::Index>(arch.param_count()));
  for (std::size_t l = arch.num_affine_layers(); l-- > 0;) {
    require_finite(dz, "backpropagated error");
    const auto& a = acts[l];
    const auto out = static_cast<Eigen::Index>(arch.layer_sizes[l + 1]);
    const auto in = static_cast<Eigen::Index>(arch.layer_sizes[l]);
    const auto off = static_cast<Eigen::Index>(arch.layer_offset(l));
    Eigen::Map<RowMajor>(gradient.data() + off, out, in) = dz.transpose() * a;
    gradient.segment(off + out * in, out) = dz.colwise().sum().transpose();
    if (l > 0) dz = (dz * weights(theta, l)).cwiseProduct(activation_slope(arch.activation, a));
  }
  if (!std::isfinite(value) || !gradient.allFinite()) throw NumericError("non-finite loss or gradient");
  return value;
}

Eigen::VectorXd grad(const ParamVector& theta, const LabeledData& batch) {
  Eigen::VectorXd g;
  loss_and_grad(theta, batch, g);
  return g;
}

Eigen::MatrixXd per_example_grads(const ParamVector& theta, const LabeledData& batch) {
  check_batch(theta, batch);
  const auto& arch = theta.arch;
  const auto acts = forward_all(theta, batch.inputs);
  Eigen::MatrixXd dz;
  head_loss(arch, acts.back(), batch, &dz);

  const auto n = static_cast<Eigen::Index>(batch.size());
  Eigen::MatrixXd g(n, static_cast<Eigen::Index>(arch.param_count()));
  for (std::size_t l = arch.num_affine_layers(); l-- > 0;) {
    require_finite(dz, "backpropagated error");
    const auto& a = acts[l];
    const auto out = static_cast<Eigen::Index>(arch.layer_sizes[l + 1]);
    const auto in = static_cast<Eigen::Index>(arch.layer_sizes[l]);
    const auto off = static_cast<Eigen::Index>(arch.layer_offset(l));
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index o = 0; o < out; ++o) g.row(i).segment(off + o * in, in) = dz(i, o) * a.row(i);
      g.row(i).segment(off + out * in, out) = dz.row(i);
    }
    if (l > 0) dz = (dz * weights(theta, l)).cwiseProduct(activation_slope(arch.activation, a));
  }
  return g;
}

double accuracy(const ParamVector& theta, const LabeledData& data) {
  if (data.empty()) throw DimensionError("empty dataset");
  if (data.labels.size() != data.size()) throw DimensionError("accuracy needs labels");
  const auto logits = forward(theta, data.inputs).logits;
  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index best = 0;
    logits.row(i).maxCoeff(&best);
    if (best == data.labels[static_cast<std::size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace losstopo::nn

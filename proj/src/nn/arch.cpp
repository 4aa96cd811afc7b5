#include "losstopo/nn/arch.hpp"

#include <cmath>
#include <random>

#include "losstopo/error.hpp"

namespace losstopo::nn {

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::kRelu:
      return "relu";
    case Activation::kTanh:
      return "tanh";
    case Activation::kIdentity:
      return "identity";
  }
  return "?";
}

std::string_view to_string(OutputHead h) {
  switch (h) {
    case OutputHead::kSoftmaxCrossEntropy:
      return "softmax-cross-entropy";
    case OutputHead::kMeanSquaredError:
      return "mean-squared-error";
  }
  return "?";
}

Activation parse_activation(std::string_view s) {
  if (s == "relu") return Activation::kRelu;
  if (s == "tanh") return Activation::kTanh;
  if (s == "identity") return Activation::kIdentity;
  throw ConfigError("unknown activation '" + std::string(s) + "'");
}

OutputHead parse_output_head(std::string_view s) {
  if (s == "softmax-cross-entropy") return OutputHead::kSoftmaxCrossEntropy;
  if (s == "mean-squared-error") return OutputHead::kMeanSquaredError;
  throw ConfigError("unknown output head '" + std::string(s) + "'");
}

void NetworkArch::validate() const {
  if (layer_sizes.size() < 2) throw ConfigError("architecture needs at least 2 layers");
  for (auto s : layer_sizes)
    if (s == 0) throw ConfigError("layer sizes must be >= 1");
}

std::size_t NetworkArch::param_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) n += layer_param_count(l);
  return n;
}

std::size_t NetworkArch::layer_offset(std::size_t layer) const {
  std::size_t off = 0;
  for (std::size_t l = 0; l < layer; ++l) off += layer_param_count(l);
  return off;
}

std::size_t NetworkArch::layer_param_count(std::size_t layer) const {
  return layer_sizes[layer] * layer_sizes[layer + 1] + layer_sizes[layer + 1];
}

std::string NetworkArch::id() const {
  std::string s;
  for (std::size_t i = 0; i < layer_sizes.size(); ++i) {
    if (i) s += '-';
    s += std::to_string(layer_sizes[i]);
  }
  s += '/';
  s += to_string(activation);
  s += '/';
  s += to_string(head);
  return s;
}

ParamVector::ParamVector(NetworkArch a, Eigen::VectorXd v) : arch(std::move(a)), values(std::move(v)) {
  if (values.size() != static_cast<Eigen::Index>(arch.param_count()))
    throw DimensionError("parameter vector of length " + std::to_string(values.size()) +
                         " does not match " + arch.id() + " (" +
                         std::to_string(arch.param_count()) + " parameters)");
}

bool ParamVector::operator==(const ParamVector& other) const {
  return arch == other.arch && values.size() == other.values.size() && values == other.values;
}

ParamVector init_params(const NetworkArch& arch, std::uint64_t seed) {
  arch.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(arch.param_count()));
  for (std::size_t l = 0; l < arch.num_affine_layers(); ++l) {
    const auto fan_in = arch.layer_sizes[l];
    const auto fan_out = arch.layer_sizes[l + 1];
    const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
    const auto off = static_cast<Eigen::Index>(arch.layer_offset(l));
    for (std::size_t i = 0; i < fan_in * fan_out; ++i)
      v[off + static_cast<Eigen::Index>(i)] = scale * normal(rng);
  }
  return ParamVector(arch, std::move(v));
}

double max_abs_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw DimensionError("length mismatch in max_abs_diff");
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace losstopo::nn

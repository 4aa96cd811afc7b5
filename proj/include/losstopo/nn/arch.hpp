#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace losstopo::nn {

enum class Activation { kRelu, kTanh, kIdentity };
enum class OutputHead { kSoftmaxCrossEntropy, kMeanSquaredError };

std::string_view to_string(Activation a);
std::string_view to_string(OutputHead h);
Activation parse_activation(std::string_view s);
OutputHead parse_output_head(std::string_view s);

// Dense feed-forward layout. Affine layer l maps layer_sizes[l] ->
// layer_sizes[l + 1]; the activation applies to every hidden layer, the last
// affine map produces logits (or regression outputs) with no activation.
struct NetworkArch {
  std::vector<std::size_t> layer_sizes;
  Activation activation = Activation::kRelu;
  OutputHead head = OutputHead::kSoftmaxCrossEntropy;

  // Throws ConfigError on fewer than two layers or a zero width.
  void validate() const;

  std::size_t input_dim() const { return layer_sizes.front(); }
  std::size_t output_dim() const { return layer_sizes.back(); }
  std::size_t num_affine_layers() const { return layer_sizes.size() - 1; }
  // Width of the representation returned as "penultimate". For an arch with
  // no hidden layer this is the input itself.
  std::size_t penultimate_dim() const { return layer_sizes[layer_sizes.size() - 2]; }

  std::size_t param_count() const;

  // Parameter slice of affine layer l: row-major weights (out x in) followed
  // by the bias (out).
  std::size_t layer_offset(std::size_t layer) const;
  std::size_t layer_param_count(std::size_t layer) const;

  // Stable textual identifier, e.g. "2-16-2/relu/softmax-cross-entropy".
  std::string id() const;

  bool operator==(const NetworkArch&) const = default;
};

// A flat parameter vector together with the architecture it parameterizes.
struct ParamVector {
  NetworkArch arch;
  Eigen::VectorXd values;

  ParamVector() = default;
  ParamVector(NetworkArch a, Eigen::VectorXd v);

  std::size_t size() const { return static_cast<std::size_t>(values.size()); }
  bool all_finite() const { return values.allFinite(); }

  // Exact element-wise equality plus matching architecture.
  bool operator==(const ParamVector& other) const;
};

// Gaussian weights with standard deviation 1/sqrt(fan_in), zero biases.
// Deterministic in (arch, seed).
ParamVector init_params(const NetworkArch& arch, std::uint64_t seed);

// Largest absolute element-wise difference; throws DimensionError on
// length mismatch.
double max_abs_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace losstopo::nn

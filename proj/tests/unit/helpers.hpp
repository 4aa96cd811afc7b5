#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "losstopo/nn/arch.hpp"
#include "losstopo/nn/dataset.hpp"

namespace testutil {

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
  return m;
}

inline Eigen::VectorXd random_vector(Eigen::Index n, std::uint64_t seed, double scale = 1.0) {
  return random_matrix(n, 1, seed, scale).col(0);
}

// Random labeled batch matching an architecture's input/output widths.
inline losstopo::nn::LabeledData random_batch(const losstopo::nn::NetworkArch& arch, std::size_t n,
                                              std::uint64_t seed) {
  losstopo::nn::LabeledData b;
  b.inputs = random_matrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(arch.input_dim()), seed);
  std::mt19937_64 rng(seed + 1);
  if (arch.head == losstopo::nn::OutputHead::kSoftmaxCrossEntropy) {
    std::uniform_int_distribution<int> label(0, static_cast<int>(arch.output_dim()) - 1);
    for (std::size_t i = 0; i < n; ++i) b.labels.push_back(label(rng));
  } else {
    b.targets = random_matrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(arch.output_dim()), seed + 2);
  }
  return b;
}

// Naive reference network: explicit loops over the documented parameter
// layout, no vectorization and no log-sum-exp shift.
struct ReferenceNet {
  const losstopo::nn::NetworkArch& arch;
  const Eigen::VectorXd& theta;

  double w(std::size_t layer, std::size_t out, std::size_t in) const {
    return theta[static_cast<Eigen::Index>(arch.layer_offset(layer) + out * arch.layer_sizes[layer] + in)];
  }
  double b(std::size_t layer, std::size_t out) const {
    return theta[static_cast<Eigen::Index>(arch.layer_offset(layer) +
                                           arch.layer_sizes[layer] * arch.layer_sizes[layer + 1] + out)];
  }
  double act(double z) const {
    switch (arch.activation) {
      case losstopo::nn::Activation::kRelu:
        return z > 0 ? z : 0;
      case losstopo::nn::Activation::kTanh:
        return std::tanh(z);
      default:
        return z;
    }
  }
  std::vector<double> logits(const Eigen::RowVectorXd& x) const {
    std::vector<double> a(x.data(), x.data() + x.size());
    for (std::size_t l = 0; l < arch.num_affine_layers(); ++l) {
      std::vector<double> z(arch.layer_sizes[l + 1]);
      for (std::size_t o = 0; o < z.size(); ++o) {
        double s = b(l, o);
        for (std::size_t i = 0; i < a.size(); ++i) s += w(l, o, i) * a[i];
        z[o] = l + 1 < arch.num_affine_layers() ? act(s) : s;
      }
      a = z;
    }
    return a;
  }
  double loss(const losstopo::nn::LabeledData& batch) const {
    double total = 0;
    for (Eigen::Index r = 0; r < batch.inputs.rows(); ++r) {
      const auto z = logits(batch.inputs.row(r));
      if (arch.head == losstopo::nn::OutputHead::kSoftmaxCrossEntropy) {
        double s = 0;
        for (double v : z) s += std::exp(v);
        total += -std::log(std::exp(z[static_cast<std::size_t>(batch.labels[static_cast<std::size_t>(r)])]) / s);
      } else {
        for (std::size_t o = 0; o < z.size(); ++o) {
          const double d = z[o] - batch.targets(r, static_cast<Eigen::Index>(o));
          total += 0.5 * d * d;
        }
      }
    }
    return total / static_cast<double>(batch.inputs.rows());
  }
};

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("losstopo_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_bytes(const std::filesystem::path& p, const std::vector<unsigned char>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace testutil

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace losstopo::nn {

enum class DatasetKind { kGaussianBlobs, kTwoMoons, kConcentricCircles, kTwoValleyRegression, kIdxFiles };

std::string_view to_string(DatasetKind k);
DatasetKind parse_dataset_kind(std::string_view s);

// Labeled examples. Classification data fills `labels`; regression data
// fills `targets`. An MSE head trained on classification data uses one-hot
// targets built from the labels.
struct LabeledData {
  Eigen::MatrixXd inputs;  // n x input_dim
  std::vector<int> labels;
  Eigen::MatrixXd targets;  // n x output_dim, or empty

  std::size_t size() const { return static_cast<std::size_t>(inputs.rows()); }
  bool empty() const { return inputs.rows() == 0; }
  bool has_targets() const { return targets.size() > 0; }

  LabeledData subset(std::span<const std::size_t> rows) const;
  LabeledData first(std::size_t n) const;
  // Seeded sample of min(n, size()) rows without replacement, in ascending
  // row order.
  LabeledData sample(std::size_t n, std::uint64_t seed) const;
  // Targets as a dense matrix; one-hot over `width` columns when only labels
  // are present.
  Eigen::MatrixXd target_matrix(std::size_t width) const;
};

struct DatasetSpec {
  DatasetKind kind = DatasetKind::kTwoMoons;
  std::uint64_t seed = 0;
  std::size_t n_train = 200;
  std::size_t n_test = 200;
  std::size_t input_dim = 2;
  std::size_t n_classes = 2;
  // Per-kind default when absent (blobs 1.0, moons 0.1, circles 0.05,
  // regression 0.05).
  std::optional<double> noise;
  // idx-files only: directory holding the four standard MNIST file names.
  std::optional<std::string> path;

  void validate() const;
  double effective_noise() const;
  bool operator==(const DatasetSpec&) const = default;
};

struct Dataset {
  LabeledData train;
  LabeledData test;
};

// Synthetic kinds are reproducible from spec.seed: the generator draws
// n_train + n_test examples from one stream and splits them in order.
Dataset make_dataset(const DatasetSpec& spec);

// Keeps only examples whose label is in `classes`, relabeling classes[i] -> i.
LabeledData select_classes(const LabeledData& data, std::span<const int> classes);

// IDX readers. Images (magic 0x00000803) are scaled to [0, 1]; labels use
// magic 0x00000801. Throw FormatError on wrong magic or truncation.
Eigen::MatrixXd read_idx_images(const std::filesystem::path& path);
std::vector<int> read_idx_labels(const std::filesystem::path& path);
LabeledData load_idx(const std::filesystem::path& images, const std::filesystem::path& labels);

}  // namespace losstopo::nn

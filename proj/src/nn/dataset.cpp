#include "losstopo/nn/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <numeric>
#include <random>

#include "losstopo/error.hpp"

namespace losstopo::nn {

std::string_view to_string(DatasetKind k) {
  switch (k) {
    case DatasetKind::kGaussianBlobs:
      return "gaussian-blobs";
    case DatasetKind::kTwoMoons:
      return "two-moons";
    case DatasetKind::kConcentricCircles:
      return "concentric-circles";
    case DatasetKind::kTwoValleyRegression:
      return "two-valley-regression";
    case DatasetKind::kIdxFiles:
      return "idx-files";
  }
  return "?";
}

DatasetKind parse_dataset_kind(std::string_view s) {
  for (auto k : {DatasetKind::kGaussianBlobs, DatasetKind::kTwoMoons, DatasetKind::kConcentricCircles,
                 DatasetKind::kTwoValleyRegression, DatasetKind::kIdxFiles})
    if (to_string(k) == s) return k;
  throw ConfigError("unknown dataset kind '" + std::string(s) + "'");
}

LabeledData LabeledData::subset(std::span<const std::size_t> rows) const {
  LabeledData out;
  out.inputs.resize(static_cast<Eigen::Index>(rows.size()), inputs.cols());
  if (has_targets()) out.targets.resize(static_cast<Eigen::Index>(rows.size()), targets.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(rows[i]);
    const auto o = static_cast<Eigen::Index>(i);
    out.inputs.row(o) = inputs.row(r);
    if (has_targets()) out.targets.row(o) = targets.row(r);
    if (!labels.empty()) out.labels.push_back(labels[rows[i]]);
  }
  return out;
}

LabeledData LabeledData::first(std::size_t n) const {
  std::vector<std::size_t> rows(std::min(n, size()));
  std::iota(rows.begin(), rows.end(), 0);
  return subset(rows);
}

LabeledData LabeledData::sample(std::size_t n, std::uint64_t seed) const {
  std::vector<std::size_t> all(size());
  std::iota(all.begin(), all.end(), 0);
  if (n >= size()) return subset(all);
  std::mt19937_64 rng(seed);
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(n);
  std::sort(all.begin(), all.end());
  return subset(all);
}

Eigen::MatrixXd LabeledData::target_matrix(std::size_t width) const {
  if (has_targets()) return targets;
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(inputs.rows(), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= width)
      throw DimensionError("label " + std::to_string(labels[i]) + " outside output width");
    t(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  }
  return t;
}

void DatasetSpec::validate() const {
  if (n_train == 0 || n_test == 0) throw ConfigError("n_train and n_test must be positive");
  if (input_dim == 0 || n_classes == 0) throw ConfigError("input_dim and n_classes must be positive");
  if (noise && (!std::isfinite(*noise) || *noise < 0)) throw ConfigError("noise must be finite and >= 0");
  switch (kind) {
    case DatasetKind::kTwoMoons:
    case DatasetKind::kConcentricCircles:
      if (input_dim != 2 || n_classes != 2)
        throw ConfigError(std::string(to_string(kind)) + " requires input_dim 2 and n_classes 2");
      break;
    case DatasetKind::kTwoValleyRegression:
      if (n_classes != 1) throw ConfigError("two-valley-regression has a single output (n_classes 1)");
      break;
    case DatasetKind::kIdxFiles:
      if (!path) throw ConfigError("idx-files dataset requires a path");
      break;
    case DatasetKind::kGaussianBlobs:
      break;
  }
}

double DatasetSpec::effective_noise() const {
  if (noise) return *noise;
  switch (kind) {
    case DatasetKind::kGaussianBlobs:
      return 1.0;
    case DatasetKind::kTwoMoons:
      return 0.1;
    case DatasetKind::kConcentricCircles:
      return 0.05;
    case DatasetKind::kTwoValleyRegression:
      return 0.05;
    case DatasetKind::kIdxFiles:
      return 0.0;
  }
  return 0.0;
}

namespace {

LabeledData generate(const DatasetSpec& spec, std::size_t n) {
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double noise = spec.effective_noise();
  const auto d = static_cast<Eigen::Index>(spec.input_dim);
  const auto k = static_cast<int>(spec.n_classes);

  LabeledData data;
  data.inputs.resize(static_cast<Eigen::Index>(n), d);

  switch (spec.kind) {
    case DatasetKind::kGaussianBlobs: {
      Eigen::MatrixXd centers(k, d);
      for (int c = 0; c < k; ++c)
        for (Eigen::Index j = 0; j < d; ++j) centers(c, j) = 4.0 * normal(rng);
      for (std::size_t i = 0; i < n; ++i) {
        const int label = static_cast<int>(i % static_cast<std::size_t>(k));
        for (Eigen::Index j = 0; j < d; ++j)
          data.inputs(static_cast<Eigen::Index>(i), j) = centers(label, j) + noise * normal(rng);
        data.labels.push_back(label);
      }
      break;
    }
    case DatasetKind::kTwoMoons: {
      for (std::size_t i = 0; i < n; ++i) {
        const int label = static_cast<int>(i % 2);
        const double t = std::numbers::pi * uniform(rng);
        double x = std::cos(t), y = std::sin(t);
        if (label == 1) {
          x = 1.0 - x;
          y = 0.5 - y;
        }
        data.inputs(static_cast<Eigen::Index>(i), 0) = x + noise * normal(rng);
        data.inputs(static_cast<Eigen::Index>(i), 1) = y + noise * normal(rng);
        data.labels.push_back(label);
      }
      break;
    }
    case DatasetKind::kConcentricCircles: {
      for (std::size_t i = 0; i < n; ++i) {
        const int label = static_cast<int>(i % 2);
        const double t = 2.0 * std::numbers::pi * uniform(rng);
        const double r = label == 0 ? 1.0 : 0.5;
        data.inputs(static_cast<Eigen::Index>(i), 0) = r * std::cos(t) + noise * normal(rng);
        data.inputs(static_cast<Eigen::Index>(i), 1) = r * std::sin(t) + noise * normal(rng);
        data.labels.push_back(label);
      }
      break;
    }
    case DatasetKind::kTwoValleyRegression: {
      // Target is a double well in the first coordinate: 4 (x0^2 - 1/2)^2.
      data.targets.resize(static_cast<Eigen::Index>(n), 1);
      for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        for (Eigen::Index j = 0; j < d; ++j) data.inputs(r, j) = 2.0 * uniform(rng) - 1.0;
        const double x0 = data.inputs(r, 0);
        const double w = x0 * x0 - 0.5;
        data.targets(r, 0) = 4.0 * w * w + noise * normal(rng);
      }
      break;
    }
    case DatasetKind::kIdxFiles:
      break;
  }
  return data;
}

std::vector<unsigned char> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(const std::vector<unsigned char>& bytes, std::size_t at) {
  return (std::uint32_t{bytes[at]} << 24) | (std::uint32_t{bytes[at + 1]} << 16) |
         (std::uint32_t{bytes[at + 2]} << 8) | std::uint32_t{bytes[at + 3]};
}

void require_bytes(const std::vector<unsigned char>& bytes, std::size_t n, const std::filesystem::path& path) {
  if (bytes.size() < n)
    throw FormatError("truncated IDX file " + path.string() + ": need " + std::to_string(n) + " bytes, have " +
                      std::to_string(bytes.size()));
}

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

}  // namespace

Dataset make_dataset(const DatasetSpec& spec) {
  spec.validate();
  if (spec.kind == DatasetKind::kIdxFiles) {
    const std::filesystem::path dir(*spec.path);
    auto train = load_idx(dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte");
    auto test = load_idx(dir / "t10k-images-idx3-ubyte", dir / "t10k-labels-idx1-ubyte");
    if (static_cast<std::size_t>(train.inputs.cols()) != spec.input_dim)
      throw ConfigError("IDX images have " + std::to_string(train.inputs.cols()) + " pixels, expected " +
                        std::to_string(spec.input_dim));
    for (const auto* part : {&train, &test})
      for (int l : part->labels)
        if (l < 0 || static_cast<std::size_t>(l) >= spec.n_classes)
          throw FormatError("IDX label " + std::to_string(l) + " outside n_classes");
    return {train.first(spec.n_train), test.first(spec.n_test)};
  }
  auto all = generate(spec, spec.n_train + spec.n_test);
  std::vector<std::size_t> tr(spec.n_train), te(spec.n_test);
  std::iota(tr.begin(), tr.end(), 0);
  std::iota(te.begin(), te.end(), spec.n_train);
  return {all.subset(tr), all.subset(te)};
}

LabeledData select_classes(const LabeledData& data, std::span<const int> classes) {
  std::vector<std::size_t> rows;
  std::vector<int> relabel;
  for (std::size_t i = 0; i < data.labels.size(); ++i) {
    auto it = std::find(classes.begin(), classes.end(), data.labels[i]);
    if (it != classes.end()) {
      rows.push_back(i);
      relabel.push_back(static_cast<int>(it - classes.begin()));
    }
  }
  auto out = data.subset(rows);
  out.labels = std::move(relabel);
  return out;
}

Eigen::MatrixXd read_idx_images(const std::filesystem::path& path) {
  const auto bytes = read_all(path);
  require_bytes(bytes, 16, path);
  if (be32(bytes, 0) != kImageMagic) throw FormatError("wrong magic in image file " + path.string());
  const std::size_t n = be32(bytes, 4), rows = be32(bytes, 8), cols = be32(bytes, 12);
  const std::size_t pixels = rows * cols;
  require_bytes(bytes, 16 + n * pixels, path);
  Eigen::MatrixXd images(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(pixels));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t p = 0; p < pixels; ++p)
      images(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p)) = bytes[16 + i * pixels + p] / 255.0;
  return images;
}

std::vector<int> read_idx_labels(const std::filesystem::path& path) {
  const auto bytes = read_all(path);
  require_bytes(bytes, 8, path);
  if (be32(bytes, 0) != kLabelMagic) throw FormatError("wrong magic in label file " + path.string());
  const std::size_t n = be32(bytes, 4);
  require_bytes(bytes, 8 + n, path);
  return {bytes.begin() + 8, bytes.begin() + 8 + static_cast<std::ptrdiff_t>(n)};
}

LabeledData load_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
  LabeledData data;
  data.inputs = read_idx_images(images);
  data.labels = read_idx_labels(labels);
  if (data.labels.size() != data.size())
    throw FormatError("image/label count mismatch: " + std::to_string(data.size()) + " images, " +
                      std::to_string(data.labels.size()) + " labels");
  return data;
}

}  // namespace losstopo::nn

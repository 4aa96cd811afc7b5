#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "losstopo/cli/config.hpp"
#include "losstopo/nn/train.hpp"

namespace losstopo::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

// All artifact files go through one writer; paths are relative to root.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path root);

  void text(const std::filesystem::path& rel, const std::string& content);
  void json(const std::filesystem::path& rel, const nlohmann::json& j);
  const std::filesystem::path& root() const { return root_; }
  std::vector<std::string> written() const;

 private:
  std::filesystem::path root_;
  mutable std::mutex mutex_;
  std::vector<std::string> written_;
};

struct RunRecord {
  std::string id;
  std::string file;  // relative to the output directory
  nn::TrainConfig config;
  bool diverged = false;
  double final_loss = 0.0;
  double train_accuracy = 0.0;  // fractions in [0, 1]
  double test_accuracy = 0.0;
};

struct Manifest {
  std::string name;
  nn::NetworkArch arch;
  nn::DatasetSpec dataset;
  std::vector<RunRecord> runs;

  std::vector<const RunRecord*> completed() const;
};

nlohmann::json to_json(const Manifest& m);
Manifest manifest_from_json(const nlohmann::json& j);
Manifest load_manifest(const std::filesystem::path& out_dir);

// Command-line values that override the config file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;
  std::optional<std::string> threshold;  // number or "auto"
  std::optional<double> radius;
  std::optional<std::size_t> samples;
  std::optional<std::size_t> landmarks;
  std::optional<std::string> mode;
  std::optional<std::filesystem::path> points_file;
};

void apply_overrides(ExperimentConfig& config, const Overrides& o);

// Every command returns an exit code. ConfigError, DimensionError and
// FormatError propagate to the caller as exit code 2, NumericError as 3.
int cmd_train(const ExperimentConfig& config, const std::filesystem::path& out);
int cmd_homotopy(const ExperimentConfig& config, const std::filesystem::path& out);
int cmd_persist(const ExperimentConfig& config, const std::filesystem::path& out,
                const std::optional<std::filesystem::path>& points_file = std::nullopt);
int cmd_transfer(const ExperimentConfig& config, const std::filesystem::path& out);
int cmd_report(const std::filesystem::path& out);

// Runs config.stages in order, stopping at the first non-zero exit code.
int run_pipeline(const ExperimentConfig& config, const std::filesystem::path& out);

// Config saved by cmd_train next to the manifest.
ExperimentConfig load_saved_config(const std::filesystem::path& out);

// Exception to exit code mapping used by the executable.
int exit_code_for_current_exception();

// Numeric rows of a CSV file; a non-numeric first line is treated as a
// header.
Eigen::MatrixXd read_points_csv(const std::filesystem::path& path);

}  // namespace losstopo::cli

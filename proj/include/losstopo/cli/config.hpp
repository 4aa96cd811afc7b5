#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "losstopo/nn/arch.hpp"
#include "losstopo/nn/dataset.hpp"
#include "losstopo/nn/train.hpp"

namespace losstopo::cli {

enum class PersistMode { kRips, kSublevel };

struct HomotopyStage {
  std::optional<double> threshold;  // absent: per-pair automatic threshold
  std::size_t s_steps = 50;
  std::size_t t_steps = 20;
  std::size_t eval_samples = 200;  // training rows the barrier loss is evaluated on
};

struct PersistStage {
  PersistMode mode = PersistMode::kSublevel;
  double radius = 0.1;
  std::size_t samples = 1000;
  std::size_t landmarks = 256;  // rips only
  std::size_t k_neighbors = 8;  // sublevel only
  std::optional<double> max_edge;
  int max_dim = 1;
  std::size_t eval_samples = 200;
  std::uint64_t sample_seed = 0;
};

struct TransferStage {
  std::size_t source_run = 0;  // manifest index of the source network
  nn::DatasetSpec target;
  std::vector<int> target_classes;  // empty: keep every class
  std::size_t skip_rows = 0;        // leading target training rows to skip
  std::size_t target_train = 100;
  std::size_t data_ratio = 10;
  nn::TrainConfig scratch;
  nn::TrainConfig finetune;
  std::size_t probe_size = 256;
};

// One trained network of a sweep.
struct RunSpec {
  std::string id;  // "run-000", ...
  nn::TrainConfig config;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  nn::NetworkArch arch;
  nn::DatasetSpec dataset;
  std::vector<nlohmann::json> train;  // base train configs (JSON objects)
  nlohmann::json sweep = nlohmann::json::object();
  std::vector<std::string> stages{"train"};
  HomotopyStage homotopy;
  PersistStage persist;
  std::optional<TransferStage> transfer;
};

// Strict parsing: unknown keys anywhere raise ConfigError.
ExperimentConfig experiment_from_json(const nlohmann::json& j);
ExperimentConfig load_experiment(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& c);

// Each base train config crossed with the sweep lists. Sweep keys vary in
// the order optimizer, learning_rate, batch_size, epochs, seed, with the
// last key fastest. Every run's seed is offset by the experiment seed.
std::vector<RunSpec> expand_sweep(const ExperimentConfig& c);

// Dataset with its seed offset by the experiment seed.
nn::DatasetSpec effective_dataset(const ExperimentConfig& c);

PersistMode parse_persist_mode(const std::string& s);
std::string to_string(PersistMode m);

}  // namespace losstopo::cli

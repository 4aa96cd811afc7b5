#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>

#include <json.hpp>

#include "losstopo/error.hpp"
#include "losstopo/nn/arch.hpp"
#include "losstopo/nn/dataset.hpp"
#include "losstopo/nn/train.hpp"

namespace losstopo::nn {

// Throws ConfigError if `obj` is not an object or holds a key outside `allowed`.
void reject_unknown_keys(const nlohmann::json& obj, std::initializer_list<std::string_view> allowed,
                         std::string_view where);

// Value at `key`, or `fallback` when absent or null. Type mismatches raise
// ConfigError.
template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

// Missing keys and type mismatches raise FormatError.
template <typename T>
T require(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw FormatError(std::string("missing key '") + key + "'");
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad value for '") + key + "': " + e.what());
  }
}

nlohmann::json to_json(const NetworkArch& arch);
NetworkArch arch_from_json(const nlohmann::json& j);

nlohmann::json to_json(const DatasetSpec& spec);
DatasetSpec dataset_from_json(const nlohmann::json& j);

nlohmann::json to_json(const TrainConfig& config);
// Missing keys take TrainConfig defaults.
TrainConfig train_config_from_json(const nlohmann::json& j);

// {arch, dataset, config, points, losses, steps}. Doubles are written in
// shortest round-trip form, so parse(emit(t)) reproduces t exactly.
nlohmann::json to_json(const Trajectory& traj);
Trajectory trajectory_from_json(const nlohmann::json& j);

void save_trajectory(const Trajectory& traj, const std::filesystem::path& path);
Trajectory load_trajectory(const std::filesystem::path& path);

nlohmann::json read_json_file(const std::filesystem::path& path);
// Two-space indent plus a trailing newline.
void write_json_file(const nlohmann::json& j, const std::filesystem::path& path);

}  // namespace losstopo::nn

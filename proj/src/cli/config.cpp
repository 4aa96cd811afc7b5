#include "losstopo/cli/config.hpp"

#include <fmt/format.h>

#include "losstopo/error.hpp"
#include "losstopo/nn/serialize.hpp"

namespace losstopo::cli {

using nlohmann::json;
using nn::get_or;

namespace {

const std::vector<std::string> kStages = {"train", "homotopy", "persist", "transfer", "report"};
const std::vector<std::string> kSweepKeys = {"optimizer", "learning_rate", "batch_size", "epochs", "seed"};

HomotopyStage homotopy_from_json(const json& j) {
  nn::reject_unknown_keys(j, {"threshold", "s_steps", "t_steps", "eval_samples"}, "homotopy");
  HomotopyStage h;
  if (j.contains("threshold") && !j["threshold"].is_null()) {
    if (j["threshold"].is_string()) {
      if (j["threshold"] != "auto") throw ConfigError("homotopy threshold must be a number or \"auto\"");
    } else {
      h.threshold = get_or<double>(j, "threshold", 0.0);
    }
  }
  h.s_steps = get_or<std::size_t>(j, "s_steps", h.s_steps);
  h.t_steps = get_or<std::size_t>(j, "t_steps", h.t_steps);
  h.eval_samples = get_or<std::size_t>(j, "eval_samples", h.eval_samples);
  if (h.s_steps < 2 || h.t_steps < 2) throw ConfigError("homotopy grid needs at least 2 steps per axis");
  return h;
}

json to_json(const HomotopyStage& h) {
  return {{"threshold", h.threshold ? json(*h.threshold) : json("auto")},
          {"s_steps", h.s_steps},
          {"t_steps", h.t_steps},
          {"eval_samples", h.eval_samples}};
}

PersistStage persist_from_json(const json& j) {
  nn::reject_unknown_keys(j,
                          {"mode", "radius", "samples", "landmarks", "k_neighbors", "max_edge", "max_dim",
                           "eval_samples", "sample_seed"},
                          "persist");
  PersistStage p;
  p.mode = parse_persist_mode(get_or<std::string>(j, "mode", to_string(p.mode)));
  p.radius = get_or<double>(j, "radius", p.radius);
  p.samples = get_or<std::size_t>(j, "samples", p.samples);
  p.landmarks = get_or<std::size_t>(j, "landmarks", p.landmarks);
  p.k_neighbors = get_or<std::size_t>(j, "k_neighbors", p.k_neighbors);
  if (j.contains("max_edge") && !j["max_edge"].is_null()) p.max_edge = get_or<double>(j, "max_edge", 0.0);
  p.max_dim = get_or<int>(j, "max_dim", p.max_dim);
  p.eval_samples = get_or<std::size_t>(j, "eval_samples", p.eval_samples);
  p.sample_seed = get_or<std::uint64_t>(j, "sample_seed", p.sample_seed);
  if (!(p.radius >= 0.0)) throw ConfigError("persist radius must be non-negative");
  if (p.samples < 2) throw ConfigError("persist samples must be at least 2");
  return p;
}

json to_json(const PersistStage& p) {
  return {{"mode", to_string(p.mode)},
          {"radius", p.radius},
          {"samples", p.samples},
          {"landmarks", p.landmarks},
          {"k_neighbors", p.k_neighbors},
          {"max_edge", p.max_edge ? json(*p.max_edge) : json(nullptr)},
          {"max_dim", p.max_dim},
          {"eval_samples", p.eval_samples},
          {"sample_seed", p.sample_seed}};
}

// Transfer training configs accept epochs = 0: the network is left as is.
nn::TrainConfig transfer_train_config(json j) {
  const bool untrained = j.contains("epochs") && j["epochs"].is_number_unsigned() && j["epochs"] == 0;
  if (untrained) j["epochs"] = 1;
  auto c = nn::train_config_from_json(j);
  if (untrained) c.epochs = 0;
  return c;
}

TransferStage transfer_from_json(const json& j) {
  nn::reject_unknown_keys(j,
                          {"source_run", "target", "target_classes", "skip_rows", "target_train", "data_ratio",
                           "scratch", "finetune", "probe_size"},
                          "transfer");
  TransferStage t;
  t.source_run = get_or<std::size_t>(j, "source_run", t.source_run);
  if (!j.contains("target")) throw ConfigError("transfer stage needs a target dataset");
  t.target = nn::dataset_from_json(j.at("target"));
  t.target_classes = get_or<std::vector<int>>(j, "target_classes", {});
  t.skip_rows = get_or<std::size_t>(j, "skip_rows", t.skip_rows);
  t.target_train = get_or<std::size_t>(j, "target_train", t.target_train);
  t.data_ratio = get_or<std::size_t>(j, "data_ratio", t.data_ratio);
  t.scratch = transfer_train_config(j.value("scratch", json::object()));
  t.finetune = transfer_train_config(j.value("finetune", json::object()));
  t.probe_size = get_or<std::size_t>(j, "probe_size", t.probe_size);
  if (t.data_ratio == 0) throw ConfigError("transfer data_ratio must be positive");
  if (t.target_train < t.data_ratio) throw ConfigError("transfer target_train must be at least data_ratio");
  return t;
}

json to_json(const TransferStage& t) {
  return {{"source_run", t.source_run},     {"target", nn::to_json(t.target)},
          {"target_classes", t.target_classes}, {"skip_rows", t.skip_rows},
          {"target_train", t.target_train}, {"data_ratio", t.data_ratio},
          {"scratch", nn::to_json(t.scratch)}, {"finetune", nn::to_json(t.finetune)},
          {"probe_size", t.probe_size}};
}

}  // namespace

PersistMode parse_persist_mode(const std::string& s) {
  if (s == "rips") return PersistMode::kRips;
  if (s == "sublevel") return PersistMode::kSublevel;
  throw ConfigError("unknown persistence mode '" + s + "' (expected rips or sublevel)");
}

std::string to_string(PersistMode m) { return m == PersistMode::kRips ? "rips" : "sublevel"; }

ExperimentConfig experiment_from_json(const json& j) {
  nn::reject_unknown_keys(j,
                          {"name", "seed", "jobs", "arch", "dataset", "train", "sweep", "stages", "homotopy",
                           "persist", "transfer"},
                          "experiment config");
  ExperimentConfig c;
  c.name = get_or<std::string>(j, "name", c.name);
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
  c.jobs = get_or<std::size_t>(j, "jobs", c.jobs);
  if (!j.contains("arch")) throw ConfigError("experiment config needs an arch");
  if (!j.contains("dataset")) throw ConfigError("experiment config needs a dataset");
  try {
    c.arch = nn::arch_from_json(j.at("arch"));
    c.arch.validate();
    c.dataset = nn::dataset_from_json(j.at("dataset"));
    c.dataset.validate();
  } catch (const FormatError& e) {
    throw ConfigError(e.what());
  }

  const json train = j.value("train", json::object());
  if (train.is_array()) {
    if (train.empty()) throw ConfigError("train list is empty");
    for (const auto& t : train) c.train.push_back(t);
  } else {
    c.train.push_back(train);
  }
  for (const auto& t : c.train) nn::train_config_from_json(t).validate();

  c.sweep = j.value("sweep", json::object());
  nn::reject_unknown_keys(c.sweep, {"optimizer", "learning_rate", "batch_size", "epochs", "seed"}, "sweep");
  for (const auto& [key, values] : c.sweep.items())
    if (!values.is_array() || values.empty()) throw ConfigError("sweep '" + key + "' must be a non-empty list");

  if (j.contains("stages")) {
    c.stages = get_or<std::vector<std::string>>(j, "stages", {});
    for (const auto& s : c.stages)
      if (std::find(kStages.begin(), kStages.end(), s) == kStages.end()) throw ConfigError("unknown stage '" + s + "'");
  }
  if (j.contains("homotopy")) c.homotopy = homotopy_from_json(j.at("homotopy"));
  if (j.contains("persist")) c.persist = persist_from_json(j.at("persist"));
  if (j.contains("transfer") && !j.at("transfer").is_null()) c.transfer = transfer_from_json(j.at("transfer"));
  if (std::find(c.stages.begin(), c.stages.end(), "transfer") != c.stages.end() && !c.transfer)
    throw ConfigError("stage 'transfer' needs a transfer section");
  expand_sweep(c);  // validates every element
  return c;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
  json j;
  try {
    j = nn::read_json_file(path);
  } catch (const FormatError& e) {
    throw ConfigError(e.what());
  }
  return experiment_from_json(j);
}

json to_json(const ExperimentConfig& c) {
  json j = {{"name", c.name},
            {"seed", c.seed},
            {"jobs", c.jobs},
            {"arch", nn::to_json(c.arch)},
            {"dataset", nn::to_json(c.dataset)},
            {"train", c.train},
            {"sweep", c.sweep},
            {"stages", c.stages},
            {"homotopy", to_json(c.homotopy)},
            {"persist", to_json(c.persist)}};
  if (c.transfer) j["transfer"] = to_json(*c.transfer);
  return j;
}

std::vector<RunSpec> expand_sweep(const ExperimentConfig& c) {
  std::vector<std::pair<std::string, json>> axes;
  for (const auto& key : kSweepKeys)
    if (c.sweep.contains(key)) axes.emplace_back(key, c.sweep.at(key));

  std::vector<RunSpec> runs;
  for (const auto& base : c.train) {
    std::vector<std::size_t> idx(axes.size(), 0);
    while (true) {
      json element = base;
      for (std::size_t a = 0; a < axes.size(); ++a) element[axes[a].first] = axes[a].second.at(idx[a]);
      auto config = nn::train_config_from_json(element);
      config.seed += c.seed;
      config.validate();
      runs.push_back({fmt::format("run-{:03d}", runs.size()), config});
      std::size_t a = axes.size();
      while (a > 0) {
        --a;
        if (++idx[a] < axes[a].second.size()) break;
        idx[a] = 0;
        if (a == 0) {
          a = axes.size() + 1;
          break;
        }
      }
      if (axes.empty() || a == axes.size() + 1) break;
    }
  }
  return runs;
}

nn::DatasetSpec effective_dataset(const ExperimentConfig& c) {
  auto spec = c.dataset;
  spec.seed += c.seed;
  return spec;
}

}  // namespace losstopo::cli

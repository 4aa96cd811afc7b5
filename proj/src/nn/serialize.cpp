#include "losstopo/nn/serialize.hpp"

#include <algorithm>
#include <fstream>
#include <string>

#include "losstopo/error.hpp"

namespace losstopo::nn {

using nlohmann::json;

void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> allowed, std::string_view where) {
  if (!obj.is_object()) throw ConfigError(std::string(where) + " must be a JSON object");
  for (const auto& [key, _] : obj.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError("unknown key '" + key + "' in " + std::string(where));
}


json to_json(const NetworkArch& arch) {
  return {{"layer_sizes", arch.layer_sizes},
          {"activation", std::string(to_string(arch.activation))},
          {"head", std::string(to_string(arch.head))}};
}

NetworkArch arch_from_json(const json& j) {
  reject_unknown_keys(j, {"layer_sizes", "activation", "head"}, "arch");
  NetworkArch a;
  a.layer_sizes = require<std::vector<std::size_t>>(j, "layer_sizes");
  a.activation = parse_activation(get_or<std::string>(j, "activation", "relu"));
  a.head = parse_output_head(get_or<std::string>(j, "head", "softmax-cross-entropy"));
  a.validate();
  return a;
}

json to_json(const DatasetSpec& spec) {
  json j = {{"kind", std::string(to_string(spec.kind))},
            {"seed", spec.seed},
            {"n_train", spec.n_train},
            {"n_test", spec.n_test},
            {"input_dim", spec.input_dim},
            {"n_classes", spec.n_classes}};
  if (spec.noise) j["noise"] = *spec.noise;
  if (spec.path) j["path"] = *spec.path;
  return j;
}

DatasetSpec dataset_from_json(const json& j) {
  reject_unknown_keys(j, {"kind", "seed", "n_train", "n_test", "input_dim", "n_classes", "noise", "path"}, "dataset");
  DatasetSpec s;
  s.kind = parse_dataset_kind(require<std::string>(j, "kind"));
  s.seed = get_or<std::uint64_t>(j, "seed", s.seed);
  s.n_train = get_or<std::size_t>(j, "n_train", s.n_train);
  s.n_test = get_or<std::size_t>(j, "n_test", s.n_test);
  s.input_dim = get_or<std::size_t>(j, "input_dim", s.input_dim);
  s.n_classes = get_or<std::size_t>(j, "n_classes", s.n_classes);
  if (j.contains("noise") && !j["noise"].is_null()) s.noise = get_or<double>(j, "noise", 0.0);
  if (j.contains("path") && !j["path"].is_null()) s.path = get_or<std::string>(j, "path", "");
  s.validate();
  return s;
}

json to_json(const TrainConfig& c) {
  return {{"optimizer", std::string(to_string(c.optimizer))},
          {"learning_rate", c.learning_rate},
          {"batch_size", c.batch_size},
          {"epochs", c.epochs},
          {"record_every", c.record_every},
          {"seed", c.seed},
          {"damping", c.damping},
          {"frozen_prefix", c.frozen_prefix}};
}

TrainConfig train_config_from_json(const json& j) {
  reject_unknown_keys(j,
                      {"optimizer", "learning_rate", "batch_size", "epochs", "record_every", "seed", "damping",
                       "frozen_prefix"},
                      "train config");
  TrainConfig c;
  c.optimizer = parse_optimizer(get_or<std::string>(j, "optimizer", "sgd"));
  c.learning_rate = get_or<double>(j, "learning_rate", c.learning_rate);
  c.batch_size = get_or<std::size_t>(j, "batch_size", c.batch_size);
  c.epochs = get_or<std::size_t>(j, "epochs", c.epochs);
  c.record_every = get_or<std::size_t>(j, "record_every", c.record_every);
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
  c.damping = get_or<double>(j, "damping", c.damping);
  c.frozen_prefix = get_or<std::size_t>(j, "frozen_prefix", c.frozen_prefix);
  c.validate();
  return c;
}

json to_json(const Trajectory& t) {
  json points = json::array();
  for (const auto& p : t.points) points.push_back(std::vector<double>(p.data(), p.data() + p.size()));
  return {{"arch", to_json(t.arch)},
          {"dataset", t.dataset ? to_json(*t.dataset) : json(nullptr)},
          {"config", t.config ? to_json(*t.config) : json(nullptr)},
          {"points", std::move(points)},
          {"losses", t.losses},
          {"steps", t.steps}};
}

Trajectory trajectory_from_json(const json& j) {
  try {
    reject_unknown_keys(j, {"arch", "dataset", "config", "points", "losses", "steps"}, "trajectory");
    Trajectory t;
    t.arch = arch_from_json(j.at("arch"));
    if (!j.at("dataset").is_null()) t.dataset = dataset_from_json(j.at("dataset"));
    if (!j.at("config").is_null()) t.config = train_config_from_json(j.at("config"));
    for (const auto& p : j.at("points")) {
      const auto v = p.get<std::vector<double>>();
      t.points.push_back(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
    }
    t.losses = j.at("losses").get<std::vector<double>>();
    if (j.contains("steps")) t.steps = j.at("steps").get<std::vector<std::size_t>>();
    t.validate();
    return t;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed trajectory: ") + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(std::string("malformed trajectory: ") + e.what());
  }
}

void save_trajectory(const Trajectory& traj, const std::filesystem::path& path) {
  write_json_file(to_json(traj), path);
}

Trajectory load_trajectory(const std::filesystem::path& path) { return trajectory_from_json(read_json_file(path)); }

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_json_file(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace losstopo::nn

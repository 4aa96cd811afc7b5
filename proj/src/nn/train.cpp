#include "losstopo/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "losstopo/nn/fisher.hpp"
#include "losstopo/nn/network.hpp"

namespace losstopo::nn {

std::string_view to_string(Optimizer o) {
  switch (o) {
    case Optimizer::kSgd:
      return "sgd";
    case Optimizer::kAdam:
      return "adam";
    case Optimizer::kNaturalGradient:
      return "natural-gradient";
  }
  return "?";
}

Optimizer parse_optimizer(std::string_view s) {
  if (s == "sgd") return Optimizer::kSgd;
  if (s == "adam") return Optimizer::kAdam;
  if (s == "natural-gradient") return Optimizer::kNaturalGradient;
  throw ConfigError("unknown optimizer '" + std::string(s) + "'");
}

void TrainConfig::validate() const {
  if (!std::isfinite(learning_rate) || learning_rate < 0) throw ConfigError("learning_rate must be finite and >= 0");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (epochs == 0) throw ConfigError("epochs must be positive");
  if (record_every == 0) throw ConfigError("record_every must be positive");
  if (!std::isfinite(damping) || damping < 0) throw ConfigError("damping must be finite and >= 0");
  if (optimizer == Optimizer::kNaturalGradient && damping <= 0)
    throw ConfigError("natural-gradient optimizer needs damping > 0");
}

void Trajectory::validate() const {
  arch.validate();
  if (points.empty()) throw DimensionError("trajectory has no points");
  if (losses.size() != points.size()) throw DimensionError("trajectory losses and points differ in length");
  if (!steps.empty() && steps.size() != points.size())
    throw DimensionError("trajectory steps and points differ in length");
  const auto p = static_cast<Eigen::Index>(arch.param_count());
  for (const auto& v : points) {
    if (v.size() != p) throw DimensionError("trajectory point does not match " + arch.id());
    if (!v.allFinite()) throw NumericError("trajectory point has non-finite entries");
  }
  for (double l : losses)
    if (!std::isfinite(l)) throw NumericError("trajectory loss is not finite");
}

std::size_t total_steps(const TrainConfig& config, std::size_t n_train) {
  const std::size_t per_epoch = (n_train + config.batch_size - 1) / config.batch_size;
  return per_epoch * config.epochs;
}

namespace {

struct AdamState {
  Eigen::VectorXd m, v;
  std::size_t t = 0;
};

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

}  // namespace

Trajectory train(const NetworkArch& arch, const LabeledData& data, const TrainConfig& config,
                 const ParamVector& theta0, std::optional<DatasetSpec> dataset) {
  arch.validate();
  config.validate();
  if (theta0.arch != arch) throw DimensionError("theta0 parameterizes " + theta0.arch.id() + ", not " + arch.id());
  if (data.empty()) throw DimensionError("empty training data");
  if (config.frozen_prefix > arch.num_affine_layers())
    throw ConfigError("frozen_prefix exceeds the number of layers");
  const std::size_t steps_total = total_steps(config, data.size());
  if (config.record_every > steps_total)
    throw ConfigError("record_every (" + std::to_string(config.record_every) + ") exceeds total steps (" +
                      std::to_string(steps_total) + ")");

  const auto trainable_from = static_cast<Eigen::Index>(arch.layer_offset(config.frozen_prefix));
  const auto p = static_cast<Eigen::Index>(arch.param_count());
  const auto n_trainable = p - trainable_from;

  Trajectory traj;
  traj.arch = arch;
  traj.dataset = std::move(dataset);
  traj.config = config;

  ParamVector theta = theta0;
  Eigen::VectorXd last_valid = theta0.values;
  std::size_t last_valid_step = 0;

  // Partial trajectory ending at the last parameters known to be valid.
  auto diverge = [&](const std::string& why) {
    Trajectory partial = traj;
    if (!partial.steps.empty() && partial.steps.back() != last_valid_step) {
      const double l = loss(ParamVector(arch, last_valid), data);
      if (std::isfinite(l) && l <= kDivergenceLoss) {
        partial.points.push_back(last_valid);
        partial.losses.push_back(l);
        partial.steps.push_back(last_valid_step);
      }
    }
    return DivergenceError(why, std::move(partial));
  };
  auto record = [&](std::size_t step) {
    const double l = loss(theta, data);
    if (!std::isfinite(l) || l > kDivergenceLoss) {
      if (traj.points.empty()) throw NumericError("initial loss is not finite or exceeds the divergence threshold");
      throw diverge("training diverged at step " + std::to_string(step) + " (loss " + std::to_string(l) + ")");
    }
    traj.points.push_back(theta.values);
    traj.losses.push_back(l);
    traj.steps.push_back(step);
  };
  record(0);

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  AdamState adam;
  if (config.optimizer == Optimizer::kAdam) {
    adam.m = Eigen::VectorXd::Zero(n_trainable);
    adam.v = Eigen::VectorXd::Zero(n_trainable);
  }

  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      const auto batch = data.subset(std::span<const std::size_t>(order.data() + start, stop - start));

      Eigen::VectorXd update;
      try {
        Eigen::VectorXd g;
        const double batch_loss = loss_and_grad(theta, batch, g);
        if (batch_loss > kDivergenceLoss) throw NumericError("minibatch loss above divergence threshold");
        const Eigen::VectorXd gs = g.tail(n_trainable);
        switch (config.optimizer) {
          case Optimizer::kSgd:
            update = config.learning_rate * gs;
            break;
          case Optimizer::kAdam: {
            ++adam.t;
            adam.m = kAdamBeta1 * adam.m + (1 - kAdamBeta1) * gs;
            adam.v = kAdamBeta2 * adam.v + (1 - kAdamBeta2) * gs.cwiseAbs2();
            const double c1 = 1 - std::pow(kAdamBeta1, static_cast<double>(adam.t));
            const double c2 = 1 - std::pow(kAdamBeta2, static_cast<double>(adam.t));
            update = config.learning_rate *
                     ((adam.m / c1).array() / ((adam.v / c2).array().sqrt() + kAdamEps)).matrix();
            break;
          }
          case Optimizer::kNaturalGradient: {
            const Eigen::MatrixXd per_ex = per_example_grads(theta, batch).rightCols(n_trainable);
            const double inv_n = 1.0 / static_cast<double>(batch.size());
            auto op = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
              return per_ex.transpose() * (per_ex * v) * inv_n + config.damping * v;
            };
            const auto cap = std::max<std::size_t>(1000, 10 * static_cast<std::size_t>(n_trainable));
            update = config.learning_rate * conjugate_gradient(op, gs, 1e-6, cap).x;
            break;
          }
        }
        if (!update.allFinite()) throw NumericError("non-finite parameter update");
      } catch (const CgError&) {
        throw;
      } catch (const NumericError& e) {
        throw diverge("training diverged at step " + std::to_string(step + 1) + ": " + e.what());
      }
      // The minibatch loss at theta was finite and under the threshold.
      last_valid = theta.values;
      last_valid_step = step;
      theta.values.tail(n_trainable) -= update;
      ++step;
      if (step % config.record_every == 0) record(step);
    }
  }
  if (traj.steps.back() != step) record(step);
  return traj;
}

Trajectory train(const NetworkArch& arch, const DatasetSpec& dataset, const TrainConfig& config,
                 const ParamVector& theta0) {
  const auto data = make_dataset(dataset);
  return train(arch, data.train, config, theta0, dataset);
}

}  // namespace losstopo::nn

#include "losstopo/transfer/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "losstopo/error.hpp"
#include "losstopo/nn/network.hpp"

namespace losstopo::transfer {

std::string_view to_string(MorphismKind k) {
  switch (k) {
    case MorphismKind::kIdentity:
      return "identity";
    case MorphismKind::kCoordinateEmbed:
      return "coordinate-embed";
    case MorphismKind::kLinearResample:
      return "linear-resample";
  }
  return "?";
}

Eigen::MatrixXd DomainMorphism::apply(const Eigen::MatrixXd& x) const {
  if (static_cast<std::size_t>(x.cols()) != target_dim)
    throw DimensionError("morphism expects " + std::to_string(target_dim) + " input columns, got " +
                         std::to_string(x.cols()));
  const auto n = x.rows();
  switch (kind) {
    case MorphismKind::kIdentity:
      return x;
    case MorphismKind::kCoordinateEmbed: {
      Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(source_dim));
      for (std::size_t i = 0; i < coordinates.size(); ++i)
        out.col(static_cast<Eigen::Index>(coordinates[i])) = x.col(static_cast<Eigen::Index>(i));
      return out;
    }
    case MorphismKind::kLinearResample: {
      // Align-corners: source sample j sits at j (t - 1) / (s - 1) in target
      // index coordinates.
      Eigen::MatrixXd out(n, static_cast<Eigen::Index>(source_dim));
      for (std::size_t j = 0; j < source_dim; ++j) {
        const auto col = static_cast<Eigen::Index>(j);
        if (target_dim == 1 || source_dim == 1) {
          out.col(col) = x.col(0);
          continue;
        }
        const double pos = static_cast<double>(j) * static_cast<double>(target_dim - 1) / static_cast<double>(source_dim - 1);
        const auto lo = std::min(static_cast<std::size_t>(std::floor(pos)), target_dim - 2);
        const double frac = pos - static_cast<double>(lo);
        const auto l = static_cast<Eigen::Index>(lo);
        out.col(col) = (1.0 - frac) * x.col(l) + frac * x.col(l + 1);
      }
      return out;
    }
  }
  throw ConfigError("unknown morphism kind");
}

DomainMorphism build_domain_morphism(std::size_t source_dim, std::size_t target_dim) {
  if (source_dim == 0 || target_dim == 0) throw ConfigError("input dimensions must be positive");
  if (target_dim > source_dim)
    throw ConfigError("no domain morphism from a larger target (" + std::to_string(target_dim) +
                      ") to a smaller source (" + std::to_string(source_dim) + ")");
  DomainMorphism m;
  m.source_dim = source_dim;
  m.target_dim = target_dim;
  m.kind = target_dim == source_dim ? MorphismKind::kIdentity : MorphismKind::kLinearResample;
  return m;
}

DomainMorphism build_domain_morphism(const nn::DatasetSpec& source, const nn::DatasetSpec& target) {
  return build_domain_morphism(source.input_dim, target.input_dim);
}

DomainMorphism coordinate_embed(std::size_t source_dim, std::vector<std::size_t> coordinates) {
  if (coordinates.empty()) throw ConfigError("coordinate embedding needs at least one coordinate");
  auto sorted = coordinates;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw ConfigError("coordinate embedding repeats a source coordinate");
  if (sorted.back() >= source_dim) throw ConfigError("coordinate embedding index out of range");
  DomainMorphism m;
  m.kind = MorphismKind::kCoordinateEmbed;
  m.source_dim = source_dim;
  m.target_dim = coordinates.size();
  m.coordinates = std::move(coordinates);
  return m;
}

DomainMorphism compose(const DomainMorphism& outer, const DomainMorphism& inner) {
  if (outer.target_dim != inner.source_dim) throw DimensionError("morphisms are not composable");
  if (outer.kind == MorphismKind::kIdentity) return inner;
  if (inner.kind == MorphismKind::kIdentity) return outer;
  throw ConfigError("composition is only supported with an identity morphism");
}

namespace {

nn::TrainConfig record_ends_only(nn::TrainConfig config, std::size_t n) {
  config.record_every = std::max<std::size_t>(1, nn::total_steps(config, n));
  return config;
}

nn::ParamVector train_to_end(const nn::ParamVector& theta0, const nn::LabeledData& data, const nn::TrainConfig& config) {
  if (config.epochs == 0) return theta0;
  return nn::train(theta0.arch, data, record_ends_only(config, data.size()), theta0).back();
}

}  // namespace

nn::ParamVector pullback_transfer(const nn::ParamVector& source_theta, const DomainMorphism& morphism,
                                  const nn::LabeledData& target_train, const nn::TrainConfig& finetune) {
  const auto& arch = source_theta.arch;
  if (morphism.source_dim != arch.input_dim())
    throw DimensionError("morphism output width does not match the source network input");
  if (finetune.epochs == 0) return source_theta;

  nn::LabeledData mapped = target_train;
  mapped.inputs = morphism.apply(target_train.inputs);
  auto config = finetune;
  config.frozen_prefix = arch.num_affine_layers() - 1;
  return train_to_end(source_theta, mapped, config);
}

FactorizationReport factorization_quality(const Eigen::MatrixXd& r_pull, const Eigen::MatrixXd& r_alt) {
  if (r_pull.rows() != r_alt.rows()) throw DimensionError("representations use different probe counts");
  if (!(r_pull.norm() > 0.0)) throw NumericError("pullback representation is identically zero");
  FactorizationReport report;
  report.pullback_width = static_cast<std::size_t>(r_pull.cols());
  report.alternative_width = static_cast<std::size_t>(r_alt.cols());
  const Eigen::MatrixXd L = r_pull.completeOrthogonalDecomposition().solve(r_alt);
  report.residual_norm = (r_alt - r_pull * L).norm();
  const double scale = r_alt.norm();
  report.quality = scale > 0.0 ? 1.0 - report.residual_norm / scale : 1.0;
  return report;
}

FactorizationReport verify_universal_property(const nn::ParamVector& pullback_theta,
                                              const nn::ParamVector& alternative_theta,
                                              const Eigen::MatrixXd& target_probe, const DomainMorphism& morphism) {
  const auto mapped = morphism.apply(target_probe);
  return factorization_quality(nn::forward(pullback_theta, mapped).penultimate,
                               nn::forward(alternative_theta, mapped).penultimate);
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
  std::string out = "method,test_accuracy,parameters_updated\n";
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g", r.test_accuracy);
    out += r.method + "," + buf + "," + std::to_string(r.parameters_updated) + "\n";
  }
  return out;
}

TransferExperimentResult run_transfer_experiment(const TransferExperimentConfig& config) {
  config.arch.validate();
  if (config.data_ratio == 0) throw ConfigError("data_ratio must be positive");
  if (config.target_train < config.data_ratio) throw ConfigError("target_train is smaller than data_ratio");

  // One draw from the source distribution; the first n_train rows train the
  // source network and the rest feed the target task.
  auto spec = config.source;
  spec.seed = config.seed;
  spec.n_train = config.source.n_train + config.target_train * (spec.n_classes + 1);
  const auto data = nn::make_dataset(spec);
  const auto source_train = data.train.first(config.source.n_train);
  std::vector<std::size_t> rest(data.train.size() - config.source.n_train);
  std::iota(rest.begin(), rest.end(), config.source.n_train);
  const auto target_pool = nn::select_classes(data.train.subset(rest), config.target_classes);
  if (target_pool.size() < config.target_train) throw ConfigError("not enough target examples in the pool");
  const auto target_full = target_pool.first(config.target_train);
  const auto target_small = target_pool.first(config.target_train / config.data_ratio);
  const auto target_test = nn::select_classes(data.test, config.target_classes);

  TransferExperimentResult result;
  const auto theta0 = nn::init_params(config.arch, config.seed);
  auto source_config = config.source_config;
  source_config.seed = config.seed;
  result.source_theta = train_to_end(theta0, source_train, source_config);
  result.source_test_accuracy = nn::accuracy(result.source_theta, data.test);
  static_cast<TransferComparison&>(result) =
      compare_transfer(result.source_theta, theta0, build_domain_morphism(spec.input_dim, spec.input_dim), target_full,
                       target_small, target_test, config.scratch_config, config.finetune_config, config.probe_size,
                       config.seed);
  return result;
}

TransferComparison compare_transfer(const nn::ParamVector& source_theta, const nn::ParamVector& scratch_init,
                                    const DomainMorphism& morphism, const nn::LabeledData& target_full,
                                    const nn::LabeledData& target_small, const nn::LabeledData& target_test,
                                    const nn::TrainConfig& scratch_config, const nn::TrainConfig& finetune_config,
                                    std::size_t probe_size, std::uint64_t seed) {
  if (!(scratch_init.arch == source_theta.arch)) throw DimensionError("scratch and source architectures differ");
  auto seeded = [&](nn::TrainConfig c) {
    c.seed = seed;
    return c;
  };
  auto mapped = [&](const nn::LabeledData& d) {
    nn::LabeledData out = d;
    out.inputs = morphism.apply(d.inputs);
    return out;
  };
  const auto full = mapped(target_full), small = mapped(target_small), test = mapped(target_test);

  TransferComparison result;
  result.pullback_theta = pullback_transfer(source_theta, morphism, target_small, seeded(finetune_config));
  result.scratch_theta = train_to_end(scratch_init, full, seeded(scratch_config));
  auto unfrozen = seeded(finetune_config);
  unfrozen.frozen_prefix = 0;
  result.alternative_theta = train_to_end(source_theta, small, unfrozen);

  result.scratch_examples = target_full.size();
  result.pullback_examples = target_small.size();
  const auto& arch = source_theta.arch;
  const auto all_params = arch.param_count();
  const auto head_params = arch.layer_param_count(arch.num_affine_layers() - 1);
  result.rows = {
      {"scratch", nn::accuracy(result.scratch_theta, test), all_params},
      {"pullback", nn::accuracy(result.pullback_theta, test), head_params},
      {"fine-tune-all", nn::accuracy(result.alternative_theta, test), all_params},
  };
  const auto probe = target_test.sample(probe_size, seed).inputs;
  result.factorization = verify_universal_property(result.pullback_theta, result.alternative_theta, probe, morphism);
  return result;
}

nlohmann::json to_json(const DomainMorphism& m) {
  nlohmann::json j = {{"kind", to_string(m.kind)}, {"source_dim", m.source_dim}, {"target_dim", m.target_dim}};
  if (m.kind == MorphismKind::kCoordinateEmbed) j["coordinates"] = m.coordinates;
  return j;
}

nlohmann::json to_json(const FactorizationReport& r) {
  return {{"quality", r.quality},
          {"residual_norm", r.residual_norm},
          {"pullback_width", r.pullback_width},
          {"alternative_width", r.alternative_width}};
}

}  // namespace losstopo::transfer

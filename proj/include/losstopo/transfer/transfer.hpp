#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "losstopo/nn/arch.hpp"
#include "losstopo/nn/dataset.hpp"
#include "losstopo/nn/train.hpp"

namespace losstopo::transfer {

enum class MorphismKind { kIdentity, kCoordinateEmbed, kLinearResample };

std::string_view to_string(MorphismKind k);

// Map from target inputs (target_dim columns) to source inputs (source_dim
// columns).
struct DomainMorphism {
  MorphismKind kind = MorphismKind::kIdentity;
  std::size_t source_dim = 1;
  std::size_t target_dim = 1;
  // coordinate-embed: target column i goes to source column coordinates[i].
  std::vector<std::size_t> coordinates;

  Eigen::MatrixXd apply(const Eigen::MatrixXd& target_inputs) const;
  bool operator==(const DomainMorphism&) const = default;
};

// Identity when the dims agree, linear-resample when the target is smaller.
DomainMorphism build_domain_morphism(std::size_t source_dim, std::size_t target_dim);
DomainMorphism build_domain_morphism(const nn::DatasetSpec& source, const nn::DatasetSpec& target);

DomainMorphism coordinate_embed(std::size_t source_dim, std::vector<std::size_t> coordinates);

// outer after inner. Supported when either side is an identity.
DomainMorphism compose(const DomainMorphism& outer, const DomainMorphism& inner);

// Fine-tunes only the final affine layer on morphism-mapped target data;
// every other layer is returned bit-identical. Zero epochs returns the
// source parameters unchanged.
nn::ParamVector pullback_transfer(const nn::ParamVector& source_theta, const DomainMorphism& morphism,
                                  const nn::LabeledData& target_train, const nn::TrainConfig& finetune);

struct FactorizationReport {
  double quality = 0.0;  // 1 - ||R_alt - R_pull L||_F / ||R_alt||_F
  double residual_norm = 0.0;
  std::size_t pullback_width = 0;
  std::size_t alternative_width = 0;
};

// Least-squares L with R_pull L ~ R_alt (minimum-norm when R_pull is rank
// deficient).
FactorizationReport factorization_quality(const Eigen::MatrixXd& r_pull, const Eigen::MatrixXd& r_alt);

// Penultimate representations of both networks on the mapped probe.
FactorizationReport verify_universal_property(const nn::ParamVector& pullback_theta,
                                              const nn::ParamVector& alternative_theta,
                                              const Eigen::MatrixXd& target_probe, const DomainMorphism& morphism);

struct ComparisonRow {
  std::string method;
  double test_accuracy = 0.0;
  std::size_t parameters_updated = 0;
};

// "method,test_accuracy,parameters_updated"
std::string comparison_csv(const std::vector<ComparisonRow>& rows);

struct TransferComparison {
  nn::ParamVector pullback_theta;
  nn::ParamVector scratch_theta;
  nn::ParamVector alternative_theta;  // every layer fine-tuned
  std::vector<ComparisonRow> rows;    // scratch, pullback, fine-tune-all
  FactorizationReport factorization;
  std::size_t scratch_examples = 0;
  std::size_t pullback_examples = 0;
};

// Scratch training from `scratch_init` on target_full; pullback and
// fine-tune-all start from source_theta and see target_small. Every config
// has its seed replaced by `seed`. The factorization probe is a seeded
// sample of target_test.
TransferComparison compare_transfer(const nn::ParamVector& source_theta, const nn::ParamVector& scratch_init,
                                    const DomainMorphism& morphism, const nn::LabeledData& target_full,
                                    const nn::LabeledData& target_small, const nn::LabeledData& target_test,
                                    const nn::TrainConfig& scratch_config, const nn::TrainConfig& finetune_config,
                                    std::size_t probe_size, std::uint64_t seed);

// Source network trained on every class of `source`; the target task is
// `target_classes` of the same distribution, relabeled. Scratch training
// sees target_train examples, the pullback and the unfrozen alternative
// see target_train / data_ratio.
struct TransferExperimentConfig {
  nn::NetworkArch arch{{2, 16, 4}, nn::Activation::kRelu, nn::OutputHead::kSoftmaxCrossEntropy};
  nn::DatasetSpec source{nn::DatasetKind::kGaussianBlobs, 0, 4000, 400, 2, 4, std::nullopt, std::nullopt};
  std::vector<int> target_classes{0, 1};
  std::size_t target_train = 100;
  std::size_t data_ratio = 10;
  // record_every is ignored; only the end points are kept.
  nn::TrainConfig source_config{nn::Optimizer::kAdam, 0.01, 32, 20, 1, 0, 0.0, 0};
  nn::TrainConfig scratch_config{nn::Optimizer::kAdam, 0.01, 32, 100, 1, 0, 0.0, 0};
  nn::TrainConfig finetune_config{nn::Optimizer::kAdam, 0.01, 8, 100, 1, 0, 0.0, 0};
  std::size_t probe_size = 256;
  std::uint64_t seed = 0;
};

struct TransferExperimentResult : TransferComparison {
  nn::ParamVector source_theta;
  double source_test_accuracy = 0.0;
};

TransferExperimentResult run_transfer_experiment(const TransferExperimentConfig& config);

nlohmann::json to_json(const DomainMorphism& m);
nlohmann::json to_json(const FactorizationReport& r);

}  // namespace losstopo::transfer

#include "losstopo/cli/commands.hpp"

#include <cmath>
#include <exception>
#include <numeric>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "losstopo/cli/svg.hpp"
#include "losstopo/error.hpp"
#include "losstopo/homotopy/homotopy.hpp"
#include "losstopo/nn/network.hpp"
#include "losstopo/nn/serialize.hpp"
#include "losstopo/parallel.hpp"
#include "losstopo/persistence/gap_model.hpp"
#include "losstopo/persistence/landscape.hpp"
#include "losstopo/persistence/rips.hpp"
#include "losstopo/transfer/transfer.hpp"

namespace losstopo::cli {

using nlohmann::json;
namespace fs = std::filesystem;

void apply_overrides(ExperimentConfig& config, const Overrides& o) {
  if (o.seed) config.seed = *o.seed;
  if (o.jobs) config.jobs = *o.jobs;
  if (o.threshold) {
    if (*o.threshold == "auto") {
      config.homotopy.threshold.reset();
    } else {
      try {
        std::size_t used = 0;
        config.homotopy.threshold = std::stod(*o.threshold, &used);
        if (used != o.threshold->size()) throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        throw ConfigError("--threshold must be a number or 'auto'");
      }
    }
  }
  if (o.radius) {
    if (!(*o.radius >= 0.0)) throw ConfigError("--radius must be non-negative");
    config.persist.radius = *o.radius;
  }
  if (o.samples) {
    if (*o.samples < 2) throw ConfigError("--samples must be at least 2");
    config.persist.samples = *o.samples;
  }
  if (o.landmarks) config.persist.landmarks = *o.landmarks;
  if (o.mode) config.persist.mode = parse_persist_mode(*o.mode);
  if (config.jobs == 0) config.jobs = 1;
}

ExperimentConfig load_saved_config(const fs::path& out) {
  const auto path = out / "config.json";
  if (!fs::exists(path)) throw ConfigError("no saved config at " + path.string() + " (pass --config)");
  return load_experiment(path);
}

namespace {

nn::Dataset manifest_data(const Manifest& m) { return nn::make_dataset(m.dataset); }

std::vector<nn::Trajectory> load_completed(const Manifest& m, const fs::path& out,
                                           std::vector<const RunRecord*>& records) {
  records = m.completed();
  std::vector<nn::Trajectory> trajs;
  for (const auto* r : records) trajs.push_back(nn::load_trajectory(out / r->file));
  return trajs;
}

std::string fmt_double(double v) { return fmt::format("{:.17g}", v); }

}  // namespace

int cmd_train(const ExperimentConfig& config, const fs::path& out) {
  ArtifactWriter writer(out);
  const auto dataset = effective_dataset(config);
  const auto data = nn::make_dataset(dataset);
  const auto runs = expand_sweep(config);
  spdlog::info("training {} runs of {} on {}", runs.size(), config.arch.id(), nn::to_string(dataset.kind));

  struct Outcome {
    nn::Trajectory traj;
    bool diverged = false;
    std::string message;
  };
  std::vector<Outcome> outcomes(runs.size());
  parallel_for(runs.size(), config.jobs, [&](std::size_t i) {
    const auto theta0 = nn::init_params(config.arch, runs[i].config.seed);
    try {
      outcomes[i].traj = nn::train(config.arch, data.train, runs[i].config, theta0, dataset);
    } catch (const nn::DivergenceError& e) {
      outcomes[i].traj = e.partial();
      outcomes[i].diverged = true;
      outcomes[i].message = e.what();
    }
  });

  Manifest manifest{config.name, config.arch, dataset, {}};
  std::size_t diverged = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& o = outcomes[i];
    RunRecord rec;
    rec.id = runs[i].id;
    rec.file = "runs/" + rec.id + ".json";
    rec.config = runs[i].config;
    rec.diverged = o.diverged;
    rec.final_loss = o.traj.losses.back();
    const auto theta = o.traj.back();
    rec.train_accuracy = nn::accuracy(theta, data.train);
    rec.test_accuracy = data.test.size() ? nn::accuracy(theta, data.test) : 0.0;
    writer.json(rec.file, nn::to_json(o.traj));
    if (o.diverged) {
      ++diverged;
      spdlog::error("{} diverged: {}", rec.id, o.message);
    }
    spdlog::debug("{}: loss {:.6g} train {:.4f} test {:.4f}", rec.id, rec.final_loss, rec.train_accuracy,
                  rec.test_accuracy);
    manifest.runs.push_back(std::move(rec));
  }
  writer.json("config.json", to_json(config));
  writer.json("manifest.json", to_json(manifest));
  return diverged ? kExitNumeric : kExitOk;
}

int cmd_homotopy(const ExperimentConfig& config, const fs::path& out) {
  ArtifactWriter writer(out);
  const auto manifest = load_manifest(out);
  std::vector<const RunRecord*> records;
  const auto trajs = load_completed(manifest, out, records);
  if (trajs.empty()) throw ConfigError("manifest has no completed runs");
  for (const auto& t : trajs)
    if (!(t.arch == trajs.front().arch)) throw DimensionError("trajectories mix architectures");

  const auto data = manifest_data(manifest);
  const auto eval = data.train.first(config.homotopy.eval_samples);
  const auto loss = homotopy::network_loss(trajs.front().arch, eval);
  const auto threshold = config.homotopy.threshold ? homotopy::Threshold::fixed(*config.homotopy.threshold)
                                                   : homotopy::Threshold::per_pair_auto();
  spdlog::info("homotopy over {} runs ({} pairs)", trajs.size(), trajs.size() * (trajs.size() - 1) / 2);
  const auto result = homotopy::homotopy_matrix(trajs, threshold, config.homotopy.s_steps, config.homotopy.t_steps,
                                                loss, config.jobs);
  const auto partition = homotopy::partition_classes(result.relation);
  std::vector<double> accuracies;
  for (const auto* r : records) accuracies.push_back(100.0 * r->test_accuracy);
  const auto stats = homotopy::class_statistics(partition, accuracies);

  std::vector<std::string> ids;
  for (const auto* r : records) ids.push_back(r->id);
  std::string csv = "run";
  for (const auto& id : ids) csv += "," + id;
  csv += "\n";
  for (Eigen::Index i = 0; i < result.relation.rows(); ++i) {
    csv += ids[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < result.relation.cols(); ++j) csv += result.relation(i, j) ? ",1" : ",0";
    csv += "\n";
  }
  writer.text("homotopy/relation.csv", csv);

  json classes = json::array();
  for (const auto& cls : partition.classes) {
    json members = json::array();
    for (auto m : cls) members.push_back(ids[m]);
    classes.push_back(members);
  }
  writer.json("homotopy/partition.json", {{"runs", ids}, {"classes", classes}, {"class_count", classes.size()}});

  json s = homotopy::to_json(stats);
  s["test_accuracy_percent"] = accuracies;
  s["threshold"] = config.homotopy.threshold ? json(*config.homotopy.threshold) : json("auto");
  writer.json("homotopy/stats.json", s);

  json pairs = json::array();
  for (const auto& [ij, report] : result.pairs) {
    auto r = homotopy::to_json(report);
    r["a"] = ids[ij.first];
    r["b"] = ids[ij.second];
    pairs.push_back(r);
  }
  writer.json("homotopy/pairs.json", pairs);
  writer.text("homotopy/relation.svg",
              heatmap_svg(result.relation.cast<double>(), ids, "Homotopy relation (dark = homotopic)"));
  spdlog::info("{} homotopy classes", partition.classes.size());
  return kExitOk;
}

namespace {

persistence::PersistenceDiagram diagram_for(const persistence::LandscapeSample& sample, const PersistStage& p,
                                            std::size_t jobs) {
  if (p.mode == PersistMode::kSublevel) return persistence::sublevel_persistence_0d(sample, p.k_neighbors, jobs);
  const auto lm = persistence::maxmin_landmarks(sample.offsets, p.landmarks);
  return persistence::rips_persistence(persistence::select_rows(sample.offsets, lm), p.max_dim,
                                       p.max_edge.value_or(persistence::kInfinity));
}

json prediction_json(double total) {
  const persistence::GapModel defaults;
  const double predicted = persistence::predict_gap(defaults, total);
  json j = {{"total_persistence", total}, {"predicted_gap_default_model", predicted}, {"alpha", defaults.alpha},
            {"beta", defaults.beta}};
  if (predicted < 0.0) {
    j["warning"] = "default gap model predicts a negative gap";
    spdlog::warn("default gap model predicts a negative gap ({:.4g}) for total persistence {:.4g}", predicted, total);
  }
  return j;
}

int persist_points(const PersistStage& p, const fs::path& out, const fs::path& points_file, std::size_t jobs) {
  ArtifactWriter writer(out);
  const auto pts = read_points_csv(points_file);
  persistence::PersistenceDiagram dgm;
  if (p.mode == PersistMode::kSublevel) {
    if (pts.cols() < 2) throw ConfigError("sublevel points file needs coordinates plus a loss column");
    persistence::LandscapeSample sample;
    sample.offsets = pts.leftCols(pts.cols() - 1);
    sample.losses = pts.col(pts.cols() - 1);
    sample.center = Eigen::VectorXd::Zero(sample.offsets.cols());
    sample.flagged.assign(static_cast<std::size_t>(pts.rows()), false);
    dgm = persistence::sublevel_persistence_0d(sample, p.k_neighbors, jobs);
  } else {
    const auto lm = persistence::maxmin_landmarks(pts, p.landmarks);
    dgm = persistence::rips_persistence(persistence::select_rows(pts, lm), p.max_dim,
                                        p.max_edge.value_or(persistence::kInfinity));
  }
  const auto stem = points_file.stem().string();
  writer.text("persistence/" + stem + ".csv", persistence::to_csv(dgm));
  writer.text("persistence/" + stem + ".svg", diagram_svg(dgm, "Persistence diagram: " + stem));
  auto j = prediction_json(persistence::total_persistence(dgm));
  j["mode"] = to_string(p.mode);
  j["points"] = pts.rows();
  j["essential_classes"] = dgm.essential_count();
  j["h2_requested"] = dgm.h2_requested;
  writer.json("persistence/" + stem + ".json", j);
  return kExitOk;
}

}  // namespace

int cmd_persist(const ExperimentConfig& config, const fs::path& out, const std::optional<fs::path>& points_file) {
  const auto& p = config.persist;
  if (points_file) return persist_points(p, out, *points_file, config.jobs);

  ArtifactWriter writer(out);
  const auto manifest = load_manifest(out);
  std::vector<const RunRecord*> records;
  const auto trajs = load_completed(manifest, out, records);
  if (trajs.empty()) throw ConfigError("manifest has no completed runs");
  const auto data = manifest_data(manifest);
  const auto eval = data.train.first(p.eval_samples);

  json runs = json::array();
  std::vector<double> pers, gaps;
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    const auto& t = trajs[i];
    const auto loss = homotopy::network_loss(t.arch, eval);
    const auto sample = persistence::sample_landscape(t.points.back(), p.radius, p.samples, p.sample_seed, loss, config.jobs);
    const auto dgm = diagram_for(sample, p, config.jobs);
    const double total = persistence::total_persistence(dgm);
    const double gap = 100.0 * (records[i]->train_accuracy - records[i]->test_accuracy);
    const auto& id = records[i]->id;
    writer.text("persistence/" + id + ".csv", persistence::to_csv(dgm));
    writer.text("persistence/" + id + ".svg", diagram_svg(dgm, "Persistence diagram: " + id));
    auto j = prediction_json(total);
    j["id"] = id;
    j["gap_percent"] = gap;
    j["train_accuracy"] = records[i]->train_accuracy;
    j["test_accuracy"] = records[i]->test_accuracy;
    j["flagged_samples"] = sample.flagged_count();
    j["diagram_points"] = dgm.points.size();
    runs.push_back(j);
    pers.push_back(total);
    gaps.push_back(gap);
    spdlog::debug("{}: total persistence {:.6g}, gap {:.3g}", id, total, gap);
  }
  writer.json("persistence/summary.json", {{"mode", to_string(p.mode)},
                                           {"radius", p.radius},
                                           {"samples", p.samples},
                                           {"runs", runs}});

  json fit;
  try {
    const auto model = persistence::fit_gap_model(pers, gaps);
    fit = {{"alpha", model.alpha}, {"beta", model.beta}, {"r_squared", *model.r_squared}, {"n", pers.size()}};
    ScatterPlot plot{"Generalization gap vs total persistence", "total persistence", "gap (%)", pers, gaps,
                     Line{-model.alpha, model.beta}, false};
    writer.text("persistence/gap.svg", scatter_svg(plot));
    spdlog::info("gap fit: alpha {:.6g}, beta {:.6g}, R^2 {:.4f}", model.alpha, model.beta, *model.r_squared);
  } catch (const Error& e) {
    fit = {{"error", e.what()}, {"n", pers.size()}};
    spdlog::warn("gap model not fitted: {}", e.what());
  }
  writer.json("persistence/gap_fit.json", fit);
  return kExitOk;
}

int cmd_transfer(const ExperimentConfig& config, const fs::path& out) {
  if (!config.transfer) throw ConfigError("config has no transfer section");
  const auto& t = *config.transfer;
  ArtifactWriter writer(out);
  const auto manifest = load_manifest(out);
  if (t.source_run >= manifest.runs.size()) throw ConfigError("transfer source_run is out of range");
  const auto& src = manifest.runs[t.source_run];
  if (src.diverged) throw NumericError("transfer source run diverged");
  const auto source = nn::load_trajectory(out / src.file);
  const auto source_theta = source.back();

  auto target_spec = t.target;
  target_spec.seed += config.seed;
  const auto morphism = transfer::build_domain_morphism(source.arch.input_dim(), target_spec.input_dim);
  const auto target = nn::make_dataset(target_spec);
  if (t.skip_rows >= target.train.size()) throw ConfigError("transfer skip_rows leaves no target rows");
  std::vector<std::size_t> rows(target.train.size() - t.skip_rows);
  std::iota(rows.begin(), rows.end(), t.skip_rows);
  auto pool = target.train.subset(rows);
  auto test = target.test;
  if (!t.target_classes.empty()) {
    pool = nn::select_classes(pool, t.target_classes);
    test = nn::select_classes(test, t.target_classes);
  }
  if (pool.size() < t.target_train) throw ConfigError("not enough target rows for target_train");
  const auto full = pool.first(t.target_train);
  const auto small = pool.first(t.target_train / t.data_ratio);

  const auto seed = src.config.seed;
  const auto cmp = transfer::compare_transfer(source_theta, nn::init_params(source.arch, seed), morphism, full, small,
                                              test, t.scratch, t.finetune, t.probe_size, seed);
  writer.text("transfer/comparison.csv", transfer::comparison_csv(cmp.rows));
  auto fj = transfer::to_json(cmp.factorization);
  fj["morphism"] = transfer::to_json(morphism);
  fj["scratch_examples"] = cmp.scratch_examples;
  fj["pullback_examples"] = cmp.pullback_examples;
  fj["source_run"] = src.id;
  writer.json("transfer/factorization.json", fj);
  const std::vector<double> values(cmp.pullback_theta.values.data(),
                                   cmp.pullback_theta.values.data() + cmp.pullback_theta.values.size());
  writer.json("transfer/pullback.json", {{"arch", nn::to_json(cmp.pullback_theta.arch)}, {"values", values}});
  spdlog::info("transfer: scratch {:.4f}, pullback {:.4f}, fine-tune-all {:.4f}, factorization {:.4f}",
               cmp.rows[0].test_accuracy, cmp.rows[1].test_accuracy, cmp.rows[2].test_accuracy,
               cmp.factorization.quality);
  return kExitOk;
}

int run_pipeline(const ExperimentConfig& config, const fs::path& out) {
  for (const auto& stage : config.stages) {
    spdlog::info("stage {}", stage);
    int code = kExitOk;
    if (stage == "train") code = cmd_train(config, out);
    else if (stage == "homotopy") code = cmd_homotopy(config, out);
    else if (stage == "persist") code = cmd_persist(config, out);
    else if (stage == "transfer") code = cmd_transfer(config, out);
    else if (stage == "report") code = cmd_report(out);
    if (code != kExitOk) return code;
  }
  return kExitOk;
}

int exit_code_for_current_exception() {
  try {
    throw;
  } catch (const ConfigError& e) {
    spdlog::error("{}", e.what());
    return kExitConfig;
  } catch (const DimensionError& e) {
    spdlog::error("{}", e.what());
    return kExitConfig;
  } catch (const FormatError& e) {
    spdlog::error("{}", e.what());
    return kExitConfig;
  } catch (const NumericError& e) {
    spdlog::error("{}", e.what());
    return kExitNumeric;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitFailure;
  }
}

}  // namespace losstopo::cli

#include "losstopo/category/category.hpp"

#include <algorithm>
#include <cmath>

#include "losstopo/error.hpp"
#include "losstopo/nn/network.hpp"

namespace losstopo::category {

bool ParamObject::operator==(const ParamObject& other) const {
  return theta == other.theta && dataset == other.dataset && head() == other.head();
}

ParamObject make_object(const nn::ParamVector& theta, const nn::LabeledData& train,
                        std::optional<nn::DatasetSpec> dataset) {
  return {theta, std::move(dataset), nn::loss(theta, train)};
}

nn::Trajectory compose_trajectories(const nn::Trajectory& g1, const nn::Trajectory& g2, double tolerance) {
  if (g1.arch != g2.arch) throw DimensionError("cannot compose trajectories over " + g1.arch.id() + " and " + g2.arch.id());
  if (g1.dataset != g2.dataset) throw DimensionError("cannot compose trajectories over different datasets");
  if (g1.points.empty() || g2.points.empty()) throw DimensionError("cannot compose an empty trajectory");
  const double gap = nn::max_abs_diff(g1.points.back(), g2.points.front());
  if (gap > tolerance)
    throw DimensionError("trajectories are not composable: endpoint mismatch " + std::to_string(gap));

  nn::Trajectory out = g1;
  if (g1.config != g2.config) out.config.reset();
  out.points.insert(out.points.end(), g2.points.begin() + 1, g2.points.end());
  out.losses.insert(out.losses.end(), g2.losses.begin() + 1, g2.losses.end());
  if (!g1.steps.empty() && g2.steps.size() == g2.points.size()) {
    const std::size_t shift = g1.steps.back();
    for (std::size_t i = 1; i < g2.steps.size(); ++i) out.steps.push_back(shift + g2.steps[i] - g2.steps.front());
  } else {
    out.steps.clear();
  }
  return out;
}

nn::Trajectory identity_trajectory(const ParamObject& obj, std::size_t length) {
  if (length == 0) throw DimensionError("identity trajectory needs length >= 1");
  nn::Trajectory t;
  t.arch = obj.theta.arch;
  t.dataset = obj.dataset;
  t.points.assign(length, obj.theta.values);
  t.losses.assign(length, obj.loss);
  t.steps.assign(length, 0);
  return t;
}

RepresentationPath apply_functor(const nn::Trajectory& gamma, const Eigen::MatrixXd& probe,
                                 const std::string& probe_id) {
  if (probe.rows() == 0) throw DimensionError("empty probe set");
  RepresentationPath path;
  path.probe_id = probe_id;
  path.snapshots.reserve(gamma.size());
  for (std::size_t i = 0; i < gamma.size(); ++i)
    path.snapshots.push_back({nn::forward(gamma.point(i), probe).penultimate, probe_id, i});
  return path;
}

RepresentationPath concatenate(const RepresentationPath& p1, const RepresentationPath& p2) {
  if (p1.probe_id != p2.probe_id) throw DimensionError("representation paths use different probe sets");
  RepresentationPath out = p1;
  if (!p2.snapshots.empty()) out.snapshots.insert(out.snapshots.end(), p2.snapshots.begin() + 1, p2.snapshots.end());
  return out;
}

FunctorialityReport verify_functoriality(const nn::Trajectory& g1, const nn::Trajectory& g2,
                                         const Eigen::MatrixXd& probe) {
  const auto composed = apply_functor(compose_trajectories(g1, g2), probe);
  const auto sequential = concatenate(apply_functor(g1, probe), apply_functor(g2, probe));
  if (composed.size() != sequential.size()) throw DimensionError("functor images differ in length");
  FunctorialityReport r;
  for (std::size_t i = 0; i < composed.size(); ++i) {
    const auto& a = composed.snapshots[i].matrix;
    const auto& b = sequential.snapshots[i].matrix;
    if (a.size() > 0) r.max_deviation = std::max(r.max_deviation, (a - b).cwiseAbs().maxCoeff());
  }
  r.passes = r.max_deviation < kFunctorialityTolerance;
  return r;
}

double max_distance_distortion(const RepresentationPath& path) {
  auto distances = [](const Eigen::MatrixXd& m) {
    const auto n = m.rows();
    Eigen::MatrixXd d(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) d(i, j) = (m.row(i) - m.row(j)).norm();
    return d;
  };
  double worst = 0.0;
  for (std::size_t k = 1; k < path.size(); ++k) {
    const auto a = distances(path.snapshots[k - 1].matrix);
    const auto b = distances(path.snapshots[k].matrix);
    if (a.size() > 0) worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
  }
  return worst;
}

nn::ParamVector fedavg_colimit(std::span<const nn::ParamVector> thetas) {
  if (thetas.empty()) throw DimensionError("fedavg needs at least one parameter vector");
  const auto& arch = thetas.front().arch;
  for (const auto& t : thetas)
    if (t.arch != arch) throw DimensionError("fedavg over mixed architectures");
  const auto p = thetas.front().values.size();
  const auto n = static_cast<double>(thetas.size());
  Eigen::VectorXd mean(p);
  std::vector<double> column(thetas.size());
  for (Eigen::Index c = 0; c < p; ++c) {
    for (std::size_t i = 0; i < thetas.size(); ++i) column[i] = thetas[i].values[c];
    std::sort(column.begin(), column.end());
    double acc = 0.0;
    for (double v : column) acc += v - column.front();
    mean[c] = column.front() + acc / n;
  }
  return nn::ParamVector(arch, std::move(mean));
}

nlohmann::json to_json(const RepresentationPath& path) {
  nlohmann::json snaps = nlohmann::json::array();
  for (const auto& s : path.snapshots) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < s.matrix.rows(); ++i) {
      const Eigen::RowVectorXd r = s.matrix.row(i);
      rows.push_back(std::vector<double>(r.data(), r.data() + r.size()));
    }
    snaps.push_back(std::move(rows));
  }
  return {{"probe_id", path.probe_id}, {"snapshots", std::move(snaps)}};
}

RepresentationPath representation_path_from_json(const nlohmann::json& j) {
  try {
    RepresentationPath path;
    path.probe_id = j.at("probe_id").get<std::string>();
    std::size_t index = 0;
    for (const auto& snap : j.at("snapshots")) {
      const auto rows = snap.get<std::vector<std::vector<double>>>();
      Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                        rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (static_cast<Eigen::Index>(rows[i].size()) != m.cols()) throw FormatError("ragged snapshot matrix");
        for (std::size_t c = 0; c < rows[i].size(); ++c)
          m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
      }
      path.snapshots.push_back({std::move(m), path.probe_id, index++});
    }
    return path;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed representation path: ") + e.what());
  }
}

}  // namespace losstopo::category

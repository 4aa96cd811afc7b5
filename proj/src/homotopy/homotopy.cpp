#include "losstopo/homotopy/homotopy.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <memory>

#include "losstopo/error.hpp"
#include "losstopo/nn/network.hpp"
#include "losstopo/parallel.hpp"

namespace losstopo::homotopy {

LossFn network_loss(const nn::NetworkArch& arch, nn::LabeledData batch) {
  auto shared = std::make_shared<const nn::LabeledData>(std::move(batch));
  return [arch, shared](const Eigen::VectorXd& theta) {
    try {
      return nn::loss(nn::ParamVector(arch, theta), *shared);
    } catch (const NumericError&) {
      return std::numeric_limits<double>::infinity();
    }
  };
}

namespace {

// Cumulative arc length and the interpolation position (segment, fraction)
// of each of n uniformly spaced targets.
struct ArcPositions {
  std::vector<std::size_t> segment;
  std::vector<double> fraction;
  bool degenerate = false;
};

ArcPositions arc_positions(std::span<const Eigen::VectorXd> points, std::size_t n) {
  if (n < 2) throw DimensionError("resampling needs n >= 2");
  if (points.size() < 2) throw DimensionError("resampling needs a path with >= 2 points");
  std::vector<double> cum(points.size(), 0.0);
  for (std::size_t k = 1; k < points.size(); ++k) cum[k] = cum[k - 1] + (points[k] - points[k - 1]).norm();
  ArcPositions pos;
  const double total = cum.back();
  if (total == 0.0) {
    pos.degenerate = true;
    return pos;
  }
  std::size_t k = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const double u = total * static_cast<double>(j) / static_cast<double>(n - 1);
    while (k + 2 < points.size() && cum[k + 1] < u) ++k;
    // Skip zero-length segments so the fraction is well defined.
    while (k + 2 < points.size() && cum[k + 1] == cum[k]) ++k;
    const double len = cum[k + 1] - cum[k];
    pos.segment.push_back(k);
    pos.fraction.push_back(len > 0 ? std::clamp((u - cum[k]) / len, 0.0, 1.0) : 0.0);
  }
  return pos;
}

}  // namespace

std::vector<Eigen::VectorXd> resample_path(std::span<const Eigen::VectorXd> points, std::size_t n) {
  const auto pos = arc_positions(points, n);
  if (pos.degenerate) return std::vector<Eigen::VectorXd>(n, points.front());
  std::vector<Eigen::VectorXd> out;
  out.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto k = pos.segment[j];
    const double f = pos.fraction[j];
    out.push_back((1.0 - f) * points[k] + f * points[k + 1]);
  }
  out.front() = points.front();
  out.back() = points.back();
  return out;
}

nn::Trajectory resample_trajectory(const nn::Trajectory& gamma, std::size_t n) {
  gamma.validate();
  nn::Trajectory out;
  out.arch = gamma.arch;
  out.dataset = gamma.dataset;
  out.config = gamma.config;
  out.points = resample_path(gamma.points, n);
  const auto pos = arc_positions(gamma.points, n);
  if (pos.degenerate) {
    out.losses.assign(n, gamma.losses.front());
  } else {
    for (std::size_t j = 0; j < n; ++j) {
      const auto k = pos.segment[j];
      const double f = pos.fraction[j];
      out.losses.push_back((1.0 - f) * gamma.losses[k] + f * gamma.losses[k + 1]);
    }
    out.losses.front() = gamma.losses.front();
    out.losses.back() = gamma.losses.back();
  }
  return out;
}

HomotopyGrid build_grid(std::span<const Eigen::VectorXd> path0, std::span<const Eigen::VectorXd> path1,
                        std::size_t t_steps, const LossFn& loss) {
  if (path0.size() != path1.size()) throw DimensionError("homotopy grid needs equally sampled paths");
  if (path0.empty()) throw DimensionError("homotopy grid needs non-empty paths");
  if (t_steps < 2) throw DimensionError("homotopy grid needs t_steps >= 2");
  HomotopyGrid grid;
  grid.s_steps = path0.size();
  grid.t_steps = t_steps;
  grid.params.reserve(grid.s_steps * t_steps);
  grid.losses.resize(static_cast<Eigen::Index>(grid.s_steps), static_cast<Eigen::Index>(t_steps));
  for (std::size_t s = 0; s < grid.s_steps; ++s) {
    if (path0[s].size() != path1[s].size()) throw DimensionError("homotopy grid paths differ in dimension");
    for (std::size_t ti = 0; ti < t_steps; ++ti) {
      Eigen::VectorXd theta;
      if (ti == 0) {
        theta = path0[s];
      } else if (ti + 1 == t_steps) {
        theta = path1[s];
      } else {
        const double t = static_cast<double>(ti) / static_cast<double>(t_steps - 1);
        theta = (1.0 - t) * path0[s] + t * path1[s];
      }
      grid.losses(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(ti)) = loss(theta);
      grid.params.push_back(std::move(theta));
    }
  }
  return grid;
}

BarrierReport scan_grid(const HomotopyGrid& grid, double threshold) {
  BarrierReport r;
  r.threshold = threshold;
  r.max_loss = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < grid.s_steps; ++s) {
    for (std::size_t t = 0; t < grid.t_steps; ++t) {
      double v = grid.losses(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t));
      if (!std::isfinite(v)) v = std::numeric_limits<double>::infinity();
      r.max_loss = std::max(r.max_loss, v);
      if (!(v <= threshold) && !r.barrier_location) r.barrier_location = std::make_pair(s, t);
    }
  }
  r.homotopic = !r.barrier_location.has_value();
  return r;
}

namespace {

void check_compatible(const nn::Trajectory& g0, const nn::Trajectory& g1) {
  if (g0.arch != g1.arch) throw DimensionError("homotopy between different architectures");
  if (g0.dataset != g1.dataset) throw DimensionError("homotopy between trajectories on different datasets");
}

}  // namespace

BarrierReport are_homotopic(const nn::Trajectory& g0, const nn::Trajectory& g1, double threshold,
                            std::size_t s_steps, std::size_t t_steps, const LossFn& loss) {
  check_compatible(g0, g1);
  const auto p0 = resample_path(g0.points, s_steps);
  const auto p1 = resample_path(g1.points, s_steps);
  auto report = scan_grid(build_grid(p0, p1, t_steps, loss), threshold);
  report.endpoint_gap = std::max(nn::max_abs_diff(p0.front(), p1.front()), nn::max_abs_diff(p0.back(), p1.back()));
  report.endpoints_differ = report.endpoint_gap > kEndpointTolerance;
  return report;
}

double auto_threshold(const nn::Trajectory& g0, const nn::Trajectory& g1, const LossFn& loss) {
  const double m = std::max({loss(g0.points.front()), loss(g0.points.back()), loss(g1.points.front()),
                             loss(g1.points.back())});
  return 1.5 * m;
}

HomotopyMatrixResult homotopy_matrix(std::span<const nn::Trajectory> trajs, Threshold threshold,
                                     std::size_t s_steps, std::size_t t_steps, const LossFn& loss,
                                     std::size_t jobs) {
  if (trajs.empty()) throw DimensionError("homotopy matrix needs at least one trajectory");
  for (const auto& t : trajs) check_compatible(trajs.front(), t);
  const auto n = trajs.size();

  // Resample once per trajectory rather than once per pair.
  std::vector<std::vector<Eigen::VectorXd>> resampled(n);
  parallel_for(n, jobs, [&](std::size_t i) { resampled[i] = resample_path(trajs[i].points, s_steps); });

  HomotopyMatrixResult result;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) result.pairs.push_back({{i, j}, {}});

  parallel_for(result.pairs.size(), jobs, [&](std::size_t k) {
    const auto [i, j] = result.pairs[k].first;
    const double tau = threshold.automatic ? auto_threshold(trajs[i], trajs[j], loss) : threshold.value;
    auto report = scan_grid(build_grid(resampled[i], resampled[j], t_steps, loss), tau);
    report.endpoint_gap = std::max(nn::max_abs_diff(resampled[i].front(), resampled[j].front()),
                                   nn::max_abs_diff(resampled[i].back(), resampled[j].back()));
    report.endpoints_differ = report.endpoint_gap > kEndpointTolerance;
    result.pairs[k].second = report;
  });

  result.relation = RelationMatrix::Constant(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n), false);
  for (std::size_t i = 0; i < n; ++i) result.relation(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = true;
  for (const auto& [ij, report] : result.pairs) {
    const auto i = static_cast<Eigen::Index>(ij.first), j = static_cast<Eigen::Index>(ij.second);
    result.relation(i, j) = result.relation(j, i) = report.homotopic;
  }
  return result;
}

HomotopyClassPartition partition_classes(const RelationMatrix& relation) {
  const auto n = relation.rows();
  if (relation.cols() != n) throw DimensionError("relation matrix must be square");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!relation(i, i)) throw DimensionError("relation matrix diagonal must be true");
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (relation(i, j) != relation(j, i)) throw DimensionError("relation matrix is not symmetric");
  }
  HomotopyClassPartition p;
  p.relation = relation;
  std::vector<bool> visited(static_cast<std::size_t>(n), false);
  for (Eigen::Index start = 0; start < n; ++start) {
    if (visited[static_cast<std::size_t>(start)]) continue;
    std::vector<std::size_t> members;
    std::deque<Eigen::Index> queue{start};
    visited[static_cast<std::size_t>(start)] = true;
    while (!queue.empty()) {
      const auto cur = queue.front();
      queue.pop_front();
      members.push_back(static_cast<std::size_t>(cur));
      for (Eigen::Index j = 0; j < n; ++j) {
        if (relation(cur, j) && !visited[static_cast<std::size_t>(j)]) {
          visited[static_cast<std::size_t>(j)] = true;
          queue.push_back(j);
        }
      }
    }
    std::sort(members.begin(), members.end());
    p.classes.push_back(std::move(members));
  }
  return p;
}

ClassStatistics class_statistics(const HomotopyClassPartition& partition, std::span<const double> accuracies) {
  std::size_t total = 0;
  for (const auto& c : partition.classes) total += c.size();
  if (total != accuracies.size())
    throw DimensionError("accuracy list has " + std::to_string(accuracies.size()) + " entries for " +
                         std::to_string(total) + " trajectories");
  ClassStatistics stats;
  double lo_mean = std::numeric_limits<double>::infinity(), hi_mean = -lo_mean;
  for (const auto& members : partition.classes) {
    ClassSummary c;
    c.size = members.size();
    c.min = std::numeric_limits<double>::infinity();
    c.max = -c.min;
    for (auto m : members) {
      const double a = accuracies[m];
      c.mean += a;
      c.min = std::min(c.min, a);
      c.max = std::max(c.max, a);
    }
    c.mean /= static_cast<double>(c.size);
    if (c.size > 1) {
      double ss = 0.0;
      for (auto m : members) ss += (accuracies[m] - c.mean) * (accuracies[m] - c.mean);
      c.stddev = std::sqrt(ss / static_cast<double>(c.size - 1));
    }
    stats.within_class_max_spread = std::max(stats.within_class_max_spread, c.max - c.min);
    lo_mean = std::min(lo_mean, c.mean);
    hi_mean = std::max(hi_mean, c.mean);
    stats.classes.push_back(c);
  }
  if (!stats.classes.empty()) stats.between_class_mean_gap = hi_mean - lo_mean;
  return stats;
}

nlohmann::json to_json(const BarrierReport& r) {
  nlohmann::json j = {{"homotopic", r.homotopic},
                      {"max_loss", std::isfinite(r.max_loss) ? nlohmann::json(r.max_loss) : nlohmann::json("inf")},
                      {"threshold", r.threshold},
                      {"endpoints_differ", r.endpoints_differ},
                      {"endpoint_gap", r.endpoint_gap}};
  if (r.barrier_location)
    j["barrier_location"] = {r.barrier_location->first, r.barrier_location->second};
  else
    j["barrier_location"] = nullptr;
  return j;
}

nlohmann::json to_json(const HomotopyClassPartition& p) {
  return {{"n_classes", p.classes.size()}, {"classes", p.classes}};
}

nlohmann::json to_json(const ClassStatistics& s) {
  nlohmann::json classes = nlohmann::json::array();
  for (const auto& c : s.classes)
    classes.push_back({{"size", c.size}, {"mean", c.mean}, {"stddev", c.stddev}, {"min", c.min}, {"max", c.max}});
  return {{"classes", std::move(classes)},
          {"within_class_max_spread", s.within_class_max_spread},
          {"between_class_mean_gap", s.between_class_mean_gap}};
}

}  // namespace losstopo::homotopy

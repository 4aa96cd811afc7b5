#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "../common/fixtures.hpp"
#include "helpers.hpp"
#include "losstopo/error.hpp"
#include "losstopo/persistence/diagram.hpp"
#include "losstopo/persistence/gap_model.hpp"
#include "losstopo/persistence/landscape.hpp"
#include "losstopo/persistence/rips.hpp"

using namespace losstopo;
using namespace losstopo::persistence;

namespace {

std::vector<double> finite_deaths(const PersistenceDiagram& d, int dim) {
  std::vector<double> out;
  for (const auto& p : d.in_dimension(dim))
    if (!p.essential()) out.push_back(p.death);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> h1_persistences(const PersistenceDiagram& d) {
  std::vector<double> out;
  for (const auto& p : d.in_dimension(1)) out.push_back(p.persistence());
  std::sort(out.rbegin(), out.rend());
  return out;
}

// Brute-force H1 rank check: Betti numbers of the Rips complex at scale r,
// by Gaussian elimination over Z/2 of the full boundary matrices.
int rank_mod2(std::vector<std::vector<char>> m) {
  int rank = 0;
  const std::size_t rows = m.size(), cols = rows ? m[0].size() : 0;
  for (std::size_t c = 0; c < cols && rank < static_cast<int>(rows); ++c) {
    std::size_t pivot = static_cast<std::size_t>(rank);
    while (pivot < rows && !m[pivot][c]) ++pivot;
    if (pivot == rows) continue;
    std::swap(m[pivot], m[static_cast<std::size_t>(rank)]);
    for (std::size_t r = 0; r < rows; ++r)
      if (r != static_cast<std::size_t>(rank) && m[r][c])
        for (std::size_t k = 0; k < cols; ++k) m[r][k] ^= m[static_cast<std::size_t>(rank)][k];
    ++rank;
  }
  return rank;
}

int betti1_at(const Eigen::MatrixXd& pts, double r) {
  const auto n = static_cast<std::size_t>(pts.rows());
  auto d = [&](std::size_t a, std::size_t b) { return (pts.row(static_cast<Eigen::Index>(a)) - pts.row(static_cast<Eigen::Index>(b))).norm(); };
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (d(i, j) <= r) edges.emplace_back(i, j);
  std::vector<std::array<std::size_t, 3>> tris;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k)
        if (d(i, j) <= r && d(i, k) <= r && d(j, k) <= r) tris.push_back({i, j, k});
  std::vector<std::vector<char>> d1(n, std::vector<char>(edges.size(), 0));
  for (std::size_t e = 0; e < edges.size(); ++e) d1[edges[e].first][e] = d1[edges[e].second][e] = 1;
  std::vector<std::vector<char>> d2(edges.size(), std::vector<char>(tris.size(), 0));
  for (std::size_t t = 0; t < tris.size(); ++t) {
    auto [a, b, c] = tris[t];
    for (auto pr : {std::pair{a, b}, std::pair{a, c}, std::pair{b, c}}) {
      auto it = std::find(edges.begin(), edges.end(), pr);
      d2[static_cast<std::size_t>(it - edges.begin())][t] = 1;
    }
  }
  const int r1 = edges.empty() ? 0 : rank_mod2(d1);
  const int r2 = tris.empty() ? 0 : rank_mod2(d2);
  return static_cast<int>(edges.size()) - r1 - r2;
}

int h1_alive_at(const PersistenceDiagram& d, double r) {
  int c = 0;
  for (const auto& p : d.in_dimension(1))
    if (p.birth <= r && r < p.death) ++c;
  return c;
}

}  // namespace

TEST_CASE("rips: two points") {
  Eigen::MatrixXd pts(2, 3);
  pts << 0, 0, 0, 3, 4, 0;
  const auto d = rips_persistence(pts, 1);
  REQUIRE(d.points.size() == 2);
  CHECK(d.points[0] == PersistencePoint{0, 0.0, 5.0, false});
  CHECK(d.points[1].essential());
  CHECK(total_persistence(d) == doctest::Approx(5.0));
}

TEST_CASE("rips: identical points") {
  const Eigen::MatrixXd pts = Eigen::MatrixXd::Constant(7, 2, 1.5);
  const auto d = rips_persistence(pts, 1);
  CHECK(d.in_dimension(0).size() == 7);
  CHECK(d.in_dimension(1).empty());
  CHECK(d.essential_count() == 1);
  CHECK(total_persistence(d) == 0.0);
}

TEST_CASE("rips: single point and errors") {
  const auto d = rips_persistence(Eigen::MatrixXd::Zero(1, 4), 1);
  REQUIRE(d.points.size() == 1);
  CHECK(d.points[0].essential());
  CHECK_THROWS_AS(rips_persistence(Eigen::MatrixXd(0, 2), 1), DimensionError);
  CHECK_THROWS_AS(rips_persistence(Eigen::MatrixXd::Zero(3, 2), 3), ConfigError);
  CHECK_THROWS_AS(rips_persistence(Eigen::MatrixXd::Zero(3, 2), 1, 0.0), ConfigError);
}

TEST_CASE("rips: H0 deaths equal MST edge weights") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const auto n = static_cast<Eigen::Index>(2 + rng() % 63);
    const auto dim = static_cast<Eigen::Index>(1 + rng() % 8);
    const auto pts = testutil::random_matrix(n, dim, 100 + static_cast<std::uint64_t>(trial));
    const auto got = finite_deaths(rips_persistence(pts, 0), 0);
    const auto want = fixtures::mst_weights(pts);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::abs(got[i] - want[i]) <= 1e-12);
  }
}

TEST_CASE("rips: H0 stability under small perturbation") {
  const double eps = 1e-3;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto pts = testutil::random_matrix(40, 3, seed);
    Eigen::MatrixXd moved = pts;
    const auto dir = testutil::random_matrix(40, 3, seed + 1000);
    for (Eigen::Index i = 0; i < pts.rows(); ++i) moved.row(i) += eps * dir.row(i).normalized();
    const auto a = finite_deaths(rips_persistence(pts, 0), 0);
    const auto b = finite_deaths(rips_persistence(moved, 0), 0);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 2 * eps + 1e-15);
  }
}

TEST_CASE("rips: square has one H1 class from side to diagonal") {
  Eigen::MatrixXd pts(4, 2);
  pts << 0, 0, 1, 0, 1, 1, 0, 1;
  const auto h1 = rips_persistence(pts, 1).in_dimension(1);
  REQUIRE(h1.size() == 1);
  CHECK(h1[0].birth == doctest::Approx(1.0));
  CHECK(h1[0].death == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("rips: H1 ranks agree with brute-force Betti numbers") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto pts = testutil::random_matrix(12, 2, 500 + seed);
    const auto dgm = rips_persistence(pts, 1);
    std::vector<double> scales;
    for (Eigen::Index i = 0; i < pts.rows(); ++i)
      for (Eigen::Index j = i + 1; j < pts.rows(); ++j) scales.push_back((pts.row(i) - pts.row(j)).norm());
    std::sort(scales.begin(), scales.end());
    for (std::size_t s = 0; s < scales.size(); s += 3) CHECK(h1_alive_at(dgm, scales[s]) == betti1_at(pts, scales[s]));
  }
}

TEST_CASE("rips: noisy circle has one dominant H1 feature") {
  int passes = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto h1 = h1_persistences(rips_persistence(fixtures::noisy_circle(100, 0.05, seed), 1));
    REQUIRE(!h1.empty());
    const double runner_up = h1.size() > 1 ? h1[1] : 0.0;
    if (h1[0] >= 5.0 * runner_up) ++passes;
  }
  CHECK(passes >= 9);
}

TEST_CASE("rips: max_edge truncation") {
  Eigen::MatrixXd pts(4, 1);
  pts << 0, 1, 10, 11;
  const auto d = rips_persistence(pts, 1, 2.0);
  const auto h0 = d.in_dimension(0);
  REQUIRE(h0.size() == 4);
  CHECK(std::count_if(h0.begin(), h0.end(), [](const auto& p) { return p.truncated && p.death == 2.0; }) == 1);
  CHECK(d.essential_count() == 1);
  CHECK(total_persistence(d) == doctest::Approx(1 + 1 + 2));

  // A circle cut off before its filling triangles appear keeps its H1 class.
  Eigen::MatrixXd sq(4, 2);
  sq << 0, 0, 1, 0, 1, 1, 0, 1;
  const auto h1 = rips_persistence(sq, 1, 1.2).in_dimension(1);
  REQUIRE(h1.size() == 1);
  CHECK(h1[0].truncated);
  CHECK(h1[0].death == 1.2);
}

TEST_CASE("rips: dimension 2 request is flagged and computed up to H1") {
  const auto pts = fixtures::noisy_circle(20, 0.01, 3);
  const auto d2 = rips_persistence(pts, 2);
  const auto d1 = rips_persistence(pts, 1);
  CHECK(d2.h2_requested);
  CHECK_FALSE(d1.h2_requested);
  CHECK(d2.points == d1.points);
  CHECK(rips_persistence(pts, 0).in_dimension(1).empty());
}

TEST_CASE("maxmin landmarks") {
  Eigen::MatrixXd pts(5, 1);
  pts << 0, 1, 10, 4, 9;
  CHECK(maxmin_landmarks(pts, 3) == std::vector<std::size_t>{0, 2, 3});
  CHECK(maxmin_landmarks(pts, 10).size() == 5);
  CHECK(maxmin_landmarks(pts, 0).empty());
  const auto sel = select_rows(pts, {2, 0});
  CHECK(sel(0, 0) == 10);
  CHECK(sel(1, 0) == 0);
  // Ties go to the lower index.
  Eigen::MatrixXd sym(3, 1);
  sym << 0, -1, 1;
  CHECK(maxmin_landmarks(sym, 2) == std::vector<std::size_t>{0, 1});
}

TEST_CASE("total persistence") {
  PersistenceDiagram d;
  CHECK(total_persistence(d) == 0.0);
  d.points = {{0, 0, 1}, {0, 0.5, 2}, {0, 0, kInfinity}};
  CHECK(total_persistence(d) == 2.5);
  PersistenceDiagram e;
  e.points = {{1, 0.25, 0.75}, {0, 0, 3}};
  PersistenceDiagram u = d;
  u.points.insert(u.points.end(), e.points.begin(), e.points.end());
  CHECK(total_persistence(u) == doctest::Approx(total_persistence(d) + total_persistence(e)));
  std::reverse(u.points.begin(), u.points.end());
  CHECK(total_persistence(u) == doctest::Approx(6.0));
}

TEST_CASE("diagram csv round trip") {
  PersistenceDiagram d;
  d.points = {{1, 0.1, 0.30000000000000004}, {0, 0, kInfinity}, {0, 0, 1.0 / 3.0}, {0, 0, 1.0 / 3.0}};
  d.canonicalize();
  const auto csv = to_csv(d);
  CHECK(csv.rfind("dimension,birth,death\n", 0) == 0);
  CHECK(csv.find("inf") != std::string::npos);
  const auto back = diagram_from_csv(csv);
  CHECK(back.points == d.points);
  CHECK_THROWS_AS(diagram_from_csv("dimension,birth,death\n0,1\n"), FormatError);
  CHECK_THROWS_AS(diagram_from_csv("x,y,z\n"), FormatError);
}

TEST_CASE("sublevel: double well gives secondary minimum and saddle") {
  const auto crit = fixtures::double_well_critical();
  const double b = fixtures::double_well(crit.local_min), s = fixtures::double_well(crit.saddle);
  const double a = fixtures::double_well(crit.global_min);
  const auto dgm = sublevel_persistence_0d(fixtures::double_well_sample(2001), 2);
  std::vector<PersistencePoint> finite;
  for (const auto& p : dgm.points)
    if (!p.essential()) finite.push_back(p);
  REQUIRE(dgm.essential_count() == 1);
  // Points strictly inside a monotone stretch are born and merged at once.
  std::erase_if(finite, [](const auto& p) { return p.persistence() == 0.0; });
  REQUIRE(finite.size() == 1);
  CHECK(std::abs(finite[0].birth - b) <= 0.02 * std::abs(b));
  CHECK(std::abs(finite[0].death - s) <= 0.02 * std::abs(s));
  const auto ess = std::find_if(dgm.points.begin(), dgm.points.end(), [](const auto& p) { return p.essential(); });
  CHECK(ess->birth == doctest::Approx(a).epsilon(1e-4));
}

TEST_CASE("sublevel: double well with no zero-length points on a path graph") {
  const auto dgm = sublevel_persistence_0d(fixtures::double_well_sample(2001), 2);
  CHECK(dgm.points.size() == 2);
}

TEST_CASE("sublevel: equal losses") {
  LandscapeSample s;
  s.offsets = testutil::random_matrix(30, 3, 7);
  s.losses = Eigen::VectorXd::Constant(30, 0.7);
  const auto dgm = sublevel_persistence_0d(s, 4);
  for (const auto& p : dgm.points)
    if (!p.essential()) CHECK(p.persistence() == 0.0);
}

TEST_CASE("sublevel: convex bowl has only the essential class") {
  LandscapeSample s;
  s.offsets = testutil::random_matrix(400, 2, 9);
  s.losses = s.offsets.rowwise().squaredNorm();
  const auto dgm = sublevel_persistence_0d(s, 8);
  for (const auto& p : dgm.points)
    if (!p.essential()) CHECK(p.persistence() <= 1e-9);
  CHECK(dgm.essential_count() == 1);
}

TEST_CASE("sublevel: point count equals local minima count") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    LandscapeSample s;
    s.offsets = testutil::random_matrix(150, 3, seed);
    s.losses = testutil::random_vector(150, seed + 50);
    const std::size_t k = 1 + seed % 5;
    const auto adj = knn_graph(s.offsets, k);
    std::size_t minima = 0;
    for (std::size_t v = 0; v < adj.size(); ++v) {
      bool lowest = true;
      for (auto u : adj[v]) lowest = lowest && s.losses(static_cast<Eigen::Index>(v)) < s.losses(static_cast<Eigen::Index>(u));
      if (lowest) ++minima;
    }
    CHECK(sublevel_persistence_0d(s, k).points.size() == minima);
  }
}

TEST_CASE("sublevel: disconnected graph has one essential class per component") {
  LandscapeSample s;
  s.offsets.resize(6, 1);
  s.offsets << 0, 0.1, 0.2, 100, 100.1, 100.2;
  s.losses.resize(6);
  s.losses << 3, 1, 2, 5, 4, 6;
  const auto dgm = sublevel_persistence_0d(s, 2);
  CHECK(dgm.essential_count() == 2);
  CHECK_THROWS_AS(sublevel_persistence_0d(s, 6), ConfigError);
  CHECK_THROWS_AS(sublevel_persistence_0d(s, 0), ConfigError);
}

TEST_CASE("sublevel: elder rule keeps the lower birth") {
  LandscapeSample s;
  s.offsets.resize(5, 1);
  s.offsets << 0, 1, 2, 3, 4;
  s.losses.resize(5);
  s.losses << 0.5, 1.0, 3.0, 2.0, 0.2;
  const auto dgm = sublevel_persistence_0d(s, 1);
  REQUIRE(dgm.points.size() == 2);
  CHECK(dgm.points[0] == PersistencePoint{0, 0.2, kInfinity, false});
  CHECK(dgm.points[1] == PersistencePoint{0, 0.5, 3.0, false});
}

TEST_CASE("landscape sampling") {
  const homotopy::LossFn bowl = [](const Eigen::VectorXd& t) { return t.squaredNorm(); };
  const Eigen::VectorXd c = Eigen::VectorXd::Constant(3, 0.5);

  const auto flat = sample_landscape(c, 0.0, 10, 1, bowl);
  CHECK(flat.offsets.isZero(0));
  CHECK((flat.losses.array() == 0.75).all());

  const auto a = sample_landscape(c, 0.3, 50, 42, bowl, 1);
  const auto b = sample_landscape(c, 0.3, 50, 42, bowl, 3);
  CHECK(a.offsets == b.offsets);
  CHECK(a.losses == b.losses);
  CHECK(a.offsets != sample_landscape(c, 0.3, 50, 43, bowl).offsets);

  const auto big = sample_landscape(Eigen::VectorXd::Zero(4), 0.7, 5000, 5, bowl);
  for (Eigen::Index j = 0; j < 4; ++j) {
    const auto col = big.offsets.col(j);
    const double mean = col.mean();
    const double sd = std::sqrt((col.array() - mean).square().sum() / (col.size() - 1));
    CHECK(std::abs(sd - 0.7) <= 0.05 * 0.7);
  }
  CHECK_THROWS_AS(sample_landscape(c, 0.1, 1, 0, bowl), ConfigError);
}

TEST_CASE("landscape sampling flags non-finite losses") {
  const homotopy::LossFn bad = [](const Eigen::VectorXd& t) { return t(0) > 0 ? std::nan("") : 1.0; };
  const auto s = sample_landscape(Eigen::VectorXd::Zero(2), 1.0, 200, 3, bad);
  CHECK(s.flagged_count() > 0);
  CHECK(s.flagged_count() < 200);
  for (std::size_t i = 0; i < s.size(); ++i)
    CHECK(s.losses(static_cast<Eigen::Index>(i)) == (s.flagged[i] ? kLossSentinel : 1.0));
}

TEST_CASE("gap model fit") {
  const std::vector<double> x = {1, 2, 3, 4, 5};
  std::vector<double> y;
  for (double v : x) y.push_back(-0.1 * v + 5);
  auto m = fit_gap_model(x, y);
  CHECK(m.alpha == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(m.beta == doctest::Approx(5).epsilon(1e-12));
  CHECK(*m.r_squared == doctest::Approx(1.0).epsilon(1e-12));

  const std::vector<double> x2 = {1, 3}, y2 = {7, -2};
  CHECK(*fit_gap_model(x2, y2).r_squared == doctest::Approx(1.0));

  const std::vector<double> same = {2, 2, 2};
  CHECK_THROWS_AS(fit_gap_model(same, same), NumericError);
  CHECK_THROWS_AS(fit_gap_model(std::vector<double>{1}, std::vector<double>{1}), ConfigError);
  CHECK_THROWS_AS(fit_gap_model(x, x2), DimensionError);
}

TEST_CASE("gap model recovers planted coefficients") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int trial = 0; trial < 20; ++trial) {
    const double alpha = u(rng), beta = u(rng);
    std::vector<double> x, y;
    for (int i = 0; i < 10; ++i) {
      x.push_back(u(rng) * 10);
      y.push_back(-alpha * x.back() + beta);
    }
    const auto m = fit_gap_model(x, y);
    CHECK(std::abs(m.alpha - alpha) <= 1e-10);
    CHECK(std::abs(m.beta - beta) <= 1e-9);
  }
}

TEST_CASE("gap model on the published scatter") {
  std::vector<double> x, y;
  for (auto [p, g] : fixtures::reference_points()) {
    x.push_back(p);
    y.push_back(g);
  }
  const auto m = fit_gap_model(x, y);
  const auto oracle = fixtures::normal_equation_fit(fixtures::reference_points());
  CHECK(std::abs(m.alpha - oracle.alpha) <= 1e-9);
  CHECK(std::abs(m.beta - oracle.beta) <= 1e-9);
  CHECK(std::abs(*m.r_squared - oracle.r2) <= 1e-9);
  // Reference values from an independent numpy lstsq run.
  CHECK(std::abs(m.alpha - 0.10956206679269058) <= 1e-9);
  CHECK(std::abs(m.beta - 9.58292458461845) <= 1e-9);
  CHECK(std::abs(*m.r_squared - 0.9970305013580214) <= 1e-9);
}

TEST_CASE("predict gap") {
  const GapModel defaults;
  CHECK(predict_gap(defaults, 0) == doctest::Approx(0.12));
  CHECK(predict_gap(defaults, 50) == doctest::Approx(-1.58));
  CHECK_FALSE(defaults.r_squared.has_value());
  CHECK(predict_gap(GapModel{0.0, 3.5, std::nullopt}, 1e6) == 3.5);
}

#include "dgff/field.hpp"

#include <cmath>
#include <vector>

#include "doctest.h"

using namespace dgff;

namespace {

WeightedGraph complete_graph(std::size_t n, double c) {
  GridRealization grid;
  grid.model = ManifoldModel::torus(1);
  grid.points.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    grid.points[i] = {static_cast<double>(i) / n, 0.0, 0.0};
  }
  Eigen::MatrixXd m = Eigen::MatrixXd::Constant(n, n, c);
  m.diagonal().setZero();
  return WeightedGraph(grid, m);
}

WeightedGraph path3() {
  GridRealization grid;
  grid.model = ManifoldModel::torus(1);
  grid.points = {{0.0, 0, 0}, {0.1, 0, 0}, {0.2, 0, 0}};
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(3, 3);
  c(0, 1) = c(1, 0) = 1.0;
  c(1, 2) = c(2, 1) = 1.0;
  return WeightedGraph(grid, c);
}

WeightedGraph random_graph(std::size_t n, RngStream& rng) {
  GridRealization grid;
  grid.model = ManifoldModel::torus(1);
  grid.points.resize(n);
  for (std::size_t i = 0; i < n; ++i) grid.points[i] = {rng.uniform(), 0, 0};
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double c = 0.5 + 1.5 * rng.uniform();
      m(i, j) = c;
      m(j, i) = c;
    }
  }
  return WeightedGraph(grid, m);
}

}  // namespace

TEST_CASE("dgff samples have exactly zero average") {
  RngStream rng(201);
  const auto g = random_graph(12, rng);
  const auto sd = spectral_decompose(assemble_laplacian(g));
  const auto samples = sample_dgff(sd, rng, 200);
  for (const auto& s : samples) {
    CHECK(std::abs(s.values.sum() / 12.0) <= 1e-12);
  }
}

TEST_CASE("complete graph n=3: sampler covariance matches G^V") {
  const auto sd = spectral_decompose(assemble_laplacian(complete_graph(3, 1.0)));
  RngStream rng(202);
  const std::size_t draws = 100000;
  const auto samples = sample_dgff(sd, rng, draws);
  const Eigen::MatrixXd cov = covariance_estimate(samples);
  const Eigen::MatrixXd g = discrete_green_matrix(sd);
  for (int v = 0; v < 3; ++v) {
    for (int w = 0; w < 3; ++w) {
      // Wick: Var(phi_v phi_w) = G_vv G_ww + G_vw^2.
      const double se =
          std::sqrt((g(v, v) * g(w, w) + g(v, w) * g(v, w)) / draws);
      CHECK(std::abs(cov(v, w) - g(v, w)) <= 5.0 * se);
    }
  }
  // Row sums of the estimate vanish within CLT tolerance (they are exact up
  // to the recentering of each sample).
  CHECK(cov.rowwise().sum().cwiseAbs().maxCoeff() < 1e-10);
  // Degeneracy: rank <= n - 1.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  CHECK(es.eigenvalues()(0) < 1e-10);
}

TEST_CASE("scaling conductances by c divides the covariance by c") {
  const auto sd1 = spectral_decompose(assemble_laplacian(complete_graph(3, 1.0)));
  const auto sd2 = spectral_decompose(assemble_laplacian(complete_graph(3, 2.0)));
  RngStream rng(203);
  const std::size_t draws = 40000;
  const auto s2 = sample_dgff(sd2, rng, draws);
  const Eigen::MatrixXd cov2 = covariance_estimate(s2);
  const Eigen::MatrixXd expected = 0.5 * discrete_green_matrix(sd1);
  for (int v = 0; v < 3; ++v) {
    for (int w = 0; w < 3; ++w) {
      const double se = std::sqrt(2.0) * (1.0 / 9.0) / std::sqrt(draws);
      CHECK(std::abs(cov2(v, w) - expected(v, w)) <= 5.0 * se);
    }
  }
}

TEST_CASE("pairing with test functions: linearity and constant-blindness") {
  const auto lattice = build_torus_lattice(16, 1);
  const auto sd = spectral_decompose(assemble_laplacian(lattice.graph));
  auto model = lattice.grid.model;
  RngStream rng(205);
  const auto samples = sample_dgff(sd, rng, 20);
  const TestFunction f(model, {{2, 0.7}});
  const TestFunction g(model, {{5, -0.3}});
  const TestFunction fg(model, {{2, 0.7}, {5, -0.3}});
  for (const auto& s : samples) {
    const double pf = pair_with_function(s, f, lattice.grid);
    const double pg = pair_with_function(s, g, lattice.grid);
    const double pfg = pair_with_function(s, fg, lattice.grid);
    CHECK(pfg == doctest::Approx(pf + pg).epsilon(1e-12));
    // Pairing against a constant is the sample mean: zero by construction.
    CHECK(std::abs(s.values.mean()) <= 1e-12);
  }
}

TEST_CASE("variance of sqrt(N) <phi, f> matches the Green quadratic form") {
  const auto lattice = build_torus_lattice(64, 1);
  const auto sd = spectral_decompose(assemble_laplacian(lattice.graph));
  auto model = lattice.grid.model;
  const TestFunction f = TestFunction::single_mode(model, 3);
  const Eigen::VectorXd fn = discretize_function(f, lattice.grid);
  const double target = green_quadratic_form(sd, fn);

  RngStream rng(207);
  const std::size_t draws = 100000;
  const auto samples = sample_dgff(sd, rng, draws);
  const double sqrt_n = 8.0;
  double acc = 0.0, acc2 = 0.0;
  for (const auto& s : samples) {
    const double v = sqrt_n * pair_with_function(s, f, lattice.grid);
    acc += v * v;
    acc2 += v * v * v * v;
  }
  const double var = acc / draws;
  // Var of the squared Gaussian: 2 target^2; 5 sigma gate.
  CHECK(std::abs(var - target) <= 5.0 * std::sqrt(2.0) * target /
                                      std::sqrt(static_cast<double>(draws)));
  (void)acc2;
}

TEST_CASE("characteristic functional matches exp(-a^2 q / 2) at multiples") {
  const auto lattice = build_torus_lattice(32, 1);
  const auto sd = spectral_decompose(assemble_laplacian(lattice.graph));
  auto model = lattice.grid.model;
  const TestFunction f = TestFunction::single_mode(model, 3);
  const double q = green_quadratic_form(sd, discretize_function(f, lattice.grid));
  RngStream rng(209);
  const std::size_t draws = 100000;
  const auto samples = sample_dgff(sd, rng, draws);
  const double sqrt_n = std::sqrt(32.0);
  std::vector<double> pair_vals(draws);
  for (std::size_t i = 0; i < draws; ++i) {
    pair_vals[i] = sqrt_n * pair_with_function(samples[i], f, lattice.grid);
  }
  for (double a : {0.5, 1.0, 1.5, 2.0, 3.0}) {
    double acc = 0.0, acc2 = 0.0;
    for (double v : pair_vals) {
      const double c = std::cos(a * v);
      acc += c;
      acc2 += c * c;
    }
    const double mean = acc / draws;
    const double var = std::max(0.0, acc2 / draws - mean * mean);
    const double se = std::sqrt(var / draws);
    const double theory = std::exp(-0.5 * a * a * q);
    CHECK(std::abs(mean - theory) <= 5.0 * se + 1e-12);
  }
}

TEST_CASE("harmonic extension: constants, 3-path midpoint, maximum principle") {
  const auto g3 = path3();
  const auto l3 = assemble_laplacian(g3);
  const SubsetProblem mid(l3, {1});
  const Eigen::VectorXd boundary = (Eigen::VectorXd(2) << 3.0, 7.0).finished();
  const Eigen::VectorXd h = harmonic_extension(l3, mid, boundary);
  CHECK(h(1) == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(h(0) == 3.0);
  CHECK(h(2) == 7.0);

  const Eigen::VectorXd constant = Eigen::VectorXd::Constant(2, 4.2);
  CHECK(harmonic_extension(l3, mid, constant)(1) ==
        doctest::Approx(4.2).epsilon(1e-14));

  RngStream rng(211);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 6 + rng.uniform_below(5);
    const auto g = random_graph(n, rng);
    const auto l = assemble_laplacian(g);
    std::vector<std::size_t> u;
    for (std::size_t v = 0; v < n; ++v) {
      if (rng.uniform() < 0.5 && u.size() + 1 < n) u.push_back(v);
    }
    if (u.empty()) u.push_back(0);
    const SubsetProblem prob(l, u);
    Eigen::VectorXd bdry(prob.complement().size());
    for (Eigen::Index i = 0; i < bdry.size(); ++i) bdry(i) = rng.normal();
    const Eigen::VectorXd ext = harmonic_extension(l, prob, bdry);
    CHECK(ext.maxCoeff() <= bdry.maxCoeff() + 1e-12);
    CHECK(ext.minCoeff() >= bdry.minCoeff() - 1e-12);
  }
}

TEST_CASE("killed Green's function: path, single vertex, symmetry") {
  const auto g3 = path3();
  const auto l3 = assemble_laplacian(g3);
  const Eigen::MatrixXd k1 = killed_green(l3, SubsetProblem(l3, {1}));
  CHECK(k1(0, 0) == doctest::Approx(0.5).epsilon(1e-14));

  RngStream rng(213);
  const auto g = random_graph(7, rng);
  const auto l = assemble_laplacian(g);
  for (std::size_t v = 0; v < 7; ++v) {
    const Eigen::MatrixXd kv = killed_green(l, SubsetProblem(l, {v}));
    CHECK(kv(0, 0) ==
          doctest::Approx(1.0 / g.conductance().row(v).sum()).epsilon(1e-12));
  }
  const SubsetProblem sub(l, {0, 2, 5});
  const Eigen::MatrixXd k = killed_green(l, sub);
  CHECK((k - k.transpose()).cwiseAbs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(SubsetProblem(l3, {0, 1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(SubsetProblem(l3, {}), std::invalid_argument);
}

TEST_CASE("Markov decomposition is exact over random graphs and subsets") {
  RngStream rng(215);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 5 + rng.uniform_below(12);
    const auto g = random_graph(n, rng);
    const auto l = assemble_laplacian(g);
    const auto sd = spectral_decompose(l);
    const std::size_t size = 1 + rng.uniform_below(n - 1);
    std::vector<std::size_t> u;
    std::size_t start = rng.uniform_below(n);
    for (std::size_t i = 0; i < size; ++i) u.push_back((start + i) % n);
    CHECK(markov_decomposition_check(sd, l, SubsetProblem(l, u)) < 1e-10);
  }
  // All-but-one vertex subset and a lattice stretch.
  RngStream rng2(216);
  const auto g = random_graph(6, rng2);
  const auto l = assemble_laplacian(g);
  const auto sd = spectral_decompose(l);
  CHECK(markov_decomposition_check(sd, l, SubsetProblem(l, {0, 1, 2, 3, 4})) <
        1e-10);
  const auto lattice = build_torus_lattice(8, 1);
  const auto ll = assemble_laplacian(lattice.graph);
  const auto lsd = spectral_decompose(ll);
  CHECK(markov_decomposition_check(lsd, ll, SubsetProblem(ll, {2, 3, 4, 5})) <
        1e-10);
}

TEST_CASE("occupation identity: quadrature reproduces G^V") {
  const auto sd3 = spectral_decompose(assemble_laplacian(complete_graph(3, 1.0)));
  CHECK(occupation_identity_check(sd3) < 1e-8);
  RngStream rng(217);
  for (int trial = 0; trial < 10; ++trial) {
    const auto g = random_graph(5 + rng.uniform_below(8), rng);
    const auto sd = spectral_decompose(assemble_laplacian(g));
    CHECK(occupation_identity_check(sd) < 1e-8);
  }
}

TEST_CASE("covariance estimate basics") {
  const auto sd = spectral_decompose(assemble_laplacian(complete_graph(3, 1.0)));
  RngStream rng(219);
  const auto two = sample_dgff(sd, rng, 2);
  const Eigen::MatrixXd cov = covariance_estimate(two);
  CHECK((cov - cov.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(covariance_estimate({two[0]}), std::invalid_argument);
}

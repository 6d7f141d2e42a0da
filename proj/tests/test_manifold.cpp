#include "dgff/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <vector>

#include "dgff/quadrature.hpp"
#include "dgff/rng.hpp"
#include "doctest.h"

using namespace dgff;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Quadrature of f over the uniform measure, exact for the trigonometric /
// spherical-harmonic polynomials these tests integrate.
double integrate_uniform(const ManifoldModel& model,
                         const std::function<double(const Point&)>& f) {
  switch (model.kind()) {
    case ManifoldKind::kTorus1: {
      const int m = 512;
      double acc = 0.0;
      for (int i = 0; i < m; ++i) {
        acc += f({(i + 0.5) / m, 0.0, 0.0});
      }
      return acc / m;
    }
    case ManifoldKind::kTorus2: {
      const int m = 64;
      double acc = 0.0;
      for (int a = 0; a < m; ++a) {
        for (int b = 0; b < m; ++b) {
          acc += f({(a + 0.5) / m, (b + 0.5) / m, 0.0});
        }
      }
      return acc / (m * m);
    }
    case ManifoldKind::kSphere2: {
      const GaussRule& rule = gauss_legendre(32);
      const int mphi = 96;
      double acc = 0.0;
      for (int zi = 0; zi < 32; ++zi) {
        const double z = rule.nodes[zi];
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        double ring = 0.0;
        for (int pi_ = 0; pi_ < mphi; ++pi_) {
          const double phi = 2.0 * kPi * (pi_ + 0.5) / mphi;
          ring += f({r * std::cos(phi), r * std::sin(phi), z});
        }
        acc += rule.weights[zi] * ring / mphi;
      }
      return acc / 2.0;  // weights sum to 2 = int dz
    }
  }
  return 0.0;
}

std::vector<std::shared_ptr<const ManifoldModel>> all_models() {
  return {ManifoldModel::torus(1), ManifoldModel::torus(2),
          ManifoldModel::sphere2()};
}

}  // namespace

TEST_CASE("torus(1) eigenvalues match brute-force frequency enumeration") {
  auto model = ManifoldModel::torus(1);
  // Oracle: enumerate k^2 over integer frequencies, sort ascending.
  std::vector<double> oracle;
  for (int k = -40; k <= 40; ++k) oracle.push_back(static_cast<double>(k) * k);
  std::sort(oracle.begin(), oracle.end());
  for (std::size_t j = 1; j <= 60; ++j) {
    CHECK(model->eigenvalue(j) == oracle[j - 1]);
  }
  CHECK(model->eigenvalue(1) == 0.0);
  CHECK(model->eigenvalue(4) == 4.0);  // first frequency-2 mode
  // Constant mode is constant 1.
  CHECK(model->eigenfunction(1, {0.37, 0.0, 0.0}) == 1.0);
}

TEST_CASE("sphere eigenvalues follow l(l+1) with multiplicity 2l+1") {
  auto model = ManifoldModel::sphere2();
  std::vector<double> oracle;
  for (int l = 0; l <= 40; ++l) {
    for (int m = -l; m <= l; ++m) oracle.push_back(static_cast<double>(l) * (l + 1));
  }
  for (std::size_t j = 1; j <= 100; ++j) {
    CHECK(model->eigenvalue(j) == oracle[j - 1]);
  }
  CHECK(model->eigenvalue(2) == 2.0);
  CHECK(model->eigenvalue(4) == 2.0);
  CHECK(model->eigenvalue(5) == 6.0);
}

TEST_CASE("every model: zero eigenvalue is simple and the gap matches") {
  for (const auto& model : all_models()) {
    CAPTURE(model->name());
    CHECK(model->eigenvalue(1) == 0.0);
    CHECK(model->eigenvalue(2) > 0.0);
  }
  CHECK(ManifoldModel::torus(1)->lambda2() == 1.0);
  CHECK(ManifoldModel::torus(2)->lambda2() == 1.0);
  CHECK(ManifoldModel::sphere2()->lambda2() == 2.0);
}

TEST_CASE("eigenfunctions are orthonormal under quadrature") {
  for (const auto& model : all_models()) {
    CAPTURE(model->name());
    for (std::size_t j = 1; j <= 20; ++j) {
      for (std::size_t k = j; k <= 20; ++k) {
        const double ip = integrate_uniform(*model, [&](const Point& p) {
          return model->eigenfunction(j, p) * model->eigenfunction(k, p);
        });
        const double expect = j == k ? 1.0 : 0.0;
        CHECK(std::abs(ip - expect) < 1e-6);
      }
    }
  }
}

TEST_CASE("heat kernel on torus(1): frozen series value at t = 0.5") {
  auto model = ManifoldModel::torus(1);
  // Oracle: 1 + 2 sum_{k<=10} exp(-t k^2) at the diagonal.
  double oracle = 1.0;
  for (int k = 1; k <= 10; ++k) oracle += 2.0 * std::exp(-0.5 * k * k);
  const Point p{0.25, 0.0, 0.0};
  CHECK(model->heat_kernel(0.5, p, p) == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(model->heat_kernel(0.5, p, p) == doctest::Approx(2.50663).epsilon(1e-5));

  // Off-diagonal value p - q = 1/2: alternating series.
  double alt = 1.0;
  for (int k = 1; k <= 12; ++k) {
    alt += 2.0 * (k % 2 ? -1.0 : 1.0) * std::exp(-0.5 * k * k);
  }
  CHECK(model->heat_kernel(0.5, {0.0, 0.0, 0.0}, {0.5, 0.0, 0.0}) ==
        doctest::Approx(alt).epsilon(1e-12));
}

TEST_CASE("heat kernel relaxes to 1, is symmetric, and is normalized") {
  RngStream rng(11);
  for (const auto& model : all_models()) {
    CAPTURE(model->name());
    const Point p = model->sample_point(rng);
    const Point q = model->sample_point(rng);
    CHECK(model->heat_kernel(60.0, p, q) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(model->heat_kernel(0.5, p, q) ==
          doctest::Approx(model->heat_kernel(0.5, q, p)).epsilon(1e-13));
    for (double t : {0.3, 0.8}) {
      const double mass = integrate_uniform(*model, [&](const Point& r) {
        return model->heat_kernel(t, p, r);
      });
      CHECK(std::abs(mass - 1.0) < 1e-8);
    }
  }
}

TEST_CASE("heat kernel: image and mode representations agree on tori") {
  auto t1 = ManifoldModel::torus(1);
  auto t2 = ManifoldModel::torus(2);
  // t = 0.05 sits at the representation switch; evaluate just above and
  // below and compare with a high-truncation mode sum.
  for (double t : {0.049, 0.051}) {
    const Point p{0.1, 0.6, 0.0};
    const Point q{0.35, 0.2, 0.0};
    const double auto_val = t1->heat_kernel(t, p, q);
    const double mode_val = t1->heat_kernel(t, p, q, 200);
    CHECK(auto_val == doctest::Approx(mode_val).epsilon(1e-11));
    CHECK(t2->heat_kernel(t, p, q) ==
          doctest::Approx(t2->heat_kernel(t, p, q, 200)).epsilon(1e-11));
  }
}

TEST_CASE("Chapman-Kolmogorov holds under quadrature") {
  RngStream rng(17);
  for (const auto& model : all_models()) {
    CAPTURE(model->name());
    const Point p = model->sample_point(rng);
    const Point q = model->sample_point(rng);
    const double t = 0.4, s = 0.3;
    const double conv = integrate_uniform(*model, [&](const Point& r) {
      return model->heat_kernel(t, p, r) * model->heat_kernel(s, r, q);
    });
    CHECK(std::abs(conv - model->heat_kernel(t + s, p, q)) < 1e-6);
  }
}

TEST_CASE("heat kernel rejects bad bandwidth and insufficient truncation") {
  auto model = ManifoldModel::torus(1);
  const Point p{0.0, 0.0, 0.0};
  CHECK_THROWS_AS(model->heat_kernel(0.0, p, p), std::invalid_argument);
  CHECK_THROWS_AS(model->heat_kernel(-1.0, p, p), std::invalid_argument);
  CHECK_THROWS_AS(model->heat_kernel(0.08, p, p, 3), std::runtime_error);
  CHECK_THROWS_AS(ManifoldModel::sphere2()->heat_kernel(0.05, p, p, 2),
                  std::runtime_error);
}

TEST_CASE("Green kernel on torus(1): series limits") {
  auto model = ManifoldModel::torus(1);
  // Oracle: truncated series 2 sum cos(2 pi k u)/k^2 with tail bound 2/K.
  const auto series = [](double u, int cap) {
    double acc = 0.0;
    for (int k = 1; k <= cap; ++k) {
      acc += 2.0 * std::cos(2.0 * kPi * k * u) / (static_cast<double>(k) * k);
    }
    return acc;
  };
  CHECK(model->green_kernel({0.2, 0, 0}, {0.2, 0, 0}) ==
        doctest::Approx(kPi * kPi / 3.0).epsilon(1e-12));
  CHECK(model->green_kernel({0.1, 0, 0}, {0.6, 0, 0}) ==
        doctest::Approx(-kPi * kPi / 6.0).epsilon(1e-12));
  for (double u : {0.07, 0.33, 0.5}) {
    CHECK(std::abs(model->green_kernel({u, 0, 0}, {0.0, 0, 0}) -
                   series(u, 20000)) < 2.0 / 20000 + 1e-9);
  }
}

TEST_CASE("Green kernel integrates to zero against the uniform measure") {
  RngStream rng(23);
  for (const auto& model : all_models()) {
    CAPTURE(model->name());
    const Point p = model->sample_point(rng);
    const double mass = integrate_uniform(*model, [&](const Point& q) {
      return model->green_kernel(p, q);
    });
    // The kernel has a kink (d = 1) or log singularity (d = 2) at q = p,
    // which limits the grid quadrature rate.
    const double tol = model->dim() == 1 ? 1e-5 : 5e-3;
    CHECK(std::abs(mass) < tol);
  }
}

TEST_CASE("sphere Green kernel matches the eigen-series") {
  auto model = ManifoldModel::sphere2();
  // Oracle: sum_{l>=1} (2l+1)/(l(l+1)) P_l(cos gamma), summed far enough
  // that the oscillating tail is below 2e-4.
  const auto series = [](double cg, int cap) {
    double acc = 0.0;
    double p0 = 1.0, p1 = cg;
    for (int l = 1; l <= cap; ++l) {
      const double pl = l == 1 ? cg : p1;
      acc += (2.0 * l + 1.0) / (static_cast<double>(l) * (l + 1)) * pl;
      const double p2 = ((2.0 * l + 1.0) * cg * p1 - l * p0) / (l + 1);
      p0 = p1;
      p1 = p2;
    }
    return acc;
  };
  const Point north{0.0, 0.0, 1.0};
  for (double gamma : {kPi / 3, kPi / 2, 2 * kPi / 3}) {
    const Point q{std::sin(gamma), 0.0, std::cos(gamma)};
    CHECK(model->green_kernel(north, q) ==
          doctest::Approx(series(std::cos(gamma), 200000)).epsilon(2e-4));
  }
  // Spectral-projection identity: int G(p, q) e_j(q) dq = e_j(p)/lambda_j.
  for (std::size_t j : {2, 5}) {
    const double proj = integrate_uniform(*model, [&](const Point& q) {
      return model->green_kernel(north, q) * model->eigenfunction(j, q);
    });
    CHECK(proj == doctest::Approx(model->eigenfunction(j, north) /
                                  model->eigenvalue(j))
                      .epsilon(1e-4));
  }
  CHECK_THROWS_AS(model->green_kernel(north, north), std::invalid_argument);
}

TEST_CASE("torus(2) Green kernel satisfies the defining equation") {
  auto model = ManifoldModel::torus(2);
  // -Delta_q G = -1 away from the diagonal under the (1/4pi^2) Laplacian,
  // checked with a centered second-difference stencil.
  const Point p{0.15, 0.85, 0.0};
  for (const Point q : {Point{0.55, 0.3, 0.0}, Point{0.9, 0.7, 0.0}}) {
    const double h = 1e-3;
    double lap = -4.0 * model->green_kernel(p, q);
    lap += model->green_kernel(p, {q[0] + h, q[1], 0.0});
    lap += model->green_kernel(p, {q[0] - h, q[1], 0.0});
    lap += model->green_kernel(p, {q[0], q[1] + h, 0.0});
    lap += model->green_kernel(p, {q[0], q[1] - h, 0.0});
    lap /= h * h * 4.0 * kPi * kPi;
    CHECK(lap == doctest::Approx(1.0).epsilon(2e-3));
  }
  // Spectral projection against a low mode.
  const double proj = integrate_uniform(*model, [&](const Point& q) {
    return model->green_kernel(p, q) * model->eigenfunction(3, q);
  });
  CHECK(proj == doctest::Approx(model->eigenfunction(3, p) /
                                model->eigenvalue(3))
                    .epsilon(1e-3));
  CHECK_THROWS_AS(model->green_kernel(p, p), std::invalid_argument);
}

TEST_CASE("green_form and semigroup_form in coefficient space") {
  auto model = ManifoldModel::torus(1);
  // e_3 = sqrt(2) cos(2 pi x) has lambda = 1.
  const TestFunction f = TestFunction::single_mode(model, 3);
  CHECK(f.evaluate({0.0, 0, 0}) == doctest::Approx(std::sqrt(2.0)));
  CHECK(green_form(f) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(semigroup_form(f, 0.5) ==
        doctest::Approx(std::exp(-0.5)).epsilon(1e-15));

  const TestFunction zero(model, {});
  CHECK(green_form(zero) == 0.0);

  // Unit coefficients on the lambda = 1 and lambda = 4 modes.
  const TestFunction two(model, {{2, 1.0}, {4, 1.0}});
  CHECK(green_form(two) == doctest::Approx(1.25).epsilon(1e-15));
  CHECK(semigroup_form(two, 0.0) ==
        doctest::Approx(two.l2_norm() * two.l2_norm()).epsilon(1e-15));

  // (f, G f) = int_0^inf (f, S_t f) dt by quadrature.
  const TestFunction g(model, {{2, 0.7}, {5, -0.4}, {9, 0.2}});
  const double quad = integrate_geometric(
      [&](double t) { return semigroup_form(g, t); }, 40.0, 0.5, 40);
  CHECK(quad == doctest::Approx(green_form(g)).epsilon(1e-8));

  CHECK_THROWS_AS(TestFunction(model, {{1, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(TestFunction(model, {{3, 1.0}, {3, 0.5}}),
                  std::invalid_argument);
}

TEST_CASE("test function bounds hold pointwise") {
  RngStream rng(31);
  for (const auto& model : all_models()) {
    CAPTURE(model->name());
    const TestFunction f(model, {{2, 0.8}, {6, -0.5}, {11, 0.3}});
    for (int trial = 0; trial < 200; ++trial) {
      const Point p = model->sample_point(rng);
      const Point q = model->sample_point(rng);
      CHECK(std::abs(f.evaluate(p)) <= f.sup_bound() + 1e-12);
      CHECK(std::abs(f.evaluate(p) - f.evaluate(q)) <=
            f.lipschitz_bound() * model->geodesic_distance(p, q) + 1e-12);
    }
  }
}

TEST_CASE("geodesic distances") {
  auto t1 = ManifoldModel::torus(1);
  CHECK(t1->geodesic_distance({0.1, 0, 0}, {0.9, 0, 0}) ==
        doctest::Approx(0.2).epsilon(1e-15));
  auto s2 = ManifoldModel::sphere2();
  CHECK(s2->geodesic_distance({0, 0, 1}, {0, 0, -1}) ==
        doctest::Approx(kPi).epsilon(1e-15));
  RngStream rng(37);
  for (const auto& model : all_models()) {
    for (int trial = 0; trial < 50; ++trial) {
      const Point p = model->sample_point(rng);
      const Point q = model->sample_point(rng);
      CHECK(model->geodesic_distance(p, p) == 0.0);
      CHECK(model->geodesic_distance(p, q) ==
            doctest::Approx(model->geodesic_distance(q, p)).epsilon(1e-14));
      CHECK(model->geodesic_distance(p, q) >= 0.0);
    }
  }
}

TEST_CASE("uniform sampling: determinism, sphere symmetry, torus chi-square") {
  auto t1 = ManifoldModel::torus(1);
  RngStream a = RngStream::derive(99, {RngStream::kGridSample, 3});
  RngStream b = RngStream::derive(99, {RngStream::kGridSample, 3});
  const auto pa = t1->sample_uniform(3, a);
  const auto pb = t1->sample_uniform(3, b);
  for (int i = 0; i < 3; ++i) {
    CHECK(pa[i][0] == pb[i][0]);
    CHECK(pa[i][0] >= 0.0);
    CHECK(pa[i][0] < 1.0);
  }

  auto s2 = ManifoldModel::sphere2();
  RngStream rs(123);
  const std::size_t n = 100000;
  const auto pts = s2->sample_uniform(n, rs);
  double mx = 0, my = 0, mz = 0;
  for (const auto& p : pts) {
    mx += p[0];
    my += p[1];
    mz += p[2];
  }
  // Coordinates have variance 1/3; 5 sigma CLT gate.
  const double tol = 5.0 * std::sqrt(1.0 / 3.0 / n);
  CHECK(std::abs(mx / n) < tol);
  CHECK(std::abs(my / n) < tol);
  CHECK(std::abs(mz / n) < tol);

  auto t2 = ManifoldModel::torus(2);
  RngStream rt(321);
  const std::size_t m = 10000;
  const auto grid = t2->sample_uniform(m, rt);
  double counts[16] = {0};
  for (const auto& p : grid) {
    const int a4 = std::min(3, static_cast<int>(p[0] * 4));
    const int b4 = std::min(3, static_cast<int>(p[1] * 4));
    counts[a4 * 4 + b4] += 1.0;
  }
  double chi2 = 0.0;
  const double expect = m / 16.0;
  for (double c : counts) chi2 += (c - expect) * (c - expect) / expect;
  CHECK(chi2 < 37.69729821835383);  // chi-square(15) at the 0.999 level
}

TEST_CASE("Weyl growth: log-log slope of the counting function") {
  for (const auto& model : all_models()) {
    CAPTURE(model->name());
    const double lam_max = model->eigenvalue(model->mode_count());
    std::vector<double> lx, ly;
    for (double lam = 16.0; lam <= lam_max * 0.999; lam *= 1.6) {
      lx.push_back(std::log(lam));
      ly.push_back(std::log(static_cast<double>(model->eigen_count_below(lam))));
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(lx.size());
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sx += lx[i];
      sy += ly[i];
      sxx += lx[i] * lx[i];
      sxy += lx[i] * ly[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double target = 0.5 * model->dim();
    CHECK(std::abs(slope - target) <= 0.1 * target);
  }
}

TEST_CASE("eigendata csv dump") {
  auto model = ManifoldModel::torus(1);
  dump_eigendata_csv(*model, 9, "eigendata_test.csv");
  std::ifstream in("eigendata_test.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "# schema: dgff.eigendata.v1");
  std::getline(in, line);
  CHECK(line == "j,eigenvalue,descriptor");
  std::getline(in, line);
  CHECK(line == "1,0,k=0");
}

#include "dgff/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "dgff/quadrature.hpp"

namespace dgff {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;
constexpr double kSqrt2 = 1.41421356237309504880;

// Default enumeration caps: frequency |k| for tori, degree l for the sphere.
constexpr int kTorus1Cap = 1024;
constexpr int kTorus2Cap = 64;
constexpr int kSphereCap = 64;

double wrap_unit(double u) {
  u -= std::floor(u);
  if (u >= 1.0) u -= 1.0;  // guards u = -1e-17 rounding up
  return u;
}

double circle_dist(double a, double b) {
  const double d = std::abs(wrap_unit(a) - wrap_unit(b));
  return std::min(d, 1.0 - d);
}

bool freq_positive(int a, int b) { return a > 0 || (a == 0 && b > 0); }

// sum_{k in Z} exp(-t k^2) cos(2 pi k u), truncated at |k| <= K.
double theta_mode_sum(double u, double t, int K) {
  double acc = 1.0;
  for (int k = 1; k <= K; ++k) {
    acc += 2.0 * std::exp(-t * k * k) * std::cos(kTwoPi * k * u);
  }
  return acc;
}

double theta_mode_tail(double t, int K) {
  // sum_{k>K} 2 e^{-t k^2} <= 2 e^{-t(K+1)^2} / (1 - e^{-t(2K+3)})
  const double head = 2.0 * std::exp(-t * (K + 1.0) * (K + 1.0));
  const double q = std::exp(-t * (2.0 * K + 3.0));
  return q < 1.0 ? head / (1.0 - q) : std::numeric_limits<double>::infinity();
}

// Poisson-summed form: sqrt(pi/t) sum_m exp(-pi^2 (u+m)^2 / t).
double theta_image_sum(double u, double t) {
  u = wrap_unit(u);
  if (u > 0.5) u -= 1.0;  // reduce to [-1/2, 1/2]
  const double pref = std::sqrt(kPi / t);
  double acc = 0.0;
  for (int m = 0; m < 64; ++m) {
    const double tp = std::exp(-kPi * kPi * (u + m) * (u + m) / t);
    const double tm =
        m == 0 ? 0.0 : std::exp(-kPi * kPi * (u - m) * (u - m) / t);
    acc += tp + tm;
    if (m >= 2 && tp + tm < 1e-20 * (acc + 1.0)) break;
  }
  return pref * acc;
}

struct Theta1d {
  double value;
  double tail;
  int terms;
};

Theta1d theta_1d(double u, double t, int truncation, double tail_tol) {
  if (t < 0.05 && truncation == ManifoldModel::kAutoTruncation) {
    // Image form converges in a handful of terms for small t; its truncation
    // error is far below tail_tol at this switch point.
    return {theta_image_sum(u, t), 0.0, 0};
  }
  int K;
  if (truncation == ManifoldModel::kAutoTruncation) {
    K = static_cast<int>(std::ceil(std::sqrt(36.0 / t)));
    while (theta_mode_tail(t, K) > tail_tol) ++K;
  } else {
    K = truncation;
    if (theta_mode_tail(t, K) > tail_tol) {
      throw std::runtime_error(
          "heat_kernel: truncation too small to reach tail tolerance for the "
          "requested bandwidth");
    }
  }
  return {theta_mode_sum(u, t, K), theta_mode_tail(t, K), K};
}

double legendre_p(int l, double x) {
  if (l == 0) return 1.0;
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= l; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

// A_{l,m}(x) = sqrt((2l+1)(l-m)!/(l+m)!) P_l^m(x) without Condon-Shortley
// phase; stable normalized recurrence (sectoral seed, then upward in l).
double normalized_assoc_legendre(int l, int m, double x) {
  const double sx = std::sqrt(std::max(0.0, 1.0 - x * x));
  double amm = 1.0;  // A_00
  for (int k = 1; k <= m; ++k) {
    amm *= sx * std::sqrt((2.0 * k + 1.0) / (2.0 * k));
  }
  if (l == m) return amm;
  double prev = amm;
  double cur = std::sqrt(2.0 * m + 3.0) * x * amm;  // A_{m+1,m}
  for (int k = m + 2; k <= l; ++k) {
    const double a =
        std::sqrt((4.0 * k * k - 1.0) / (static_cast<double>(k) * k - m * m));
    const double b = std::sqrt(
        ((k - 1.0) * (k - 1.0) - m * m) / (4.0 * (k - 1.0) * (k - 1.0) - 1.0));
    const double next = a * (x * cur - b * prev);
    prev = cur;
    cur = next;
  }
  return cur;
}

void sphere_angles(const Point& p, double* cos_theta, double* phi) {
  *cos_theta = std::clamp(p[2], -1.0, 1.0);
  *phi = std::atan2(p[1], p[0]);
}

}  // namespace

std::shared_ptr<const ManifoldModel> ManifoldModel::torus(int d) {
  if (d != 1 && d != 2) {
    throw std::invalid_argument("ManifoldModel::torus: d must be 1 or 2");
  }
  const auto kind = d == 1 ? ManifoldKind::kTorus1 : ManifoldKind::kTorus2;
  const std::size_t cap = d == 1 ? kTorus1Cap : kTorus2Cap;
  return std::shared_ptr<const ManifoldModel>(new ManifoldModel(kind, d, cap));
}

std::shared_ptr<const ManifoldModel> ManifoldModel::sphere2() {
  return std::shared_ptr<const ManifoldModel>(
      new ManifoldModel(ManifoldKind::kSphere2, 2, kSphereCap));
}

ManifoldModel::ManifoldModel(ManifoldKind kind, int dim, std::size_t cap)
    : kind_(kind), dim_(dim) {
  if (kind == ManifoldKind::kSphere2) {
    enumerate_sphere_modes(cap);
  } else {
    enumerate_torus_modes(cap);
  }
}

void ManifoldModel::enumerate_torus_modes(std::size_t cap) {
  const int K = static_cast<int>(cap);
  const long long k2cap = static_cast<long long>(K) * K;
  if (dim_ == 1) {
    modes_.reserve(2 * cap + 1);
    for (int k = -K; k <= K; ++k) {
      modes_.push_back({static_cast<double>(k) * k, k, 0});
    }
  } else {
    for (int a = -K; a <= K; ++a) {
      for (int b = -K; b <= K; ++b) {
        const long long k2 = static_cast<long long>(a) * a +
                             static_cast<long long>(b) * b;
        if (k2 > k2cap) continue;  // keep a Euclidean ball: ascending order
                                   // stays valid up to lambda = cap^2
        modes_.push_back({static_cast<double>(k2), a, b});
      }
    }
  }
  std::sort(modes_.begin(), modes_.end(), [](const Mode& x, const Mode& y) {
    if (x.lambda != y.lambda) return x.lambda < y.lambda;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  });
}

void ManifoldModel::enumerate_sphere_modes(std::size_t cap) {
  const int L = static_cast<int>(cap);
  modes_.reserve((L + 1) * (L + 1));
  for (int l = 0; l <= L; ++l) {
    for (int m = -l; m <= l; ++m) {
      modes_.push_back({static_cast<double>(l) * (l + 1), l, m});
    }
  }
}

const char* ManifoldModel::name() const {
  switch (kind_) {
    case ManifoldKind::kTorus1:
      return "torus1";
    case ManifoldKind::kTorus2:
      return "torus2";
    case ManifoldKind::kSphere2:
      return "sphere2";
  }
  return "unknown";
}

const Mode& ManifoldModel::mode(std::size_t j) const {
  if (j < 1 || j > modes_.size()) {
    throw std::out_of_range("ManifoldModel: mode index beyond enumeration");
  }
  return modes_[j - 1];
}

std::string ManifoldModel::mode_descriptor(std::size_t j) const {
  const Mode& m = mode(j);
  char buf[64];
  if (kind_ == ManifoldKind::kSphere2) {
    std::snprintf(buf, sizeof(buf), "l=%d m=%d", m.a, m.b);
  } else if (dim_ == 1) {
    std::snprintf(buf, sizeof(buf), "k=%d", m.a);
  } else {
    std::snprintf(buf, sizeof(buf), "k=(%d,%d)", m.a, m.b);
  }
  return buf;
}

double ManifoldModel::eigenfunction(std::size_t j, const Point& p) const {
  const Mode& m = mode(j);
  if (kind_ == ManifoldKind::kSphere2) {
    const int l = m.a, ord = m.b;
    if (l == 0) return 1.0;
    double ct, phi;
    sphere_angles(p, &ct, &phi);
    const double alm = normalized_assoc_legendre(l, std::abs(ord), ct);
    if (ord == 0) return alm;
    if (ord > 0) return kSqrt2 * alm * std::cos(ord * phi);
    return kSqrt2 * alm * std::sin(-ord * phi);
  }
  if (m.a == 0 && m.b == 0) return 1.0;
  const double s = m.a * p[0] + m.b * p[1];
  if (freq_positive(m.a, m.b)) return kSqrt2 * std::cos(kTwoPi * s);
  return kSqrt2 * std::sin(-kTwoPi * s);
}

double ManifoldModel::mode_sup_bound(std::size_t j) const {
  const Mode& m = mode(j);
  if (m.lambda == 0.0) return 1.0;
  if (kind_ == ManifoldKind::kSphere2) return std::sqrt(2.0 * m.a + 1.0);
  return kSqrt2;
}

double ManifoldModel::mode_lipschitz_bound(std::size_t j) const {
  const Mode& m = mode(j);
  if (m.lambda == 0.0) return 0.0;
  if (kind_ == ManifoldKind::kSphere2) {
    // Gradient addition theorem: sum_m |grad e_lm|^2 = lambda_l (2l+1).
    return std::sqrt(m.lambda * (2.0 * m.a + 1.0));
  }
  return kTwoPi * std::sqrt(2.0 * m.lambda);
}

std::size_t ManifoldModel::eigen_count_below(double lam) const {
  std::size_t c = 0;
  for (const Mode& m : modes_) {
    if (m.lambda <= lam) ++c;
  }
  return c;
}

HeatKernelInfo ManifoldModel::heat_kernel_info(double t, const Point& p,
                                               const Point& q, int truncation,
                                               double tail_tol) const {
  if (!(t > 0.0)) {
    throw std::invalid_argument("heat_kernel: t must be positive");
  }
  if (kind_ == ManifoldKind::kSphere2) {
    const double dot = std::clamp(
        p[0] * q[0] + p[1] * q[1] + p[2] * q[2], -1.0, 1.0);
    int L;
    if (truncation == kAutoTruncation) {
      L = static_cast<int>(
          std::ceil(0.5 * (-1.0 + std::sqrt(1.0 + 144.0 / t))));
      while (2.0 * std::exp(-t * L * (L + 1.0)) / t > tail_tol) ++L;
    } else {
      L = truncation;
      if (2.0 * std::exp(-t * L * (L + 1.0)) / t > tail_tol) {
        throw std::runtime_error(
            "heat_kernel: truncation too small to reach tail tolerance for "
            "the requested bandwidth");
      }
    }
    double acc = 0.0;
    double p0 = 1.0, p1 = dot;
    for (int l = 0; l <= L; ++l) {
      double pl;
      if (l == 0) {
        pl = 1.0;
      } else if (l == 1) {
        pl = dot;
      } else {
        pl = ((2.0 * l - 1.0) * dot * p1 - (l - 1.0) * p0) / l;
        p0 = p1;
        p1 = pl;
      }
      acc += (2.0 * l + 1.0) * std::exp(-t * l * (l + 1.0)) * pl;
    }
    return {acc, 2.0 * std::exp(-t * L * (L + 1.0)) / t, L};
  }
  // Torus: product of per-dimension kernels.
  Theta1d th[2];
  for (int i = 0; i < dim_; ++i) {
    th[i] = theta_1d(p[i] - q[i], t, truncation, tail_tol);
  }
  if (dim_ == 1) return {th[0].value, th[0].tail, th[0].terms};
  const double v0 = std::abs(th[0].value), v1 = std::abs(th[1].value);
  const double tail =
      th[0].tail * v1 + th[1].tail * v0 + th[0].tail * th[1].tail;
  return {th[0].value * th[1].value, tail,
          std::max(th[0].terms, th[1].terms)};
}

double ManifoldModel::heat_kernel(double t, const Point& p, const Point& q,
                                  int truncation, double tail_tol) const {
  return heat_kernel_info(t, p, q, truncation, tail_tol).value;
}

double ManifoldModel::green_kernel(const Point& p, const Point& q,
                                   int truncation) const {
  switch (kind_) {
    case ManifoldKind::kTorus1: {
      // 2 sum_{k>=1} cos(2 pi k u)/k^2 = 2 pi^2 B_2(u) on [0,1].
      const double u = std::abs(wrap_unit(p[0]) - wrap_unit(q[0]));
      return 2.0 * kPi * kPi * (u * u - u + 1.0 / 6.0);
    }
    case ManifoldKind::kSphere2: {
      const double gamma = geodesic_distance(p, q);
      const double s = std::sin(0.5 * gamma);
      if (s < 1e-9) {
        throw std::invalid_argument(
            "green_kernel: coincident points rejected (log singularity)");
      }
      return -2.0 * std::log(s) - 1.0;
    }
    case ManifoldKind::kTorus2: {
      const double u0 = circle_dist(p[0], q[0]);
      const double u1 = circle_dist(p[1], q[1]);
      if (u0 * u0 + u1 * u1 < 1e-12) {
        throw std::invalid_argument(
            "green_kernel: coincident points rejected (log singularity)");
      }
      // Ewald split at t0: analytic mode tail for t >= t0 plus quadrature of
      // the image-form kernel over (0, t0].
      const double t0 = 0.5;
      int K = truncation == kAutoTruncation ? 9 : truncation;
      if (std::exp(-t0 * K * K) / (K * K) > 1e-10) {
        throw std::runtime_error("green_kernel: truncation too small");
      }
      double mode_part = 0.0;
      for (int a = -K; a <= K; ++a) {
        for (int b = -K; b <= K; ++b) {
          const double k2 = static_cast<double>(a) * a +
                            static_cast<double>(b) * b;
          if (k2 == 0.0 || k2 > static_cast<double>(K) * K) continue;
          mode_part += std::exp(-t0 * k2) / k2 *
                       std::cos(kTwoPi * (a * (p[0] - q[0]) +
                                          b * (p[1] - q[1])));
        }
      }
      const auto integrand = [&](double t) {
        return theta_image_sum(p[0] - q[0], t) *
                   theta_image_sum(p[1] - q[1], t) -
               1.0;
      };
      const double short_part = integrate_geometric(integrand, t0, 0.5, 42);
      return mode_part + short_part;
    }
  }
  throw std::logic_error("green_kernel: unreachable");
}

double ManifoldModel::geodesic_distance(const Point& p, const Point& q) const {
  if (kind_ == ManifoldKind::kSphere2) {
    // Arc length of the dot product, in the atan2 form that stays accurate
    // near coincident and antipodal points.
    const double dot = p[0] * q[0] + p[1] * q[1] + p[2] * q[2];
    const double cx = p[1] * q[2] - p[2] * q[1];
    const double cy = p[2] * q[0] - p[0] * q[2];
    const double cz = p[0] * q[1] - p[1] * q[0];
    return std::atan2(std::sqrt(cx * cx + cy * cy + cz * cz), dot);
  }
  double acc = 0.0;
  for (int i = 0; i < dim_; ++i) {
    const double d = circle_dist(p[i], q[i]);
    acc += d * d;
  }
  return std::sqrt(acc);
}

Point ManifoldModel::sample_point(RngStream& rng) const {
  Point p{0.0, 0.0, 0.0};
  if (kind_ == ManifoldKind::kSphere2) {
    const double z = 2.0 * rng.uniform() - 1.0;
    const double phi = kTwoPi * rng.uniform();
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    p = {r * std::cos(phi), r * std::sin(phi), z};
  } else {
    for (int i = 0; i < dim_; ++i) p[i] = rng.uniform();
  }
  return p;
}

std::vector<Point> ManifoldModel::sample_uniform(std::size_t n,
                                                 RngStream& rng) const {
  if (n < 1) throw std::invalid_argument("sample_uniform: n must be >= 1");
  std::vector<Point> pts(n);
  for (auto& p : pts) p = sample_point(rng);
  return pts;
}

TestFunction::TestFunction(
    std::shared_ptr<const ManifoldModel> model,
    std::vector<std::pair<std::size_t, double>> coeffs)
    : model_(std::move(model)), coeffs_(std::move(coeffs)) {
  if (!model_) throw std::invalid_argument("TestFunction: null model");
  std::sort(coeffs_.begin(), coeffs_.end());
  double l2sq = 0.0;
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    const auto& [j, c] = coeffs_[i];
    if (j < 2) {
      throw std::invalid_argument(
          "TestFunction: constant mode (j = 1) not allowed; test functions "
          "are zero-mean");
    }
    if (i > 0 && coeffs_[i - 1].first == j) {
      throw std::invalid_argument("TestFunction: duplicate mode index");
    }
    model_->mode(j);  // validates the index
    l2sq += c * c;
    sup_bound_ += std::abs(c) * model_->mode_sup_bound(j);
    lipschitz_bound_ += std::abs(c) * model_->mode_lipschitz_bound(j);
  }
  l2_norm_ = std::sqrt(l2sq);
}

TestFunction TestFunction::single_mode(
    std::shared_ptr<const ManifoldModel> model, std::size_t j, double coeff) {
  return TestFunction(std::move(model), {{j, coeff}});
}

double TestFunction::evaluate(const Point& p) const {
  double acc = 0.0;
  for (const auto& [j, c] : coeffs_) acc += c * model_->eigenfunction(j, p);
  return acc;
}

double green_form(const TestFunction& f) {
  double acc = 0.0;
  for (const auto& [j, c] : f.coefficients()) {
    acc += c * c / f.model().eigenvalue(j);
  }
  return acc;
}

double semigroup_form(const TestFunction& f, double t) {
  if (t < 0.0) throw std::invalid_argument("semigroup_form: t must be >= 0");
  double acc = 0.0;
  for (const auto& [j, c] : f.coefficients()) {
    acc += c * c * std::exp(-t * f.model().eigenvalue(j));
  }
  return acc;
}

void dump_eigendata_csv(const ManifoldModel& model, std::size_t j_max,
                        const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "# schema: dgff.eigendata.v1\n";
  out << "j,eigenvalue,descriptor\n";
  char buf[64];
  const std::size_t jm = std::min(j_max, model.mode_count());
  for (std::size_t j = 1; j <= jm; ++j) {
    std::snprintf(buf, sizeof(buf), "%.17g", model.eigenvalue(j));
    out << j << ',' << buf << ',' << model.mode_descriptor(j) << '\n';
  }
}

}  // namespace dgff

#pragma once

#include <array>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "dgff/rng.hpp"

namespace dgff {

// A point on a built-in manifold. Tori use the first d coordinates as chart
// coordinates in [0,1); the sphere uses all three as a unit vector.
using Point = std::array<double, 3>;

enum class ManifoldKind { kTorus1, kTorus2, kSphere2 };

// One Laplace-Beltrami eigenmode. For tori (a, b) is the integer frequency
// vector k (b unused in d = 1); the stored sign selects the real basis
// element: k > 0 lexicographically is the cosine mode, k < 0 the sine mode
// of frequency -k. For the sphere (a, b) = (l, m).
struct Mode {
  double lambda = 0.0;
  int a = 0;
  int b = 0;
};

struct HeatKernelInfo {
  double value = 0.0;
  double tail_bound = 0.0;
  int terms = 0;
};

// Exact spectral data, kernels, sampling and distances for the flat torus
// (d = 1, 2) and the round unit sphere.
//
// Normalization: tori use the Laplacian -(1/4pi^2) * sum of second chart
// derivatives, so eigenvalues are |k|^2 for integer frequency vectors k and
// the uniform measure is Lebesgue on [0,1)^d. The sphere uses the standard
// round metric with eigenvalues l(l+1) and uniform measure V/(4pi).
// Eigenfunctions are orthonormal in L^2 of the uniform measure.
//
// Models are immutable after construction and safe to share across threads.
class ManifoldModel {
 public:
  static std::shared_ptr<const ManifoldModel> torus(int d);
  static std::shared_ptr<const ManifoldModel> sphere2();

  ManifoldKind kind() const { return kind_; }
  int dim() const { return dim_; }
  const char* name() const;

  // Continuum spectral gap (torus: 1, sphere: 2).
  double lambda2() const { return modes_[1].lambda; }

  std::size_t mode_count() const { return modes_.size(); }

  // 1-based flat eigenmode index, ascending in eigenvalue with deterministic
  // tie-breaking (tori: lexicographic in the frequency vector; sphere: m
  // ascending within each degree l). j = 1 is the constant mode.
  const Mode& mode(std::size_t j) const;
  double eigenvalue(std::size_t j) const { return mode(j).lambda; }
  std::string mode_descriptor(std::size_t j) const;
  double eigenfunction(std::size_t j, const Point& p) const;

  // Uniform bounds for a single mode: sup norm and a Lipschitz constant with
  // respect to the geodesic distance.
  double mode_sup_bound(std::size_t j) const;
  double mode_lipschitz_bound(std::size_t j) const;

  // Number of eigenvalues <= lam in the enumerated table (Weyl checks).
  std::size_t eigen_count_below(double lam) const;

  // Heat kernel p_t(p, q) of the heat semigroup with respect to the uniform
  // measure. truncation caps the analytic series (per-dimension frequency on
  // tori, degree on the sphere); the default applies the t*lambda <= 36 rule.
  // Throws std::invalid_argument for t <= 0 and std::runtime_error when the
  // requested truncation cannot push the series tail below tail_tol.
  double heat_kernel(double t, const Point& p, const Point& q,
                     int truncation = kAutoTruncation,
                     double tail_tol = 1e-9) const;
  HeatKernelInfo heat_kernel_info(double t, const Point& p, const Point& q,
                                  int truncation = kAutoTruncation,
                                  double tail_tol = 1e-9) const;

  // Green kernel G(p, q) = sum_{j>=2} e_j(p) e_j(q) / lambda_j. Evaluated in
  // closed or resummed form (exact for torus d=1 and the sphere; Ewald-split
  // series plus quadrature for torus d=2, where truncation caps the mode
  // sum). Coincident points are rejected for d = 2 (log singularity).
  double green_kernel(const Point& p, const Point& q,
                      int truncation = kAutoTruncation) const;

  double geodesic_distance(const Point& p, const Point& q) const;

  Point sample_point(RngStream& rng) const;
  std::vector<Point> sample_uniform(std::size_t n, RngStream& rng) const;

  static constexpr int kAutoTruncation = -1;

 private:
  ManifoldModel(ManifoldKind kind, int dim, std::size_t mode_cap);

  void enumerate_torus_modes(std::size_t cap);
  void enumerate_sphere_modes(std::size_t cap);

  ManifoldKind kind_;
  int dim_;
  std::vector<Mode> modes_;
};

// Finite linear combination of nonconstant eigenmodes: an element of the
// zero-mean test space. Coefficients are indexed by the flat mode index
// (j >= 2). Norm and regularity bounds are cached at construction.
class TestFunction {
 public:
  TestFunction(std::shared_ptr<const ManifoldModel> model,
               std::vector<std::pair<std::size_t, double>> coeffs);

  static TestFunction single_mode(std::shared_ptr<const ManifoldModel> model,
                                  std::size_t j, double coeff = 1.0);

  const ManifoldModel& model() const { return *model_; }
  std::shared_ptr<const ManifoldModel> model_ptr() const { return model_; }
  const std::vector<std::pair<std::size_t, double>>& coefficients() const {
    return coeffs_;
  }

  double evaluate(const Point& p) const;
  double l2_norm() const { return l2_norm_; }
  double sup_bound() const { return sup_bound_; }
  double lipschitz_bound() const { return lipschitz_bound_; }
  bool empty() const { return coeffs_.empty(); }

 private:
  std::shared_ptr<const ManifoldModel> model_;
  std::vector<std::pair<std::size_t, double>> coeffs_;
  double l2_norm_ = 0.0;
  double sup_bound_ = 0.0;
  double lipschitz_bound_ = 0.0;
};

// (f, G f) = sum_j c_j^2 / lambda_j, exact in coefficient space.
double green_form(const TestFunction& f);

// (f, S_t f) = sum_j exp(-t lambda_j) c_j^2.
double semigroup_form(const TestFunction& f, double t);

// Eigen-data dump (columns: j, eigenvalue, mode descriptor).
void dump_eigendata_csv(const ManifoldModel& model, std::size_t j_max,
                        const std::string& path);

}  // namespace dgff

#include "dgff/graph.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace dgff {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_connected(const Eigen::MatrixXd& c) {
  const auto n = c.rows();
  std::vector<char> seen(n, 0);
  std::vector<Eigen::Index> stack{0};
  seen[0] = 1;
  Eigen::Index count = 1;
  while (!stack.empty()) {
    const Eigen::Index v = stack.back();
    stack.pop_back();
    for (Eigen::Index w = 0; w < n; ++w) {
      if (!seen[w] && c(v, w) > 0.0) {
        seen[w] = 1;
        ++count;
        stack.push_back(w);
      }
    }
  }
  if (count != n) {
    throw std::invalid_argument(
        "WeightedGraph: not connected through positive conductances");
  }
}

}  // namespace

GridRealization sample_grid(std::shared_ptr<const ManifoldModel> model,
                            std::size_t n, std::uint64_t master_seed,
                            std::uint64_t stream_tag) {
  GridRealization g;
  g.model = model;
  RngStream rng = RngStream::derive(
      master_seed, {RngStream::kGridSample, n, stream_tag});
  g.points = model->sample_uniform(n, rng);
  g.provenance = GridProvenance::kIidSample;
  g.seed = master_seed;
  g.stream = stream_tag;
  return g;
}

WeightedGraph::WeightedGraph(GridRealization grid, Eigen::MatrixXd conductance)
    : grid_(std::move(grid)), conductance_(std::move(conductance)) {
  const auto n = conductance_.rows();
  if (n != conductance_.cols() ||
      static_cast<std::size_t>(n) != grid_.size()) {
    throw std::invalid_argument("WeightedGraph: shape mismatch");
  }
  if (n < 2) throw std::invalid_argument("WeightedGraph: need >= 2 vertices");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (conductance_(i, i) != 0.0) {
      throw std::invalid_argument("WeightedGraph: nonzero diagonal");
    }
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double c = conductance_(i, j);
      if (!(c >= 0.0) || c != conductance_(j, i)) {
        throw std::invalid_argument(
            "WeightedGraph: conductances must be symmetric and >= 0");
      }
    }
  }
  check_connected(conductance_);
}

WeightedGraph build_heat_kernel_graph(const GridRealization& grid, double t) {
  if (!(t > 0.0)) {
    throw std::invalid_argument("build_heat_kernel_graph: t must be > 0");
  }
  const std::size_t n = grid.size();
  if (n < 2) {
    throw std::invalid_argument("build_heat_kernel_graph: need N >= 2");
  }
  const ManifoldModel& model = *grid.model;
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
  const double scale = 1.0 / (static_cast<double>(n) * t);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double w =
          model.heat_kernel(t, grid.points[i], grid.points[j]) * scale;
      c(i, j) = w;
      c(j, i) = w;
    }
  }
  return WeightedGraph(grid, std::move(c));
}

TorusLattice build_torus_lattice(std::size_t n_per_side, int d) {
  if (d != 1 && d != 2) {
    throw std::invalid_argument("build_torus_lattice: d must be 1 or 2");
  }
  if (n_per_side < 3) {
    throw std::invalid_argument(
        "build_torus_lattice: need at least 3 points per side");
  }
  GridRealization grid;
  grid.model = ManifoldModel::torus(d);
  grid.provenance = GridProvenance::kLattice;
  const double cond = static_cast<double>(n_per_side) * n_per_side /
                      (4.0 * kPi * kPi);
  if (d == 1) {
    grid.points.resize(n_per_side);
    for (std::size_t i = 0; i < n_per_side; ++i) {
      grid.points[i] = {static_cast<double>(i) / n_per_side, 0.0, 0.0};
    }
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n_per_side, n_per_side);
    for (std::size_t i = 0; i < n_per_side; ++i) {
      const std::size_t j = (i + 1) % n_per_side;
      c(i, j) += cond;
      c(j, i) += cond;
    }
    return {grid, WeightedGraph(grid, std::move(c))};
  }
  const std::size_t n = n_per_side * n_per_side;
  grid.points.resize(n);
  for (std::size_t a = 0; a < n_per_side; ++a) {
    for (std::size_t b = 0; b < n_per_side; ++b) {
      grid.points[a * n_per_side + b] = {
          static_cast<double>(a) / n_per_side,
          static_cast<double>(b) / n_per_side, 0.0};
    }
  }
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
  const auto idx = [&](std::size_t a, std::size_t b) {
    return a * n_per_side + b;
  };
  for (std::size_t a = 0; a < n_per_side; ++a) {
    for (std::size_t b = 0; b < n_per_side; ++b) {
      const std::size_t v = idx(a, b);
      const std::size_t r = idx((a + 1) % n_per_side, b);
      const std::size_t u = idx(a, (b + 1) % n_per_side);
      c(v, r) += cond;
      c(r, v) += cond;
      c(v, u) += cond;
      c(u, v) += cond;
    }
  }
  return {grid, WeightedGraph(grid, std::move(c))};
}

LaplacianMatrix assemble_laplacian(const WeightedGraph& graph) {
  const Eigen::MatrixXd& c = graph.conductance();
  Eigen::MatrixXd l = -c;
  l.diagonal() = c.rowwise().sum();
  return {std::move(l)};
}

SpectralData::SpectralData(Eigen::VectorXd eigenvalues,
                           Eigen::MatrixXd eigenvectors, bool constant_mode)
    : eigenvalues_(std::move(eigenvalues)),
      eigenvectors_(std::move(eigenvectors)),
      constant_mode_(constant_mode) {}

double SpectralData::orthonormality_defect() const {
  const auto n = eigenvectors_.cols();
  return (eigenvectors_.transpose() * eigenvectors_ -
          Eigen::MatrixXd::Identity(n, n))
      .cwiseAbs()
      .maxCoeff();
}

double SpectralData::reconstruction_defect(const LaplacianMatrix& l) const {
  return (eigenvectors_ * eigenvalues_.asDiagonal() *
              eigenvectors_.transpose() -
          l.m)
      .cwiseAbs()
      .maxCoeff();
}

SpectralData spectral_decompose(const LaplacianMatrix& l) {
  if (l.m.rows() != l.m.cols() || l.m.rows() < 2) {
    throw std::invalid_argument("spectral_decompose: bad matrix");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(l.m);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("spectral_decompose: eigensolver failed");
  }
  Eigen::VectorXd lam = es.eigenvalues();
  Eigen::MatrixXd u = es.eigenvectors();
  const double scale = std::max(std::abs(lam(lam.size() - 1)), 1.0);
  if (lam(1) < 1e-10 * scale) {
    throw std::runtime_error(
        "spectral_decompose: second eigenvalue is numerically zero (graph "
        "effectively disconnected)");
  }
  // The constant vector spans the kernel; flag whether eigenvector 0 agrees.
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(u.rows()));
  const double align = std::abs(u.col(0).sum()) * inv_sqrt_n;
  return SpectralData(std::move(lam), std::move(u), align > 1.0 - 1e-8);
}

double spectral_gap(const SpectralData& sd) { return sd.gap(); }

Eigen::VectorXd discrete_green_apply(const SpectralData& sd,
                                     const Eigen::VectorXd& f) {
  if (f.size() != static_cast<Eigen::Index>(sd.size())) {
    throw std::invalid_argument("discrete_green_apply: length mismatch");
  }
  const auto n = f.size();
  const Eigen::MatrixXd& u = sd.eigenvectors();
  Eigen::VectorXd coef = u.rightCols(n - 1).transpose() * f;
  coef.array() /= sd.eigenvalues().tail(n - 1).array();
  return u.rightCols(n - 1) * coef;
}

Eigen::VectorXd discrete_semigroup_apply(const SpectralData& sd, double t,
                                         const Eigen::VectorXd& f) {
  if (t < 0.0) {
    throw std::invalid_argument("discrete_semigroup_apply: t must be >= 0");
  }
  if (f.size() != static_cast<Eigen::Index>(sd.size())) {
    throw std::invalid_argument("discrete_semigroup_apply: length mismatch");
  }
  const Eigen::MatrixXd& u = sd.eigenvectors();
  Eigen::VectorXd coef = u.transpose() * f;
  coef.array() *= (-t * sd.eigenvalues().array()).exp();
  return u * coef;
}

Eigen::MatrixXd discrete_green_matrix(const SpectralData& sd) {
  const auto n = static_cast<Eigen::Index>(sd.size());
  const Eigen::MatrixXd& u = sd.eigenvectors();
  return u.rightCols(n - 1) *
         sd.eigenvalues().tail(n - 1).cwiseInverse().asDiagonal() *
         u.rightCols(n - 1).transpose();
}

Eigen::VectorXd discretize_function(const TestFunction& f,
                                    const GridRealization& grid) {
  const std::size_t n = grid.size();
  Eigen::VectorXd v(n);
  for (std::size_t i = 0; i < n; ++i) v(i) = f.evaluate(grid.points[i]);
  v.array() -= v.mean();
  return v;
}

namespace {

void require_zero_sum(const Eigen::VectorXd& fn, const char* who) {
  const double s = fn.sum();
  if (std::abs(s) > 1e-9 * std::max(fn.norm(), 1e-300)) {
    throw std::invalid_argument(std::string(who) +
                                ": input must be zero-sum");
  }
}

}  // namespace

double green_quadratic_form(const SpectralData& sd,
                            const Eigen::VectorXd& fn) {
  if (fn.size() != static_cast<Eigen::Index>(sd.size())) {
    throw std::invalid_argument("green_quadratic_form: length mismatch");
  }
  if (fn.norm() == 0.0) return 0.0;
  require_zero_sum(fn, "green_quadratic_form");
  const auto n = fn.size();
  const Eigen::VectorXd coef =
      sd.eigenvectors().rightCols(n - 1).transpose() * fn;
  return (coef.array().square() / sd.eigenvalues().tail(n - 1).array()).sum() /
         static_cast<double>(n);
}

double semigroup_quadratic_form(const SpectralData& sd, double t,
                                const Eigen::VectorXd& fn) {
  if (t < 0.0) {
    throw std::invalid_argument("semigroup_quadratic_form: t must be >= 0");
  }
  if (fn.size() != static_cast<Eigen::Index>(sd.size())) {
    throw std::invalid_argument("semigroup_quadratic_form: length mismatch");
  }
  if (fn.norm() == 0.0) return 0.0;
  require_zero_sum(fn, "semigroup_quadratic_form");
  const Eigen::VectorXd coef = sd.eigenvectors().transpose() * fn;
  return (coef.array().square() * (-t * sd.eigenvalues().array()).exp())
             .sum() /
         static_cast<double>(fn.size());
}

void dump_spectrum_csv(const SpectralData& sd, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "# schema: dgff.spectrum.v1\n";
  out << "index,eigenvalue\n";
  char buf[40];
  for (std::size_t i = 0; i < sd.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", sd.eigenvalues()(i));
    out << (i + 1) << ',' << buf << '\n';
  }
}

void dump_laplacian_csv(const LaplacianMatrix& l, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "# schema: dgff.laplacian.v1\n";
  out << "row,col,value\n";
  char buf[40];
  for (Eigen::Index i = 0; i < l.m.rows(); ++i) {
    for (Eigen::Index j = 0; j < l.m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", l.m(i, j));
      out << i << ',' << j << ',' << buf << '\n';
    }
  }
}

}  // namespace dgff

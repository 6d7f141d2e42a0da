#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "dgff/manifold.hpp"

namespace dgff {

enum class GridProvenance { kIidSample, kLattice };

// An ordered finite set of manifold points carrying its provenance.
struct GridRealization {
  std::shared_ptr<const ManifoldModel> model;
  std::vector<Point> points;
  GridProvenance provenance = GridProvenance::kIidSample;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  std::size_t size() const { return points.size(); }
};

GridRealization sample_grid(std::shared_ptr<const ManifoldModel> model,
                            std::size_t n, std::uint64_t master_seed,
                            std::uint64_t stream_tag);

// Grid points with symmetric nonnegative conductances and zero diagonal.
// Connectivity through strictly positive conductances is checked on
// construction.
class WeightedGraph {
 public:
  WeightedGraph(GridRealization grid, Eigen::MatrixXd conductance);

  const GridRealization& grid() const { return grid_; }
  const Eigen::MatrixXd& conductance() const { return conductance_; }
  std::size_t size() const { return grid_.size(); }

 private:
  GridRealization grid_;
  Eigen::MatrixXd conductance_;
};

struct LaplacianMatrix {
  Eigen::MatrixXd m;
  std::size_t size() const { return static_cast<std::size_t>(m.rows()); }
};

// Full eigendecomposition of a graph Laplacian, eigenvalues ascending.
// Index 0 is the constant mode.
class SpectralData {
 public:
  SpectralData(Eigen::VectorXd eigenvalues, Eigen::MatrixXd eigenvectors,
               bool constant_mode);

  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  const Eigen::MatrixXd& eigenvectors() const { return eigenvectors_; }
  std::size_t size() const {
    return static_cast<std::size_t>(eigenvalues_.size());
  }
  double gap() const { return eigenvalues_(1); }
  bool constant_mode() const { return constant_mode_; }

  // max |U^T U - I| and max |U diag(lambda) U^T - L| for validation.
  double orthonormality_defect() const;
  double reconstruction_defect(const LaplacianMatrix& l) const;

 private:
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
  bool constant_mode_;
};

// Conductances c_vw = p_t(v, w) / (N t) on the complete graph over the grid.
WeightedGraph build_heat_kernel_graph(const GridRealization& grid, double t);

struct TorusLattice {
  GridRealization grid;
  WeightedGraph graph;
};

// Equally spaced lattice on T^d with nearest-neighbor conductances
// n^2 / (4 pi^2) per coordinate direction (n = points per side).
TorusLattice build_torus_lattice(std::size_t n_per_side, int d);

LaplacianMatrix assemble_laplacian(const WeightedGraph& graph);

// Throws when the second eigenvalue is numerically zero (disconnected).
SpectralData spectral_decompose(const LaplacianMatrix& l);

double spectral_gap(const SpectralData& sd);

// G^V f = sum_{j>=2} (u_j . f) u_j / lambda_j.
Eigen::VectorXd discrete_green_apply(const SpectralData& sd,
                                     const Eigen::VectorXd& f);

// exp(-tL) f.
Eigen::VectorXd discrete_semigroup_apply(const SpectralData& sd, double t,
                                         const Eigen::VectorXd& f);

// Dense G^V (pseudo-inverse of L vanishing on constants).
Eigen::MatrixXd discrete_green_matrix(const SpectralData& sd);

// f(p_i) minus the empirical mean; exactly zero-sum.
Eigen::VectorXd discretize_function(const TestFunction& f,
                                    const GridRealization& grid);

// N^{-1} (f_N, G_N f_N); rejects input that is not zero-sum.
double green_quadratic_form(const SpectralData& sd, const Eigen::VectorXd& fn);

// N^{-1} (f_N, S_t^N f_N).
double semigroup_quadratic_form(const SpectralData& sd, double t,
                                const Eigen::VectorXd& fn);

void dump_spectrum_csv(const SpectralData& sd, const std::string& path);
void dump_laplacian_csv(const LaplacianMatrix& l, const std::string& path);

}  // namespace dgff

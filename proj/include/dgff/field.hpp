#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "dgff/graph.hpp"
#include "dgff/rng.hpp"

namespace dgff {

// One realization of the zero-average discrete Gaussian free field.
struct DgffSample {
  Eigen::VectorXd values;
  std::uint64_t stream = 0;
  std::uint64_t draw_index = 0;
};

// Spectral synthesis: phi = sum_{j>=2} xi_j u_j / sqrt(lambda_j) with
// independent standard normals xi_j, so the covariance is exactly G^V and
// samples live in the zero-sum hyperplane. Entries are recentered to remove
// the numerical leak onto the constant mode.
std::vector<DgffSample> sample_dgff(const SpectralData& sd, RngStream& rng,
                                    std::size_t count,
                                    std::uint64_t stream_tag = 0);

// <phi, f> = (1/|V|) sum_p f(p) phi(p).
double pair_with_function(const DgffSample& sample, const TestFunction& f,
                          const GridRealization& grid);

// A proper vertex subset with its principal Laplacian block.
class SubsetProblem {
 public:
  SubsetProblem(const LaplacianMatrix& l, std::vector<std::size_t> subset);

  const std::vector<std::size_t>& subset() const { return subset_; }
  const std::vector<std::size_t>& complement() const { return complement_; }
  const Eigen::MatrixXd& l_uu() const { return l_uu_; }
  const Eigen::MatrixXd& l_ub() const { return l_ub_; }

 private:
  std::vector<std::size_t> subset_;
  std::vector<std::size_t> complement_;
  Eigen::MatrixXd l_uu_;  // principal block on U
  Eigen::MatrixXd l_ub_;  // coupling U -> complement
};

// Solves the discrete Dirichlet problem L_UU h = -L_UB g; returns the full
// vector equal to h on U and to the boundary values elsewhere.
Eigen::VectorXd harmonic_extension(const LaplacianMatrix& l,
                                   const SubsetProblem& problem,
                                   const Eigen::VectorXd& boundary_values);

// (L_UU)^{-1}: occupation-time Green's function of the walk killed on
// exiting U.
Eigen::MatrixXd killed_green(const LaplacianMatrix& l,
                             const SubsetProblem& problem);

// max |A G^V A^T - (L_UU)^{-1}| over U x U, where A maps phi to
// phi(v) - E_v[phi at exit]. Zero in exact arithmetic.
double markov_decomposition_check(const SpectralData& sd,
                                  const LaplacianMatrix& l,
                                  const SubsetProblem& problem);

// Compares quadrature of int_0^inf (S_t - Pi) dt against G^V entrywise;
// returns the max discrepancy.
double occupation_identity_check(const SpectralData& sd);

// Unbiased empirical covariance of a set of samples.
Eigen::MatrixXd covariance_estimate(const std::vector<DgffSample>& samples);

void dump_sample_csv(const DgffSample& sample, const std::string& path);

}  // namespace dgff

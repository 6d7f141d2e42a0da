#include "dgff/field.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "dgff/quadrature.hpp"

namespace dgff {

std::vector<DgffSample> sample_dgff(const SpectralData& sd, RngStream& rng,
                                    std::size_t count,
                                    std::uint64_t stream_tag) {
  if (count < 1) throw std::invalid_argument("sample_dgff: count must be >= 1");
  const auto n = static_cast<Eigen::Index>(sd.size());
  const Eigen::MatrixXd& u = sd.eigenvectors();
  const Eigen::VectorXd amp =
      sd.eigenvalues().tail(n - 1).cwiseSqrt().cwiseInverse();
  std::vector<DgffSample> out;
  out.reserve(count);
  Eigen::VectorXd xi(n - 1);
  for (std::size_t d = 0; d < count; ++d) {
    for (Eigen::Index j = 0; j < n - 1; ++j) xi(j) = rng.normal();
    DgffSample s;
    s.values = u.rightCols(n - 1) * amp.cwiseProduct(xi);
    s.values.array() -= s.values.mean();
    s.stream = stream_tag;
    s.draw_index = d;
    out.push_back(std::move(s));
  }
  return out;
}

double pair_with_function(const DgffSample& sample, const TestFunction& f,
                          const GridRealization& grid) {
  const std::size_t n = grid.size();
  if (sample.values.size() != static_cast<Eigen::Index>(n)) {
    throw std::invalid_argument("pair_with_function: size mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += f.evaluate(grid.points[i]) * sample.values(i);
  }
  return acc / static_cast<double>(n);
}

SubsetProblem::SubsetProblem(const LaplacianMatrix& l,
                             std::vector<std::size_t> subset)
    : subset_(std::move(subset)) {
  const std::size_t n = l.size();
  std::sort(subset_.begin(), subset_.end());
  subset_.erase(std::unique(subset_.begin(), subset_.end()), subset_.end());
  if (subset_.empty() || subset_.size() >= n) {
    throw std::invalid_argument(
        "SubsetProblem: subset must be nonempty and proper");
  }
  if (subset_.back() >= n) {
    throw std::invalid_argument("SubsetProblem: vertex index out of range");
  }
  std::vector<char> in(n, 0);
  for (std::size_t v : subset_) in[v] = 1;
  for (std::size_t v = 0; v < n; ++v) {
    if (!in[v]) complement_.push_back(v);
  }
  const auto k = static_cast<Eigen::Index>(subset_.size());
  const auto m = static_cast<Eigen::Index>(complement_.size());
  l_uu_.resize(k, k);
  l_ub_.resize(k, m);
  for (Eigen::Index r = 0; r < k; ++r) {
    for (Eigen::Index c = 0; c < k; ++c) {
      l_uu_(r, c) = l.m(subset_[r], subset_[c]);
    }
    for (Eigen::Index c = 0; c < m; ++c) {
      l_ub_(r, c) = l.m(subset_[r], complement_[c]);
    }
  }
}

namespace {

Eigen::LDLT<Eigen::MatrixXd> factor_l_uu(const SubsetProblem& problem) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(problem.l_uu());
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw std::runtime_error(
        "SubsetProblem: principal Laplacian block not positive definite "
        "(disconnected input?)");
  }
  return ldlt;
}

}  // namespace

Eigen::VectorXd harmonic_extension(const LaplacianMatrix& l,
                                   const SubsetProblem& problem,
                                   const Eigen::VectorXd& boundary_values) {
  const auto m = static_cast<Eigen::Index>(problem.complement().size());
  if (boundary_values.size() != m) {
    throw std::invalid_argument(
        "harmonic_extension: boundary values must be indexed by the "
        "complement");
  }
  const auto ldlt = factor_l_uu(problem);
  const Eigen::VectorXd h = ldlt.solve(-problem.l_ub() * boundary_values);
  Eigen::VectorXd full(l.size());
  for (Eigen::Index r = 0; r < static_cast<Eigen::Index>(problem.subset().size()); ++r) {
    full(problem.subset()[r]) = h(r);
  }
  for (Eigen::Index c = 0; c < m; ++c) {
    full(problem.complement()[c]) = boundary_values(c);
  }
  return full;
}

Eigen::MatrixXd killed_green(const LaplacianMatrix& l,
                             const SubsetProblem& problem) {
  (void)l;
  const auto ldlt = factor_l_uu(problem);
  const auto k = problem.l_uu().rows();
  return ldlt.solve(Eigen::MatrixXd::Identity(k, k));
}

double markov_decomposition_check(const SpectralData& sd,
                                  const LaplacianMatrix& l,
                                  const SubsetProblem& problem) {
  const auto n = static_cast<Eigen::Index>(l.size());
  const auto k = static_cast<Eigen::Index>(problem.subset().size());
  const auto ldlt = factor_l_uu(problem);
  // Rows of A realize phi(v) - E_v[phi(X_T)]: identity on U, minus the
  // harmonic-extension operator on the complement.
  const Eigen::MatrixXd h = ldlt.solve(-problem.l_ub());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(k, n);
  for (Eigen::Index r = 0; r < k; ++r) a(r, problem.subset()[r]) = 1.0;
  for (Eigen::Index c = 0;
       c < static_cast<Eigen::Index>(problem.complement().size()); ++c) {
    for (Eigen::Index r = 0; r < k; ++r) {
      a(r, problem.complement()[c]) = -h(r, c);
    }
  }
  const Eigen::MatrixXd cov = a * discrete_green_matrix(sd) * a.transpose();
  const Eigen::MatrixXd gu = killed_green(l, problem);
  return (cov - gu).cwiseAbs().maxCoeff();
}

double occupation_identity_check(const SpectralData& sd) {
  const double gap = sd.gap();
  if (gap < 1e-8) {
    throw std::runtime_error(
        "occupation_identity_check: spectral gap below quadrature threshold");
  }
  const auto n = static_cast<Eigen::Index>(sd.size());
  // Truncate where the integrand is below 1e-12, then integrate S_t - Pi on
  // geometric panels covering the time scales 1/lambda_max .. 1/gap.
  const double t_max = -std::log(1e-12) / gap;
  const Eigen::MatrixXd& u = sd.eigenvectors();
  const Eigen::MatrixXd pi = Eigen::MatrixXd::Constant(
      n, n, 1.0 / static_cast<double>(n));
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
  const GaussRule& rule = gauss_legendre(16);
  double hi = t_max;
  const int depth = 48;
  for (int panel = 0; panel <= depth; ++panel) {
    const double lo = panel == depth ? 0.0 : hi * 0.5;
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    for (int q = 0; q < 16; ++q) {
      const double t = mid + half * rule.nodes[q];
      Eigen::VectorXd e = (-t * sd.eigenvalues().array()).exp();
      acc.noalias() +=
          (rule.weights[q] * half) *
          (u * e.asDiagonal() * u.transpose() - pi);
    }
    hi = lo;
  }
  return (acc - discrete_green_matrix(sd)).cwiseAbs().maxCoeff();
}

Eigen::MatrixXd covariance_estimate(const std::vector<DgffSample>& samples) {
  if (samples.size() < 2) {
    throw std::invalid_argument("covariance_estimate: need >= 2 samples");
  }
  const auto n = samples.front().values.size();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
  for (const auto& s : samples) mean += s.values;
  mean /= static_cast<double>(samples.size());
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n, n);
  for (const auto& s : samples) {
    const Eigen::VectorXd d = s.values - mean;
    cov.noalias() += d * d.transpose();
  }
  return cov / static_cast<double>(samples.size() - 1);
}

void dump_sample_csv(const DgffSample& sample, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "# schema: dgff.sample.v1\n";
  out << "vertex,value\n";
  char buf[40];
  for (Eigen::Index i = 0; i < sample.values.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", sample.values(i));
    out << i << ',' << buf << '\n';
  }
}

}  // namespace dgff

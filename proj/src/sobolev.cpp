#include "dgff/sobolev.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace dgff {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

// Stratified uniform probes: full stratification on T^1, a g x g jittered
// grid plus uniform remainder on T^2 and (z, phi) coordinates of S^2. Each
// probe is marginally uniform, so volumes stay unbiased.
std::vector<Point> stratified_probes(const ManifoldModel& model,
                                     std::size_t m, RngStream& rng) {
  std::vector<Point> probes;
  probes.reserve(m);
  switch (model.kind()) {
    case ManifoldKind::kTorus1: {
      for (std::size_t i = 0; i < m; ++i) {
        probes.push_back(
            {(static_cast<double>(i) + rng.uniform()) / m, 0.0, 0.0});
      }
      break;
    }
    case ManifoldKind::kTorus2: {
      const std::size_t g = static_cast<std::size_t>(std::sqrt(
          static_cast<double>(m)));
      for (std::size_t a = 0; a < g; ++a) {
        for (std::size_t b = 0; b < g; ++b) {
          probes.push_back({(a + rng.uniform()) / g, (b + rng.uniform()) / g,
                            0.0});
        }
      }
      while (probes.size() < m) probes.push_back(model.sample_point(rng));
      break;
    }
    case ManifoldKind::kSphere2: {
      const std::size_t g = static_cast<std::size_t>(std::sqrt(
          static_cast<double>(m)));
      for (std::size_t a = 0; a < g; ++a) {
        for (std::size_t b = 0; b < g; ++b) {
          const double z = 2.0 * (a + rng.uniform()) / g - 1.0;
          const double phi = kTwoPi * (b + rng.uniform()) / g;
          const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
          probes.push_back({r * std::cos(phi), r * std::sin(phi), z});
        }
      }
      while (probes.size() < m) probes.push_back(model.sample_point(rng));
      break;
    }
  }
  return probes;
}

}  // namespace

VoronoiTessellation::VoronoiTessellation(const GridRealization& grid,
                                         std::size_t probes, RngStream& rng)
    : grid_(grid), probes_(probes) {
  const std::size_t n = grid_.size();
  if (n == 0) throw std::invalid_argument("VoronoiTessellation: empty grid");
  if (probes_ == 0) {
    throw std::invalid_argument("VoronoiTessellation: need probes >= 1");
  }
  cell_probes_.resize(n);
  cell_max_dist_.assign(n, 0.0);
  const ManifoldModel& model = *grid_.model;
  const std::vector<Point> pts = stratified_probes(model, probes_, rng);
  for (const Point& p : pts) {
    std::size_t best = 0;
    double best_d = model.geodesic_distance(p, grid_.points[0]);
    for (std::size_t i = 1; i < n; ++i) {
      const double d = model.geodesic_distance(p, grid_.points[i]);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    cell_probes_[best].push_back(p);
    cell_max_dist_[best] = std::max(cell_max_dist_[best], best_d);
    fill_radius_ = std::max(fill_radius_, best_d);
  }
  for (const auto& c : cell_probes_) {
    if (c.empty()) has_empty_cell_ = true;
  }
}

double VoronoiTessellation::cell_volume_se(std::size_t i) const {
  const double v = cell_volume(i);
  return std::sqrt(v * (1.0 - v) / static_cast<double>(probes_));
}

void VoronoiTessellation::summary_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "# schema: dgff.tessellation.v1 probes=" << probes_ << "\n";
  out << "cell,volume,volume_se,max_probe_distance\n";
  char buf[160];
  for (std::size_t i = 0; i < cell_count(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g", i,
                  cell_volume(i), cell_volume_se(i), cell_max_dist_[i]);
    out << buf << '\n';
  }
}

VoronoiTessellation voronoi_assign(const GridRealization& grid,
                                   std::size_t probes, RngStream& rng) {
  return VoronoiTessellation(grid, probes, rng);
}

CellAverage cell_average(const TestFunction& f,
                         const VoronoiTessellation& tess, std::size_t i) {
  const auto& pts = tess.cell_probe_points(i);
  if (pts.empty()) {
    throw std::runtime_error("cell_average: empty Voronoi cell (raise the "
                             "probe count)");
  }
  double acc = 0.0, acc2 = 0.0;
  for (const Point& p : pts) {
    const double v = f.evaluate(p);
    acc += v;
    acc2 += v * v;
  }
  const double m = static_cast<double>(pts.size());
  CellAverage out;
  out.mean = acc / m;
  out.probes = pts.size();
  if (pts.size() > 1) {
    const double var = std::max(0.0, (acc2 - acc * acc / m) / (m - 1.0));
    out.standard_error = std::sqrt(var / m);
  }
  return out;
}

Eigen::VectorXd cell_average_mode(const ManifoldModel& model, std::size_t j,
                                  const VoronoiTessellation& tess) {
  const std::size_t n = tess.cell_count();
  Eigen::VectorXd avg(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& pts = tess.cell_probe_points(i);
    if (pts.empty()) {
      throw std::runtime_error("cell_average_mode: empty Voronoi cell");
    }
    double acc = 0.0;
    for (const Point& p : pts) acc += model.eigenfunction(j, p);
    avg(i) = acc / static_cast<double>(pts.size());
  }
  return avg;
}

double lift_pair(const DgffSample& sample, const VoronoiTessellation& tess,
                 const TestFunction& f) {
  const std::size_t n = tess.cell_count();
  if (sample.values.size() != static_cast<Eigen::Index>(n)) {
    throw std::invalid_argument("lift_pair: size mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += sample.values(i) * cell_average(f, tess, i).mean;
  }
  return acc / static_cast<double>(n);
}

double lift_pair_with_averages(const DgffSample& sample,
                               const Eigen::VectorXd& averages) {
  if (sample.values.size() != averages.size()) {
    throw std::invalid_argument("lift_pair_with_averages: size mismatch");
  }
  return sample.values.dot(averages) / static_cast<double>(averages.size());
}

namespace {

// Tail of sum_{j>J} lambda_j^{-s} ||e_j||_inf^2 estimated from the model's
// enumerated spectrum plus an integral remainder under Weyl growth.
double bound_series_tail(const ManifoldModel& model, double s,
                         std::size_t j_from) {
  double tail = 0.0;
  const std::size_t cap = model.mode_count();
  for (std::size_t j = j_from; j <= cap; ++j) {
    const double b = model.mode_sup_bound(j);
    tail += std::pow(model.eigenvalue(j), -s) * b * b;
  }
  // Remainder beyond the enumeration: lambda_j ~ c j^{2/d} and
  // ||e_j||_inf^2 <= C lambda^{(d-1)/2}; integrate the resulting power law.
  const int d = model.dim();
  const double lam_cap = model.eigenvalue(cap);
  const double p = s - 0.5 * (d - 1);
  if (p > 0.5 * d) {
    // integral_{lam_cap}^inf 2 lam^{-p} dN(lam) with dN ~ c lam^{d/2-1} dlam;
    // the factor 2 is the sup-norm-squared constant on all three models.
    const double c = static_cast<double>(cap) / std::pow(lam_cap, 0.5 * d);
    const double expo = p - 0.5 * d;
    tail += 2.0 * c * 0.5 * d / expo * std::pow(lam_cap, -expo);
  }
  return tail;
}

}  // namespace

SobolevNorm sobolev_neg_norm(const ManifoldModel& model,
                             const std::vector<double>& pairings,
                             const SobolevParams& params) {
  if (params.j_max < 2) {
    throw std::invalid_argument("sobolev_neg_norm: j_max must be >= 2");
  }
  if (pairings.size() != params.j_max - 1) {
    throw std::invalid_argument(
        "sobolev_neg_norm: need one pairing per mode j = 2..j_max");
  }
  SobolevNorm out;
  out.summable = params.s > model.dim() - 0.5;
  for (std::size_t j = 2; j <= params.j_max; ++j) {
    const double p = pairings[j - 2];
    out.value += std::pow(model.eigenvalue(j), -params.s) * p * p;
  }
  out.tail_bound = bound_series_tail(model, params.s, params.j_max + 1);
  return out;
}

TightnessResult tightness_statistic(const ManifoldModel& model,
                                    const SpectralData& sd,
                                    const VoronoiTessellation& tess,
                                    const SobolevParams& params,
                                    std::size_t draws, RngStream& rng) {
  if (draws < 1) {
    throw std::invalid_argument("tightness_statistic: draws must be >= 1");
  }
  const std::size_t n = tess.cell_count();
  const std::size_t jm = params.j_max;
  // Precompute cell averages of every mode and the spectral weights.
  Eigen::MatrixXd avg(n, jm - 1);
  Eigen::VectorXd weight(jm - 1);
  for (std::size_t j = 2; j <= jm; ++j) {
    avg.col(j - 2) = cell_average_mode(model, j, tess);
    weight(j - 2) = std::pow(model.eigenvalue(j), -params.s);
  }
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  double acc = 0.0, acc2 = 0.0;
  const auto samples = sample_dgff(sd, rng, draws);
  for (const auto& s : samples) {
    const Eigen::VectorXd pairings =
        (avg.transpose() * s.values) * (sqrt_n / static_cast<double>(n));
    const double norm2 = (weight.array() * pairings.array().square()).sum();
    acc += norm2;
    acc2 += norm2 * norm2;
  }
  const double m = static_cast<double>(draws);
  TightnessResult out;
  out.draws = draws;
  out.statistic = acc / m;
  if (draws > 1) {
    const double var = std::max(0.0, (acc2 - acc * acc / m) / (m - 1.0));
    out.statistic_se = std::sqrt(var / m);
  }
  double series = 0.0;
  for (std::size_t j = 2; j <= jm; ++j) {
    const double b = model.mode_sup_bound(j);
    series += std::pow(model.eigenvalue(j), -params.s) * b * b;
  }
  out.bound_series = series / sd.gap();
  return out;
}

double fill_radius(const VoronoiTessellation& tess) {
  return tess.fill_radius();
}

void dump_pairings_csv(const ManifoldModel& model,
                       const VoronoiTessellation& tess,
                       const DgffSample& sample, const SobolevParams& params,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "# schema: dgff.pairings.v1 s=" << params.s << "\n";
  out << "j,lambda,pairing\n";
  const std::size_t n = tess.cell_count();
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  char buf[120];
  for (std::size_t j = 2; j <= params.j_max; ++j) {
    const Eigen::VectorXd avg = cell_average_mode(model, j, tess);
    const double pairing =
        sample.values.dot(avg) * sqrt_n / static_cast<double>(n);
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g", j,
                  model.eigenvalue(j), pairing);
    out << buf << '\n';
  }
}

}  // namespace dgff

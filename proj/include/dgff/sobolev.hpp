#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "dgff/field.hpp"
#include "dgff/graph.hpp"

namespace dgff {

// Monte Carlo Voronoi tessellation of a grid: stratified uniform probes
// assigned to the nearest grid point (ties to the lowest index). Volumes are
// probe fractions and sum to 1 exactly; the fill radius estimate is the max
// probe-to-center distance, a lower bound of the true value.
class VoronoiTessellation {
 public:
  VoronoiTessellation(const GridRealization& grid, std::size_t probes,
                      RngStream& rng);

  std::size_t cell_count() const { return cell_probes_.size(); }
  std::size_t probe_count() const { return probes_; }
  const std::vector<Point>& cell_probe_points(std::size_t i) const {
    return cell_probes_.at(i);
  }
  double cell_volume(std::size_t i) const {
    return static_cast<double>(cell_probes_.at(i).size()) /
           static_cast<double>(probes_);
  }
  double cell_volume_se(std::size_t i) const;
  double fill_radius() const { return fill_radius_; }
  bool has_empty_cell() const { return has_empty_cell_; }
  const GridRealization& grid() const { return grid_; }
  double cell_max_distance(std::size_t i) const {
    return cell_max_dist_.at(i);
  }

  void summary_csv(const std::string& path) const;

 private:
  GridRealization grid_;
  std::size_t probes_;
  std::vector<std::vector<Point>> cell_probes_;
  std::vector<double> cell_max_dist_;
  double fill_radius_ = 0.0;
  bool has_empty_cell_ = false;
};

VoronoiTessellation voronoi_assign(const GridRealization& grid,
                                   std::size_t probes, RngStream& rng);

struct CellAverage {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t probes = 0;
};

// Monte Carlo average of f over cell i using the cell's probes.
CellAverage cell_average(const TestFunction& f,
                         const VoronoiTessellation& tess, std::size_t i);

// Cell averages of a single eigenmode, all cells at once.
Eigen::VectorXd cell_average_mode(const ManifoldModel& model, std::size_t j,
                                  const VoronoiTessellation& tess);

// <lifted phi, f> = (1/N) sum_i phi(p_i) * cell_average(f, i).
double lift_pair(const DgffSample& sample, const VoronoiTessellation& tess,
                 const TestFunction& f);
double lift_pair_with_averages(const DgffSample& sample,
                               const Eigen::VectorXd& averages);

struct SobolevParams {
  double s = 1.0;
  std::size_t j_max = 41;  // truncation: flat mode index cap (inclusive)
};

struct SobolevNorm {
  double value = 0.0;       // truncated sum_{j=2}^{J} lambda_j^{-s} pairing_j^2
  double tail_bound = 0.0;  // a-priori tail estimate from Weyl growth
  bool summable = true;     // false when s <= d - 1/2
};

// Truncated dual Sobolev norm of a field given its pairings with e_j,
// j = 2..J (pairings[0] corresponds to j = 2).
SobolevNorm sobolev_neg_norm(const ManifoldModel& model,
                             const std::vector<double>& pairings,
                             const SobolevParams& params);

struct TightnessResult {
  double statistic = 0.0;     // MC estimate of E || sqrt(N) lifted phi ||_{-s}^2
  double bound_series = 0.0;  // (1/lambda2_N) sum_j lambda_j^{-s} ||e_j||_inf^2
  double statistic_se = 0.0;
  std::size_t draws = 0;
};

TightnessResult tightness_statistic(const ManifoldModel& model,
                                    const SpectralData& sd,
                                    const VoronoiTessellation& tess,
                                    const SobolevParams& params,
                                    std::size_t draws, RngStream& rng);

double fill_radius(const VoronoiTessellation& tess);

// Lifted-pairing dump (columns: j, lambda_j, pairing) for one sample.
void dump_pairings_csv(const ManifoldModel& model,
                       const VoronoiTessellation& tess,
                       const DgffSample& sample, const SobolevParams& params,
                       const std::string& path);

}  // namespace dgff

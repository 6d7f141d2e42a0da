#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "dgff/manifold.hpp"
#include "dgff/rng.hpp"

namespace dgff {

// Exact 1-Wasserstein distance between the empirical measure of points on
// the circle and the uniform measure: sort, form the CDF difference, center
// by its median (optimal rotation for the L1 cost), integrate.
double wasserstein1_circle(const std::vector<double>& points);

// Exact W1 between two empirical measures with uniform weights, by min-cost
// flow with geodesic costs. Point multisets may have different sizes as long
// as one size divides the other.
double wasserstein1_two_sample(const ManifoldModel& model,
                               const std::vector<Point>& a,
                               const std::vector<Point>& b);

struct W1Estimate {
  double estimate = 0.0;    // W1(points, reference sample)
  double bias_bound = 0.0;  // calibration estimate of W1(reference, uniform)
  std::size_t reference_size = 0;
};

// Two-sample surrogate for W1(empirical, uniform): exact transport against a
// fresh uniform reference of size >= 10 N (rounded up to a multiple of N).
// The triangle inequality brackets the truth within bias_bound, computed
// exactly on torus d=1 and by pair calibration elsewhere.
W1Estimate wasserstein1_estimate(std::shared_ptr<const ManifoldModel> model,
                                 const std::vector<Point>& points,
                                 std::size_t reference_size, RngStream& rng);

// Smallest bandwidth t' with w1 <= safety * t'^(d/2+2).
double select_bandwidth_wass(double w1, int d, double safety);

// Spectral gap (1 - exp(-t lambda2)) / t of the intermediate operator
// (1 - S_t)/t.
double intermediate_gap(double t, double lambda2);

// Measured gap errors |lambda2 of the n-point graph at t = 1/j minus the
// intermediate-operator gap|, on a (j, n) grid.
struct GapErrorTable {
  std::vector<int> j_values;          // ascending, starting at 1
  std::vector<std::size_t> n_values;  // ascending
  std::vector<std::vector<double>> error;  // error[j_idx][n_idx]

  double at(int j, std::size_t n) const;
};

struct ScheduleInput {
  std::size_t n = 0;
  double w1 = 0.0;
  double bias_bound = 0.0;
  double t_prime = 0.0;
};

struct ScheduleEntry {
  std::size_t n = 0;
  double w1 = 0.0;
  double bias_bound = 0.0;
  double t_prime = 0.0;
  int j = 0;          // 0 when uncovered
  double t = 0.0;     // 1/j when covered
  bool covered = false;
};

// Bandwidth schedule t_N = 1/j(N) built from measured data following the
// gap-convergence construction: n_j is the smallest measured n exceeding
// n_{j-1} whose measured gap error stays <= 1/j from n_j onward and which is
// at least the first index where t' drops below 1/j. Guarantees t_N >= t'_N
// and t_N nonincreasing over covered entries; entries that no j certifies
// are flagged uncovered.
class BandwidthSchedule {
 public:
  BandwidthSchedule(std::vector<ScheduleEntry> entries, double safety,
                    double exponent);

  const std::vector<ScheduleEntry>& entries() const { return entries_; }
  const ScheduleEntry& at(std::size_t n) const;
  double safety() const { return safety_; }
  double exponent() const { return exponent_; }

  void to_csv(const std::string& path) const;

 private:
  std::vector<ScheduleEntry> entries_;
  double safety_;
  double exponent_;
};

BandwidthSchedule gap_adjusted_schedule(const GapErrorTable& table,
                                        const std::vector<ScheduleInput>& t_prime,
                                        double safety, double exponent);

}  // namespace dgff

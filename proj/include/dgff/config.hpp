#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dgff/manifold.hpp"

namespace dgff {

enum class GridType { kLattice, kIid };
enum class BandwidthPolicy { kFixed, kWasserstein, kSchedule };

struct FunctionSpec {
  std::string name;
  std::vector<std::pair<std::size_t, double>> modes;  // flat index -> coeff

  bool operator==(const FunctionSpec&) const = default;
};

struct Thresholds {
  double gap_inf_min = 0.5;
  double semigroup_abs = 0.01;
  double covariance_rel = 0.1;
  double sobolev_spread = 0.2;

  bool operator==(const Thresholds&) const = default;
};

// Parsed experiment configuration. The file format is a flat key-value
// grammar with typed sections; see configs/ for annotated examples.
struct ExperimentConfig {
  ManifoldKind manifold = ManifoldKind::kTorus1;
  GridType grid = GridType::kLattice;
  std::vector<std::size_t> n_values;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  std::size_t draws = 0;  // 0 disables Monte Carlo columns
  int threads = 1;

  std::vector<FunctionSpec> functions;

  bool has_bandwidth = false;
  BandwidthPolicy policy = BandwidthPolicy::kFixed;
  double fixed_t = 0.5;
  double safety = 0.1;
  int table_j_max = 6;
  std::vector<std::size_t> table_n;

  std::vector<double> semigroup_t{0.25, 0.5, 1.0};

  double sobolev_s = 1.0;
  std::size_t sobolev_j_max = 41;
  std::size_t probes_per_vertex = 100;
  std::size_t sobolev_draws = 0;  // 0: fall back to draws

  Thresholds thresholds;

  bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text,
                                   const std::string& origin = "<string>");

// Canonical normalized rendering; parse(serialize(c)) == c and serializing
// again is byte-identical.
std::string serialize_config(const ExperimentConfig& config);

std::shared_ptr<const ManifoldModel> make_model(ManifoldKind kind);

// Shortest decimal rendering that round-trips through double.
std::string format_double(double v);

}  // namespace dgff

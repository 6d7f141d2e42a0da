#pragma once

#include <string>
#include <vector>

#include "dgff/config.hpp"

namespace dgff {

enum class RunMode { kAssumptions, kConverge, kSobolev, kFull };

RunMode parse_run_mode(const std::string& name);

struct RunFlags {
  bool dump_spectra = false;
  bool dump_samples = false;
};

// Executes the requested pipeline and writes CSV tables plus report.json
// under config.out_dir. Returns 0 when every configured threshold holds and
// 2 when violations were flagged; failures throw. Identical config and seed
// produce byte-identical reports (wall time goes to a separate timing.log).
int run_experiment(RunMode mode, const ExperimentConfig& config,
                   const RunFlags& flags = {});

struct ConvergeRow {
  std::size_t n = 0;
  std::size_t point_count = 0;
  std::string f;
  double t = 0.0;
  bool has_t = false;
  double quad = 0.0;
  double target = 0.0;
  double abs_gap = 0.0;
  double rel_gap = 0.0;
  double mc_var = 0.0;
  double mc_se = 0.0;
  double char_emp = 0.0;
  double char_theory = 0.0;
  double char_se = 0.0;
  bool pass = false;
};

std::vector<ConvergeRow> load_converge_csv(const std::string& path);

// Anti-staleness check: recomputes each row's continuum target from the
// model and returns the max absolute difference to the stored value.
double verify_converge_targets(const std::string& path,
                               const ExperimentConfig& config);

}  // namespace dgff

#include "dgff/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "dgff/bandwidth.hpp"
#include "dgff/field.hpp"
#include "dgff/graph.hpp"
#include "dgff/sobolev.hpp"

namespace dgff {

namespace {

constexpr const char* kToolVersion = "dgff 0.1.0";

RngStream stream_for(const ExperimentConfig& c, std::uint64_t purpose,
                     std::uint64_t n, std::uint64_t tag = 0) {
  return RngStream::derive(c.seed, {purpose, n, tag});
}

std::string stream_id(const char* purpose, std::uint64_t n,
                      std::uint64_t tag = 0) {
  std::ostringstream s;
  s << purpose << "/N=" << n << "/tag=" << tag;
  return s.str();
}

// Index-grabbing work pool; each item owns its derived RNG streams, so the
// results do not depend on the number of threads.
void parallel_for(int threads, std::size_t count,
                  const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mu;
  const int k = std::min<int>(threads, static_cast<int>(count));
  for (int w = 0; w < k; ++w) {
    pool.emplace_back([&]() {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

struct Cell {
  std::size_t n = 0;            // configured N (per side for lattices)
  std::size_t point_count = 0;  // true vertex count
  GridRealization grid;
  std::optional<SpectralData> sd;
  double t = 0.0;  // bandwidth actually used (iid only)
  bool has_t = false;
  double w1 = std::numeric_limits<double>::quiet_NaN();
  double w1_bias = 0.0;
  bool has_w1 = false;
};

struct W1Figure {
  double value = 0.0;
  double bias = 0.0;
};

W1Figure measure_w1(const ExperimentConfig& c,
                    const std::shared_ptr<const ManifoldModel>& model,
                    const GridRealization& grid, std::uint64_t n,
                    std::uint64_t tag) {
  if (model->kind() == ManifoldKind::kTorus1) {
    std::vector<double> coords(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) coords[i] = grid.points[i][0];
    return {wasserstein1_circle(coords), 0.0};
  }
  RngStream rng = stream_for(c, RngStream::kW1Reference, n, tag);
  const auto est = wasserstein1_estimate(model, grid.points,
                                         10 * grid.size(), rng);
  return {est.estimate, est.bias_bound};
}

// Bandwidth schedule pipeline: measured W1 -> t' rule -> gap-error table ->
// the gap-adjusted construction.
BandwidthSchedule build_schedule(const ExperimentConfig& c,
                                 const std::shared_ptr<const ManifoldModel>& model,
                                 const std::vector<Cell>& cells,
                                 std::vector<std::string>* streams) {
  std::vector<std::size_t> domain = c.table_n;
  for (const auto& cell : cells) domain.push_back(cell.n);
  std::sort(domain.begin(), domain.end());
  domain.erase(std::unique(domain.begin(), domain.end()), domain.end());

  const int d = model->dim();
  std::vector<ScheduleInput> inputs(domain.size());
  parallel_for(c.threads, domain.size(), [&](std::size_t i) {
    const std::size_t n = domain[i];
    const Cell* run_cell = nullptr;
    for (const auto& cell : cells) {
      if (cell.n == n) run_cell = &cell;
    }
    W1Figure w1;
    if (run_cell != nullptr) {
      w1 = {run_cell->w1, run_cell->w1_bias};
    } else {
      const GridRealization grid = sample_grid(model, n, c.seed, 1);
      w1 = measure_w1(c, model, grid, n, 1);
    }
    inputs[i] = {n, w1.value, w1.bias,
                 select_bandwidth_wass(w1.value, d, c.safety)};
  });
  for (std::size_t i = 0; i < domain.size(); ++i) {
    streams->push_back(stream_id("grid", domain[i], 1));
  }
  // Enforce the nonincreasing precondition by raising earlier values: the
  // rule inequality stays satisfied when t' only grows.
  for (std::size_t i = inputs.size(); i-- > 1;) {
    inputs[i - 1].t_prime = std::max(inputs[i - 1].t_prime, inputs[i].t_prime);
  }

  GapErrorTable table;
  for (int j = 1; j <= c.table_j_max; ++j) table.j_values.push_back(j);
  table.n_values = c.table_n;
  table.error.assign(table.j_values.size(),
                     std::vector<double>(table.n_values.size(), 0.0));
  const double lam2 = model->lambda2();
  std::vector<std::pair<std::size_t, std::size_t>> table_cells;
  for (std::size_t ji = 0; ji < table.j_values.size(); ++ji) {
    for (std::size_t ni = 0; ni < table.n_values.size(); ++ni) {
      table_cells.emplace_back(ji, ni);
    }
  }
  parallel_for(c.threads, table_cells.size(), [&](std::size_t k) {
    const auto [ji, ni] = table_cells[k];
    const int j = table.j_values[ji];
    const std::size_t n = table.n_values[ni];
    const double t = 1.0 / j;
    RngStream rng = RngStream::derive(
        c.seed, {RngStream::kGapTable, static_cast<std::uint64_t>(j), n});
    GridRealization grid;
    grid.model = model;
    grid.points = model->sample_uniform(n, rng);
    grid.seed = c.seed;
    const auto sd =
        spectral_decompose(assemble_laplacian(build_heat_kernel_graph(grid, t)));
    table.error[ji][ni] = std::abs(sd.gap() - intermediate_gap(t, lam2));
  });
  for (const auto& [ji, ni] : table_cells) {
    streams->push_back(
        stream_id("gap_table", table.n_values[ni], table.j_values[ji]));
  }
  return gap_adjusted_schedule(table, inputs, c.safety, 0.5 * d + 2.0);
}

std::string cell_label(const Cell& cell) {
  return "N" + std::to_string(cell.point_count);
}

std::string fmt(double v) { return format_double(v); }

struct McMoments {
  double variance = 0.0;
  double variance_se = 0.0;
  double char_emp = 0.0;
  double char_se = 0.0;
};

// Second and fourth moments of sqrt(N) <phi, f> plus the empirical
// characteristic value E cos(.) over a fresh batch of samples.
McMoments pairing_moments(const SpectralData& sd, const Eigen::VectorXd& f_vals,
                          std::size_t draws, RngStream& rng) {
  const double n = static_cast<double>(f_vals.size());
  const double sqrt_n = std::sqrt(n);
  const auto samples = sample_dgff(sd, rng, draws);
  double s2 = 0.0, s4 = 0.0, sc = 0.0, sc2 = 0.0;
  for (const auto& s : samples) {
    const double v = sqrt_n * s.values.dot(f_vals) / n;
    s2 += v * v;
    s4 += v * v * v * v;
    const double cv = std::cos(v);
    sc += cv;
    sc2 += cv * cv;
  }
  const double m = static_cast<double>(draws);
  McMoments out;
  out.variance = s2 / m;
  out.variance_se =
      std::sqrt(std::max(0.0, s4 / m - out.variance * out.variance) / m);
  out.char_emp = sc / m;
  out.char_se = std::sqrt(
      std::max(0.0, sc2 / m - (sc / m) * (sc / m)) / m);
  return out;
}

class ReportWriter {
 public:
  ReportWriter(const std::filesystem::path& dir) : dir_(dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) {
      throw std::runtime_error("cannot create output directory " +
                               dir_.string());
    }
  }

  std::ofstream open_csv(const std::string& name, const std::string& schema,
                         const std::string& columns) {
    std::ofstream out(dir_ / name);
    if (!out) {
      throw std::runtime_error("cannot write " + (dir_ / name).string());
    }
    out << "# schema: " << schema << "\n" << columns << "\n";
    return out;
  }

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

}  // namespace

RunMode parse_run_mode(const std::string& name) {
  if (name == "assumptions") return RunMode::kAssumptions;
  if (name == "converge") return RunMode::kConverge;
  if (name == "sobolev") return RunMode::kSobolev;
  if (name == "full") return RunMode::kFull;
  throw std::invalid_argument("unknown mode '" + name +
                              "' (expected assumptions|converge|sobolev|full)");
}

int run_experiment(RunMode mode, const ExperimentConfig& config,
                   const RunFlags& flags) {
  const auto wall_start = std::chrono::steady_clock::now();
  const auto model = make_model(config.manifold);
  ReportWriter writer(config.out_dir);
  std::vector<std::string> streams;
  std::vector<std::string> violations;
  nlohmann::ordered_json report;
  report["schema"] = "dgff.report.v1";
  report["tool"] = kToolVersion;
  report["mode"] = mode == RunMode::kAssumptions ? "assumptions"
                   : mode == RunMode::kConverge  ? "converge"
                   : mode == RunMode::kSobolev   ? "sobolev"
                                                 : "full";
  report["master_seed"] = config.seed;
  report["config"] = serialize_config(config);

  // Build one cell per configured N: grid, bandwidth, spectral data.
  std::vector<Cell> cells(config.n_values.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    Cell& cell = cells[i];
    cell.n = config.n_values[i];
    if (config.grid == GridType::kLattice) {
      auto lattice = build_torus_lattice(cell.n, model->dim());
      cell.grid = lattice.grid;
      cell.point_count = cell.grid.size();
      auto lap = assemble_laplacian(lattice.graph);
      if (flags.dump_spectra && cell.point_count <= 512) {
        dump_laplacian_csv(lap, (writer.dir() / ("laplacian_N" +
                                                 std::to_string(cell.point_count) +
                                                 ".csv"))
                                    .string());
      }
      cell.sd.emplace(spectral_decompose(lap));
      if (model->kind() == ManifoldKind::kTorus1) {
        std::vector<double> coords(cell.grid.size());
        for (std::size_t k = 0; k < coords.size(); ++k) {
          coords[k] = cell.grid.points[k][0];
        }
        cell.w1 = wasserstein1_circle(coords);
        cell.has_w1 = true;
      }
    } else {
      cell.grid = sample_grid(model, cell.n, config.seed, 0);
      streams.push_back(stream_id("grid", cell.n, 0));
      cell.point_count = cell.n;
      const W1Figure w1 = measure_w1(config, model, cell.grid, cell.n, 0);
      cell.w1 = w1.value;
      cell.w1_bias = w1.bias;
      cell.has_w1 = true;
      if (model->kind() != ManifoldKind::kTorus1) {
        streams.push_back(stream_id("w1_reference", cell.n, 0));
      }
    }
  }

  if (config.grid == GridType::kIid) {
    if (config.policy == BandwidthPolicy::kSchedule) {
      const BandwidthSchedule schedule =
          build_schedule(config, model, cells, &streams);
      schedule.to_csv((writer.dir() / "schedule.csv").string());
      for (Cell& cell : cells) {
        const ScheduleEntry& e = schedule.at(cell.n);
        if (!e.covered) {
          throw std::runtime_error(
              "bandwidth schedule: the measured table certifies no j for N=" +
              std::to_string(cell.n) +
              " (extend table_n or relax safety); schedule truncated");
        }
        cell.t = e.t;
        cell.has_t = true;
      }
    } else {
      for (Cell& cell : cells) {
        cell.t = config.policy == BandwidthPolicy::kFixed
                     ? config.fixed_t
                     : select_bandwidth_wass(cell.w1, model->dim(),
                                             config.safety);
        cell.has_t = true;
      }
    }
    parallel_for(config.threads, cells.size(), [&](std::size_t i) {
      auto lap =
          assemble_laplacian(build_heat_kernel_graph(cells[i].grid, cells[i].t));
      if (flags.dump_spectra && cells[i].point_count <= 512) {
        dump_laplacian_csv(lap, (writer.dir() / ("laplacian_N" +
                                                 std::to_string(cells[i].point_count) +
                                                 ".csv"))
                                    .string());
      }
      cells[i].sd.emplace(spectral_decompose(lap));
    });
  }

  if (flags.dump_spectra) {
    dump_eigendata_csv(*model, std::min<std::size_t>(model->mode_count(), 200),
                       (writer.dir() / "eigendata.csv").string());
    for (const Cell& cell : cells) {
      dump_spectrum_csv(*cell.sd, (writer.dir() / ("spectrum_" +
                                                   cell_label(cell) + ".csv"))
                                      .string());
    }
  }
  if (flags.dump_samples) {
    for (const Cell& cell : cells) {
      RngStream rng = stream_for(config, RngStream::kDgffDraw, cell.n, 9);
      const auto samples = sample_dgff(*cell.sd, rng, 3);
      streams.push_back(stream_id("dgff_draw", cell.n, 9));
      for (std::size_t k = 0; k < samples.size(); ++k) {
        dump_sample_csv(samples[k],
                        (writer.dir() / ("sample_" + cell_label(cell) + "_d" +
                                         std::to_string(k) + ".csv"))
                            .string());
      }
    }
  }

  std::vector<TestFunction> suite;
  for (const auto& fs : config.functions) {
    suite.emplace_back(model, fs.modes);
  }

  const bool do_assumptions =
      mode == RunMode::kAssumptions || mode == RunMode::kFull;
  const bool do_converge =
      mode == RunMode::kConverge || mode == RunMode::kFull;
  const bool do_sobolev = mode == RunMode::kSobolev || mode == RunMode::kFull;

  if (do_assumptions) {
    auto spectral_csv = writer.open_csv(
        "assumptions_spectral.csv", "dgff.assumptions_spectral.v1",
        "N,point_count,lambda2,running_inf,w1,w1_bias,t,pass");
    auto semigroup_csv = writer.open_csv(
        "assumptions_semigroup.csv", "dgff.assumptions_semigroup.v1",
        "N,point_count,f,t,discrete,target,abs_gap,pass");
    double running_inf = std::numeric_limits<double>::infinity();
    for (const Cell& cell : cells) {
      running_inf = std::min(running_inf, cell.sd->gap());
      const bool pass = running_inf >= config.thresholds.gap_inf_min;
      if (!pass) {
        violations.push_back("gap running infimum below threshold at " +
                             cell_label(cell));
      }
      spectral_csv << cell.n << ',' << cell.point_count << ','
                   << fmt(cell.sd->gap()) << ',' << fmt(running_inf) << ','
                   << (cell.has_w1 ? fmt(cell.w1) : "") << ','
                   << (cell.has_w1 ? fmt(cell.w1_bias) : "") << ','
                   << (cell.has_t ? fmt(cell.t) : "") << ','
                   << (pass ? 1 : 0) << '\n';
      for (std::size_t fi = 0; fi < suite.size(); ++fi) {
        const Eigen::VectorXd fn = discretize_function(suite[fi], cell.grid);
        for (double t : config.semigroup_t) {
          const double discrete = semigroup_quadratic_form(*cell.sd, t, fn);
          const double target = semigroup_form(suite[fi], t);
          const double gap = std::abs(discrete - target);
          const bool ok = gap <= config.thresholds.semigroup_abs;
          if (!ok) {
            violations.push_back("semigroup gap above threshold at " +
                                 cell_label(cell) + " f=" +
                                 config.functions[fi].name +
                                 " t=" + fmt(t));
          }
          semigroup_csv << cell.n << ',' << cell.point_count << ','
                        << config.functions[fi].name << ',' << fmt(t) << ','
                        << fmt(discrete) << ',' << fmt(target) << ','
                        << fmt(gap) << ',' << (ok ? 1 : 0) << '\n';
        }
      }
    }
  }

  if (do_converge) {
    auto csv = writer.open_csv(
        "converge.csv", "dgff.converge.v1",
        "N,point_count,f,t,quad_form,target,abs_gap,rel_gap,mc_var,mc_se,"
        "char_emp,char_theory,char_se,pass");
    for (const Cell& cell : cells) {
      for (std::size_t fi = 0; fi < suite.size(); ++fi) {
        const TestFunction& f = suite[fi];
        const Eigen::VectorXd fn = discretize_function(f, cell.grid);
        const double quad = green_quadratic_form(*cell.sd, fn);
        const double target = green_form(f);
        const double abs_gap = std::abs(quad - target);
        const double rel_gap =
            target != 0.0 ? abs_gap / std::abs(target) : abs_gap;
        const bool pass = rel_gap <= config.thresholds.covariance_rel;
        if (!pass) {
          violations.push_back("covariance relative gap above threshold at " +
                               cell_label(cell) + " f=" +
                               config.functions[fi].name);
        }
        McMoments mc;
        if (config.draws > 0) {
          Eigen::VectorXd f_vals(cell.grid.size());
          for (std::size_t k = 0; k < cell.grid.size(); ++k) {
            f_vals(k) = f.evaluate(cell.grid.points[k]);
          }
          RngStream rng = stream_for(config, RngStream::kDgffDraw, cell.n, fi);
          streams.push_back(stream_id("dgff_draw", cell.n, fi));
          mc = pairing_moments(*cell.sd, f_vals, config.draws, rng);
        }
        csv << cell.n << ',' << cell.point_count << ','
            << config.functions[fi].name << ','
            << (cell.has_t ? fmt(cell.t) : "") << ',' << fmt(quad) << ','
            << fmt(target) << ',' << fmt(abs_gap) << ',' << fmt(rel_gap)
            << ',';
        if (config.draws > 0) {
          csv << fmt(mc.variance) << ',' << fmt(mc.variance_se) << ','
              << fmt(mc.char_emp) << ',' << fmt(std::exp(-0.5 * quad)) << ','
              << fmt(mc.char_se);
        } else {
          csv << ",,,,";
        }
        csv << ',' << (pass ? 1 : 0) << '\n';
      }
    }
  }

  if (do_sobolev) {
    const std::size_t draws =
        config.sobolev_draws > 0 ? config.sobolev_draws : config.draws;
    if (draws == 0) {
      throw std::runtime_error(
          "sobolev run requires draws (set [sobolev] draws or [run] draws)");
    }
    const bool summable = config.sobolev_s > model->dim() - 0.5;
    if (!summable) {
      std::cerr << "warning: s = " << config.sobolev_s
                << " is at or below d - 1/2; the dual Sobolev series is not "
                   "summable under the eigenfunction bound\n";
    }
    report["sobolev_summable"] = summable;
    auto csv = writer.open_csv(
        "sobolev.csv", "dgff.sobolev.v1",
        "N,point_count,f,s,j_max,eps,var_lift,var_pair,abs_diff,envelope,"
        "diff_se,tight_stat,tight_se,tight_bound,pass");
    const SobolevParams params{config.sobolev_s, config.sobolev_j_max};
    std::vector<double> tight_values;
    for (const Cell& cell : cells) {
      RngStream probe_rng =
          stream_for(config, RngStream::kVoronoiProbe, cell.n, 0);
      streams.push_back(stream_id("voronoi_probe", cell.n, 0));
      const VoronoiTessellation tess(
          cell.grid, config.probes_per_vertex * cell.point_count, probe_rng);
      tess.summary_csv(
          (writer.dir() / ("tessellation_" + cell_label(cell) + ".csv"))
              .string());
      const double eps = fill_radius(tess);

      RngStream tight_rng =
          stream_for(config, RngStream::kDgffDraw, cell.n, 2000);
      streams.push_back(stream_id("dgff_draw", cell.n, 2000));
      const TightnessResult tight = tightness_statistic(
          *model, *cell.sd, tess, params, draws, tight_rng);
      tight_values.push_back(tight.statistic);

      {
        RngStream pair_rng =
            stream_for(config, RngStream::kDgffDraw, cell.n, 2001);
        streams.push_back(stream_id("dgff_draw", cell.n, 2001));
        const auto one = sample_dgff(*cell.sd, pair_rng, 1);
        dump_pairings_csv(*model, tess, one[0], params,
                          (writer.dir() /
                           ("pairings_" + cell_label(cell) + ".csv"))
                              .string());
      }

      for (std::size_t fi = 0; fi < suite.size(); ++fi) {
        const TestFunction& f = suite[fi];
        Eigen::VectorXd f_vals(cell.grid.size());
        Eigen::VectorXd f_avgs(cell.grid.size());
        for (std::size_t k = 0; k < cell.grid.size(); ++k) {
          f_vals(k) = f.evaluate(cell.grid.points[k]);
          f_avgs(k) = cell_average(f, tess, k).mean;
        }
        RngStream rng =
            stream_for(config, RngStream::kDgffDraw, cell.n, 3000 + fi);
        streams.push_back(stream_id("dgff_draw", cell.n, 3000 + fi));
        const auto samples = sample_dgff(*cell.sd, rng, draws);
        const double nn = static_cast<double>(cell.point_count);
        double s_lift = 0.0, s_pair = 0.0, s_diff = 0.0, s_diff2 = 0.0;
        for (const auto& smp : samples) {
          const double lift = nn * std::pow(smp.values.dot(f_avgs) / nn, 2);
          const double pair = nn * std::pow(smp.values.dot(f_vals) / nn, 2);
          s_lift += lift;
          s_pair += pair;
          s_diff += lift - pair;
          s_diff2 += (lift - pair) * (lift - pair);
        }
        const double m = static_cast<double>(draws);
        const double var_lift = s_lift / m;
        const double var_pair = s_pair / m;
        const double diff = std::abs(s_diff / m);
        const double diff_se = std::sqrt(
            std::max(0.0, s_diff2 / m - (s_diff / m) * (s_diff / m)) / m);
        const double envelope = 2.0 * eps * f.lipschitz_bound() *
                                f.sup_bound() / cell.sd->gap();
        const bool pass_envelope = diff <= envelope + 5.0 * diff_se;
        const bool pass_tight = tight.statistic <= tight.bound_series;
        const bool pass = pass_envelope && pass_tight;
        if (!pass_envelope) {
          violations.push_back("lifted-variance gap above envelope at " +
                               cell_label(cell) + " f=" +
                               config.functions[fi].name);
        }
        if (!pass_tight) {
          violations.push_back("tightness statistic above bound at " +
                               cell_label(cell));
        }
        csv << cell.n << ',' << cell.point_count << ','
            << config.functions[fi].name << ',' << fmt(config.sobolev_s)
            << ',' << config.sobolev_j_max << ',' << fmt(eps) << ','
            << fmt(var_lift) << ',' << fmt(var_pair) << ',' << fmt(diff)
            << ',' << fmt(envelope) << ',' << fmt(diff_se) << ','
            << fmt(tight.statistic) << ',' << fmt(tight.statistic_se) << ','
            << fmt(tight.bound_series) << ',' << (pass ? 1 : 0) << '\n';
      }
    }
    if (tight_values.size() >= 2) {
      const double lo =
          *std::min_element(tight_values.begin(), tight_values.end());
      const double hi =
          *std::max_element(tight_values.begin(), tight_values.end());
      const double spread = lo > 0.0 ? hi / lo - 1.0 : 0.0;
      report["tightness_spread"] = spread;
      if (spread > config.thresholds.sobolev_spread) {
        violations.push_back("tightness statistic spread across N exceeds " +
                             fmt(config.thresholds.sobolev_spread));
      }
    }
  }

  report["streams"] = streams;
  report["violations"] = violations;
  report["pass"] = violations.empty();
  {
    std::ofstream out(writer.dir() / "report.json");
    if (!out) throw std::runtime_error("cannot write report.json");
    out << report.dump(2) << "\n";
  }
  {
    // Wall time lives outside the byte-identical report set.
    std::ofstream out(writer.dir() / "timing.log");
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - wall_start)
                        .count();
    out << "wall_ms=" << ms << "\n";
  }
  return violations.empty() ? 0 : 2;
}

std::vector<ConvergeRow> load_converge_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<ConvergeRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("N,", 0) == 0) continue;
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : line) {
      if (ch == ',') {
        parts.push_back(cur);
        cur.clear();
      } else {
        cur += ch;
      }
    }
    parts.push_back(cur);
    if (parts.size() != 14) {
      throw std::runtime_error("malformed converge.csv row: " + line);
    }
    ConvergeRow r;
    r.n = std::stoull(parts[0]);
    r.point_count = std::stoull(parts[1]);
    r.f = parts[2];
    r.has_t = !parts[3].empty();
    if (r.has_t) r.t = std::stod(parts[3]);
    r.quad = std::stod(parts[4]);
    r.target = std::stod(parts[5]);
    r.abs_gap = std::stod(parts[6]);
    r.rel_gap = std::stod(parts[7]);
    if (!parts[8].empty()) {
      r.mc_var = std::stod(parts[8]);
      r.mc_se = std::stod(parts[9]);
      r.char_emp = std::stod(parts[10]);
      r.char_theory = std::stod(parts[11]);
      r.char_se = std::stod(parts[12]);
    }
    r.pass = parts[13] == "1";
    rows.push_back(std::move(r));
  }
  return rows;
}

double verify_converge_targets(const std::string& path,
                               const ExperimentConfig& config) {
  const auto rows = load_converge_csv(path);
  const auto model = make_model(config.manifold);
  double worst = 0.0;
  for (const auto& row : rows) {
    const FunctionSpec* spec = nullptr;
    for (const auto& fs : config.functions) {
      if (fs.name == row.f) spec = &fs;
    }
    if (spec == nullptr) {
      throw std::runtime_error("converge.csv references unknown function " +
                               row.f);
    }
    const TestFunction f(model, spec->modes);
    worst = std::max(worst, std::abs(green_form(f) - row.target));
  }
  return worst;
}

}  // namespace dgff

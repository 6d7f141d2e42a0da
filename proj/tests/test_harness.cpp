#include "dgff/harness.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

using namespace dgff;

namespace {

const char* kMinimalConfig = R"(
[run]
manifold = torus1
grid = lattice
N = 8,16
seed = 7
out = OUTDIR
draws = 200

[functions]
f = 3:1

[thresholds]
# coarse grids: loose gates, the machinery is under test here
semigroup_abs = 0.05
covariance_rel = 0.2
)";

std::string with_out(const std::string& text, const std::string& out) {
  std::string s = text;
  const auto pos = s.find("OUTDIR");
  s.replace(pos, 6, out);
  return s;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::filesystem::path temp_dir(const char* name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("config round-trip is stable after normalization") {
  const ExperimentConfig c = parse_config_text(with_out(kMinimalConfig, "o"));
  const std::string once = serialize_config(c);
  const ExperimentConfig again = parse_config_text(once);
  CHECK(again == c);
  CHECK(serialize_config(again) == once);
}

TEST_CASE("config parse errors carry location and field names") {
  const auto expect_error = [](const std::string& text,
                               const std::string& needle) {
    try {
      parse_config_text(text, "cfg");
      FAIL_CHECK("expected parse failure for: " << needle);
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    } catch (const std::exception& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  expect_error("[run]\nmanifold = torus1\ngrid = lattice\nN = 16,8\nseed = 1\n"
               "[functions]\nf = 3:1\n",
               "'N': list must be strictly ascending");
  expect_error("[run]\nbogus = 1\n", "unknown key 'bogus'");
  expect_error("[nope]\n", "unknown section");
  // Constant test functions are not in the zero-mean space.
  expect_error("[run]\nmanifold = torus1\ngrid = lattice\nN = 8\nseed = 1\n"
               "[functions]\nf = 1:1\n",
               "constant");
  // iid grids need a bandwidth policy.
  expect_error("[run]\nmanifold = torus1\ngrid = iid\nN = 8\nseed = 1\n"
               "[functions]\nf = 3:1\n",
               "bandwidth");
  expect_error("[run]\nmanifold = sphere2\ngrid = lattice\nN = 8\nseed = 1\n"
               "[functions]\nf = 3:1\n",
               "lattice");
  // Location info: the failing line number is part of the message.
  try {
    parse_config_text("[run]\nmanifold = torus1\ngrid = lattice\nN = abc\n",
                      "cfg");
    FAIL_CHECK("expected failure");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).rfind("cfg:4:", 0) == 0);
  }
}

TEST_CASE("full run: reports, determinism, and anti-staleness") {
  const auto dir = temp_dir("dgff_harness_full");
  ExperimentConfig c = parse_config_text(with_out(kMinimalConfig, dir.string()));
  c.draws = 300;
  c.sobolev_draws = 300;
  c.probes_per_vertex = 60;

  CHECK(run_experiment(RunMode::kFull, c) == 0);
  const std::string converge1 = slurp(dir / "converge.csv");
  const std::string report1 = slurp(dir / "report.json");
  CHECK(run_experiment(RunMode::kFull, c) == 0);
  CHECK(slurp(dir / "converge.csv") == converge1);
  CHECK(slurp(dir / "report.json") == report1);
  CHECK(report1.find("\"master_seed\": 7") != std::string::npos);
  CHECK(report1.find("dgff_draw") != std::string::npos);

  // Stored continuum targets recompute from the model exactly.
  CHECK(verify_converge_targets((dir / "converge.csv").string(), c) < 1e-12);

  const auto rows = load_converge_csv((dir / "converge.csv").string());
  CHECK(rows.size() == 2);
  CHECK(rows[0].n == 8);
  CHECK(rows[0].target == 1.0);
  for (const auto& r : rows) {
    CHECK(r.pass);
    // Characteristic-functional consistency at the distribution level.
    CHECK(std::abs(r.char_emp - r.char_theory) <= 5.0 * r.char_se);
  }

  // A different seed changes the Monte Carlo columns.
  ExperimentConfig c2 = c;
  c2.seed = 8;
  CHECK(run_experiment(RunMode::kFull, c2) == 0);
  CHECK(slurp(dir / "converge.csv") != converge1);
}

TEST_CASE("threshold violations produce exit code 2") {
  const auto dir = temp_dir("dgff_harness_tight");
  ExperimentConfig c = parse_config_text(with_out(kMinimalConfig, dir.string()));
  c.thresholds.covariance_rel = 1e-6;  // unreachably tight at N = 8
  CHECK(run_experiment(RunMode::kConverge, c) == 2);
  const std::string report = slurp(dir / "report.json");
  CHECK(report.find("violations") != std::string::npos);
  CHECK(report.find("covariance relative gap") != std::string::npos);
}

TEST_CASE("s at the summability boundary warns but runs") {
  const auto dir = temp_dir("dgff_harness_boundary");
  ExperimentConfig c = parse_config_text(with_out(kMinimalConfig, dir.string()));
  c.sobolev_s = 0.5;  // exactly d - 1/2 on torus1
  c.sobolev_draws = 100;
  c.probes_per_vertex = 50;
  CHECK(run_experiment(RunMode::kSobolev, c) == 0);
  const std::string report = slurp(dir / "report.json");
  CHECK(report.find("\"sobolev_summable\": false") != std::string::npos);
}

TEST_CASE("iid run with fixed bandwidth policy") {
  const auto dir = temp_dir("dgff_harness_iid");
  ExperimentConfig c = parse_config_text(
      "[run]\nmanifold = torus1\ngrid = iid\nN = 24,48\nseed = 3\nout = " +
      dir.string() +
      "\ndraws = 0\n[functions]\nf = 3:1\n[bandwidth]\npolicy = "
      "fixed\nt = 0.4\n[thresholds]\ncovariance_rel = 0.9\nsemigroup_abs = "
      "0.9\ngap_inf_min = 0.1\n");
  CHECK(run_experiment(RunMode::kConverge, c) == 0);
  CHECK(run_experiment(RunMode::kAssumptions, c) == 0);
  const auto rows = load_converge_csv((dir / "converge.csv").string());
  CHECK(rows.size() == 2);
  for (const auto& r : rows) {
    CHECK(r.has_t);
    CHECK(r.t == 0.4);
  }
}

TEST_CASE("dump flags produce spectra and samples") {
  const auto dir = temp_dir("dgff_harness_dump");
  ExperimentConfig c = parse_config_text(with_out(kMinimalConfig, dir.string()));
  c.n_values = {8};
  RunFlags flags;
  flags.dump_spectra = true;
  flags.dump_samples = true;
  CHECK(run_experiment(RunMode::kConverge, c, flags) == 0);
  CHECK(std::filesystem::exists(dir / "eigendata.csv"));
  CHECK(std::filesystem::exists(dir / "spectrum_N8.csv"));
  CHECK(std::filesystem::exists(dir / "laplacian_N8.csv"));
  CHECK(std::filesystem::exists(dir / "sample_N8_d0.csv"));
  CHECK(std::filesystem::exists(dir / "sample_N8_d2.csv"));
}

TEST_CASE("worker thread count does not change the reports") {
  const auto dir1 = temp_dir("dgff_harness_t1");
  const auto dir4 = temp_dir("dgff_harness_t4");
  ExperimentConfig c = parse_config_text(
      "[run]\nmanifold = torus1\ngrid = iid\nN = 16,24,32\nseed = 12\nout = " +
      dir1.string() +
      "\ndraws = 50\n[functions]\nf = 3:1\n[bandwidth]\npolicy = "
      "schedule\nsafety = 0.1\ntable_j_max = 3\ntable_n = "
      "8,16,32\n[thresholds]\ncovariance_rel = 5\nsemigroup_abs = "
      "5\ngap_inf_min = 0.01\n");
  c.threads = 1;
  run_experiment(RunMode::kConverge, c);
  c.threads = 4;
  c.out_dir = dir4.string();
  run_experiment(RunMode::kConverge, c);
  CHECK(slurp(dir1 / "converge.csv") == slurp(dir4 / "converge.csv"));
  CHECK(slurp(dir1 / "schedule.csv") == slurp(dir4 / "schedule.csv"));
}

TEST_CASE("run mode names") {
  CHECK(parse_run_mode("assumptions") == RunMode::kAssumptions);
  CHECK(parse_run_mode("converge") == RunMode::kConverge);
  CHECK(parse_run_mode("sobolev") == RunMode::kSobolev);
  CHECK(parse_run_mode("full") == RunMode::kFull);
  CHECK_THROWS_AS(parse_run_mode("bogus"), std::invalid_argument);
}

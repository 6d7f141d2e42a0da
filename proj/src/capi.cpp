#include "dgff/dgff.h"

#include <cstring>
#include <memory>
#include <string>

#include "dgff/bandwidth.hpp"
#include "dgff/config.hpp"
#include "dgff/field.hpp"
#include "dgff/graph.hpp"
#include "dgff/harness.hpp"
#include "dgff/manifold.hpp"
#include "dgff/sobolev.hpp"

namespace {

thread_local std::string g_last_error;

dgff_status set_error(dgff_status code, const char* what) {
  g_last_error = what != nullptr ? what : "unknown error";
  return code;
}

// Runs the body, translating exceptions into status codes.
template <typename Fn>
dgff_status guarded(Fn&& fn) {
  try {
    fn();
    return DGFF_OK;
  } catch (const std::invalid_argument& e) {
    return set_error(DGFF_ERR_INVALID, e.what());
  } catch (const std::out_of_range& e) {
    return set_error(DGFF_ERR_INVALID, e.what());
  } catch (const std::exception& e) {
    return set_error(DGFF_ERR_RUNTIME, e.what());
  } catch (...) {
    return set_error(DGFF_ERR_RUNTIME, "unknown exception");
  }
}

dgff::Point to_point(const double p[3]) { return {p[0], p[1], p[2]}; }

}  // namespace

struct dgff_model {
  std::shared_ptr<const dgff::ManifoldModel> m;
};
struct dgff_grid {
  dgff::GridRealization g;
};
struct dgff_graph {
  std::shared_ptr<const dgff::WeightedGraph> g;
};
struct dgff_spectral {
  std::shared_ptr<const dgff::SpectralData> sd;
};
struct dgff_function {
  std::shared_ptr<const dgff::TestFunction> f;
};
struct dgff_tessellation {
  std::shared_ptr<const dgff::VoronoiTessellation> t;
};

extern "C" {

const char* dgff_version(void) { return "0.1.0"; }

const char* dgff_last_error(void) { return g_last_error.c_str(); }

dgff_status dgff_model_create_torus(int d, dgff_model** out) {
  return guarded([&] { *out = new dgff_model{dgff::ManifoldModel::torus(d)}; });
}

dgff_status dgff_model_create_sphere2(dgff_model** out) {
  return guarded([&] { *out = new dgff_model{dgff::ManifoldModel::sphere2()}; });
}

void dgff_model_free(dgff_model* model) { delete model; }

int dgff_model_dim(const dgff_model* model) { return model->m->dim(); }

dgff_status dgff_model_eigenvalue(const dgff_model* model, size_t j,
                                  double* out) {
  return guarded([&] { *out = model->m->eigenvalue(j); });
}

dgff_status dgff_model_heat_kernel(const dgff_model* model, double t,
                                   const double p[3], const double q[3],
                                   double* out) {
  return guarded(
      [&] { *out = model->m->heat_kernel(t, to_point(p), to_point(q)); });
}

dgff_status dgff_model_green_kernel(const dgff_model* model, const double p[3],
                                    const double q[3], double* out) {
  return guarded(
      [&] { *out = model->m->green_kernel(to_point(p), to_point(q)); });
}

dgff_status dgff_model_geodesic_distance(const dgff_model* model,
                                         const double p[3], const double q[3],
                                         double* out) {
  return guarded(
      [&] { *out = model->m->geodesic_distance(to_point(p), to_point(q)); });
}

dgff_status dgff_function_create(const dgff_model* model, const size_t* modes,
                                 const double* coeffs, size_t count,
                                 dgff_function** out) {
  return guarded([&] {
    std::vector<std::pair<std::size_t, double>> c(count);
    for (size_t i = 0; i < count; ++i) c[i] = {modes[i], coeffs[i]};
    *out = new dgff_function{
        std::make_shared<dgff::TestFunction>(model->m, std::move(c))};
  });
}

void dgff_function_free(dgff_function* f) { delete f; }

dgff_status dgff_green_form(const dgff_function* f, double* out) {
  return guarded([&] { *out = dgff::green_form(*f->f); });
}

dgff_status dgff_semigroup_form(const dgff_function* f, double t,
                                double* out) {
  return guarded([&] { *out = dgff::semigroup_form(*f->f, t); });
}

dgff_status dgff_grid_sample(const dgff_model* model, size_t n, uint64_t seed,
                             uint64_t stream_tag, dgff_grid** out) {
  return guarded([&] {
    *out = new dgff_grid{dgff::sample_grid(model->m, n, seed, stream_tag)};
  });
}

dgff_status dgff_grid_lattice(int d, size_t n_per_side, dgff_grid** out,
                              dgff_graph** graph_out) {
  return guarded([&] {
    auto lattice = dgff::build_torus_lattice(n_per_side, d);
    *out = new dgff_grid{lattice.grid};
    if (graph_out != nullptr) {
      *graph_out = new dgff_graph{
          std::make_shared<dgff::WeightedGraph>(std::move(lattice.graph))};
    }
  });
}

void dgff_grid_free(dgff_grid* grid) { delete grid; }

size_t dgff_grid_size(const dgff_grid* grid) { return grid->g.size(); }

dgff_status dgff_grid_point(const dgff_grid* grid, size_t i, double out[3]) {
  return guarded([&] {
    if (i >= grid->g.size()) {
      throw std::invalid_argument("dgff_grid_point: index out of range");
    }
    for (int k = 0; k < 3; ++k) out[k] = grid->g.points[i][k];
  });
}

dgff_status dgff_graph_heat_kernel(const dgff_grid* grid, double t,
                                   dgff_graph** out) {
  return guarded([&] {
    *out = new dgff_graph{std::make_shared<dgff::WeightedGraph>(
        dgff::build_heat_kernel_graph(grid->g, t))};
  });
}

void dgff_graph_free(dgff_graph* graph) { delete graph; }

dgff_status dgff_graph_conductance(const dgff_graph* graph, size_t v, size_t w,
                                   double* out) {
  return guarded([&] {
    if (v >= graph->g->size() || w >= graph->g->size()) {
      throw std::invalid_argument("dgff_graph_conductance: index out of range");
    }
    *out = graph->g->conductance()(v, w);
  });
}

dgff_status dgff_spectral_create(const dgff_graph* graph, dgff_spectral** out) {
  return guarded([&] {
    *out = new dgff_spectral{std::make_shared<dgff::SpectralData>(
        dgff::spectral_decompose(dgff::assemble_laplacian(*graph->g)))};
  });
}

void dgff_spectral_free(dgff_spectral* sd) { delete sd; }

size_t dgff_spectral_size(const dgff_spectral* sd) { return sd->sd->size(); }

dgff_status dgff_spectral_eigenvalue(const dgff_spectral* sd, size_t i,
                                     double* out) {
  return guarded([&] {
    if (i >= sd->sd->size()) {
      throw std::invalid_argument(
          "dgff_spectral_eigenvalue: index out of range");
    }
    *out = sd->sd->eigenvalues()(static_cast<Eigen::Index>(i));
  });
}

dgff_status dgff_spectral_gap(const dgff_spectral* sd, double* out) {
  return guarded([&] { *out = sd->sd->gap(); });
}

dgff_status dgff_discretize(const dgff_function* f, const dgff_grid* grid,
                            double* fn) {
  return guarded([&] {
    const Eigen::VectorXd v = dgff::discretize_function(*f->f, grid->g);
    std::memcpy(fn, v.data(), sizeof(double) * v.size());
  });
}

dgff_status dgff_green_quadratic_form(const dgff_spectral* sd,
                                      const double* fn, size_t n,
                                      double* out) {
  return guarded([&] {
    Eigen::Map<const Eigen::VectorXd> v(fn, static_cast<Eigen::Index>(n));
    *out = dgff::green_quadratic_form(*sd->sd, v);
  });
}

dgff_status dgff_semigroup_quadratic_form(const dgff_spectral* sd, double t,
                                          const double* fn, size_t n,
                                          double* out) {
  return guarded([&] {
    Eigen::Map<const Eigen::VectorXd> v(fn, static_cast<Eigen::Index>(n));
    *out = dgff::semigroup_quadratic_form(*sd->sd, t, v);
  });
}

dgff_status dgff_sample_field(const dgff_spectral* sd, uint64_t seed,
                              uint64_t stream_tag, size_t count, double* out) {
  return guarded([&] {
    dgff::RngStream rng = dgff::RngStream::derive(
        seed, {dgff::RngStream::kDgffDraw, stream_tag});
    const auto samples = dgff::sample_dgff(*sd->sd, rng, count, stream_tag);
    const size_t n = sd->sd->size();
    for (size_t d = 0; d < count; ++d) {
      std::memcpy(out + d * n, samples[d].values.data(), sizeof(double) * n);
    }
  });
}

dgff_status dgff_wasserstein1_circle(const double* points, size_t n,
                                     double* out) {
  return guarded([&] {
    *out = dgff::wasserstein1_circle(std::vector<double>(points, points + n));
  });
}

dgff_status dgff_select_bandwidth(double w1, int d, double safety,
                                  double* out) {
  return guarded([&] { *out = dgff::select_bandwidth_wass(w1, d, safety); });
}

dgff_status dgff_intermediate_gap(double t, double lambda2, double* out) {
  return guarded([&] { *out = dgff::intermediate_gap(t, lambda2); });
}

dgff_status dgff_voronoi_assign(const dgff_grid* grid, size_t probes,
                                uint64_t seed, uint64_t stream_tag,
                                dgff_tessellation** out) {
  return guarded([&] {
    dgff::RngStream rng = dgff::RngStream::derive(
        seed, {dgff::RngStream::kVoronoiProbe, stream_tag});
    *out = new dgff_tessellation{std::make_shared<dgff::VoronoiTessellation>(
        grid->g, probes, rng)};
  });
}

void dgff_tessellation_free(dgff_tessellation* tess) { delete tess; }

dgff_status dgff_tessellation_cell_volume(const dgff_tessellation* tess,
                                          size_t i, double* out) {
  return guarded([&] { *out = tess->t->cell_volume(i); });
}

dgff_status dgff_fill_radius(const dgff_tessellation* tess, double* out) {
  return guarded([&] { *out = tess->t->fill_radius(); });
}

dgff_status dgff_run_experiment(const char* mode,
                                const dgff_run_options* options,
                                int* exit_code) {
  return guarded([&] {
    if (options == nullptr || options->config_path == nullptr) {
      throw std::invalid_argument("dgff_run_experiment: missing config path");
    }
    dgff::ExperimentConfig config = dgff::parse_config(options->config_path);
    if (options->has_seed != 0) config.seed = options->seed;
    if (options->out_dir != nullptr) config.out_dir = options->out_dir;
    if (options->threads > 0) config.threads = options->threads;
    dgff::RunFlags flags;
    flags.dump_spectra = options->dump_spectra != 0;
    flags.dump_samples = options->dump_samples != 0;
    *exit_code =
        dgff::run_experiment(dgff::parse_run_mode(mode), config, flags);
  });
}

}  // extern "C"

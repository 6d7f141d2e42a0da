/* C interface to the dgff library: discrete Gaussian free fields on
 * heat-kernel-weighted manifold grids.
 *
 * Every function that can fail returns a dgff_status; on failure the
 * thread-local message from dgff_last_error() describes the cause. Objects
 * are opaque handles released with the matching *_free function. Handles are
 * immutable after creation and may be shared across threads.
 */
#ifndef DGFF_DGFF_H_
#define DGFF_DGFF_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DGFF_API __declspec(dllexport)
#else
#define DGFF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dgff_status {
  DGFF_OK = 0,
  DGFF_ERR_INVALID = 1, /* precondition violated */
  DGFF_ERR_RUNTIME = 2, /* numeric or I/O failure */
} dgff_status;

DGFF_API const char* dgff_version(void);
DGFF_API const char* dgff_last_error(void);

typedef struct dgff_model dgff_model;
typedef struct dgff_grid dgff_grid;
typedef struct dgff_graph dgff_graph;
typedef struct dgff_spectral dgff_spectral;
typedef struct dgff_function dgff_function;
typedef struct dgff_tessellation dgff_tessellation;

/* --- manifold models ---------------------------------------------------- */

DGFF_API dgff_status dgff_model_create_torus(int d, dgff_model** out);
DGFF_API dgff_status dgff_model_create_sphere2(dgff_model** out);
DGFF_API void dgff_model_free(dgff_model* model);
DGFF_API int dgff_model_dim(const dgff_model* model);
/* j is the 1-based flat eigenmode index. */
DGFF_API dgff_status dgff_model_eigenvalue(const dgff_model* model, size_t j,
                                           double* out);
/* Points: tori use coordinates in [0,1) in the leading d entries; the
 * sphere uses a unit 3-vector. */
DGFF_API dgff_status dgff_model_heat_kernel(const dgff_model* model, double t,
                                            const double p[3],
                                            const double q[3], double* out);
DGFF_API dgff_status dgff_model_green_kernel(const dgff_model* model,
                                             const double p[3],
                                             const double q[3], double* out);
DGFF_API dgff_status dgff_model_geodesic_distance(const dgff_model* model,
                                                  const double p[3],
                                                  const double q[3],
                                                  double* out);

/* --- zero-mean test functions ------------------------------------------- */

DGFF_API dgff_status dgff_function_create(const dgff_model* model,
                                          const size_t* modes,
                                          const double* coeffs, size_t count,
                                          dgff_function** out);
DGFF_API void dgff_function_free(dgff_function* f);
DGFF_API dgff_status dgff_green_form(const dgff_function* f, double* out);
DGFF_API dgff_status dgff_semigroup_form(const dgff_function* f, double t,
                                         double* out);

/* --- grids and graphs ---------------------------------------------------- */

DGFF_API dgff_status dgff_grid_sample(const dgff_model* model, size_t n,
                                      uint64_t seed, uint64_t stream_tag,
                                      dgff_grid** out);
/* Equally spaced lattice on the torus with nearest-neighbor weights;
 * graph_out may be NULL when only the grid is needed. */
DGFF_API dgff_status dgff_grid_lattice(int d, size_t n_per_side,
                                       dgff_grid** out,
                                       dgff_graph** graph_out);
DGFF_API void dgff_grid_free(dgff_grid* grid);
DGFF_API size_t dgff_grid_size(const dgff_grid* grid);
DGFF_API dgff_status dgff_grid_point(const dgff_grid* grid, size_t i,
                                     double out[3]);

DGFF_API dgff_status dgff_graph_heat_kernel(const dgff_grid* grid, double t,
                                            dgff_graph** out);
DGFF_API void dgff_graph_free(dgff_graph* graph);
DGFF_API dgff_status dgff_graph_conductance(const dgff_graph* graph, size_t v,
                                            size_t w, double* out);

/* --- spectral data -------------------------------------------------------- */

DGFF_API dgff_status dgff_spectral_create(const dgff_graph* graph,
                                          dgff_spectral** out);
DGFF_API void dgff_spectral_free(dgff_spectral* sd);
DGFF_API size_t dgff_spectral_size(const dgff_spectral* sd);
/* i is 0-based; eigenvalues ascend and index 0 is the constant mode. */
DGFF_API dgff_status dgff_spectral_eigenvalue(const dgff_spectral* sd,
                                              size_t i, double* out);
DGFF_API dgff_status dgff_spectral_gap(const dgff_spectral* sd, double* out);

/* fn has grid-size entries. discretize writes f minus its empirical mean. */
DGFF_API dgff_status dgff_discretize(const dgff_function* f,
                                     const dgff_grid* grid, double* fn);
DGFF_API dgff_status dgff_green_quadratic_form(const dgff_spectral* sd,
                                               const double* fn, size_t n,
                                               double* out);
DGFF_API dgff_status dgff_semigroup_quadratic_form(const dgff_spectral* sd,
                                                   double t, const double* fn,
                                                   size_t n, double* out);

/* Draws `count` zero-average field samples into out (count x n, row major). */
DGFF_API dgff_status dgff_sample_field(const dgff_spectral* sd, uint64_t seed,
                                       uint64_t stream_tag, size_t count,
                                       double* out);

/* --- bandwidth selection --------------------------------------------------- */

DGFF_API dgff_status dgff_wasserstein1_circle(const double* points, size_t n,
                                              double* out);
DGFF_API dgff_status dgff_select_bandwidth(double w1, int d, double safety,
                                           double* out);
DGFF_API dgff_status dgff_intermediate_gap(double t, double lambda2,
                                           double* out);

/* --- Voronoi tessellation --------------------------------------------------- */

DGFF_API dgff_status dgff_voronoi_assign(const dgff_grid* grid, size_t probes,
                                         uint64_t seed, uint64_t stream_tag,
                                         dgff_tessellation** out);
DGFF_API void dgff_tessellation_free(dgff_tessellation* tess);
DGFF_API dgff_status dgff_tessellation_cell_volume(
    const dgff_tessellation* tess, size_t i, double* out);
DGFF_API dgff_status dgff_fill_radius(const dgff_tessellation* tess,
                                      double* out);

/* --- experiment harness ------------------------------------------------------ */

typedef struct dgff_run_options {
  const char* config_path; /* required */
  const char* out_dir;     /* optional override, may be NULL */
  uint64_t seed;           /* applied when has_seed != 0 */
  int has_seed;
  int threads; /* <= 0 keeps the config value */
  int dump_spectra;
  int dump_samples;
} dgff_run_options;

/* mode: "assumptions" | "converge" | "sobolev" | "full". On DGFF_OK,
 * *exit_code is 0 (all thresholds hold) or 2 (violations flagged). */
DGFF_API dgff_status dgff_run_experiment(const char* mode,
                                         const dgff_run_options* options,
                                         int* exit_code);

#ifdef __cplusplus
}
#endif

#endif /* DGFF_DGFF_H_ */

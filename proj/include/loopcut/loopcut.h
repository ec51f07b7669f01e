#ifndef LOOPCUT_H
#define LOOPCUT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define LC_API __declspec(dllexport)
#else
#define LC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lc_status {
  LC_OK = 0,
  LC_ERR_INVALID_ARGUMENT = 1,
  LC_ERR_NUMERICAL = 2,
  LC_ERR_IO = 3,
  LC_ERR_INTERNAL = 4
} lc_status;

typedef enum lc_scheme {
  LC_SCHEME_TEBD = 0,
  LC_SCHEME_EAT = 1,
  LC_SCHEME_ZMT1 = 2,
  LC_SCHEME_ZMT2 = 3,
  LC_SCHEME_ZMT3 = 4,
  LC_SCHEME_ZMT4 = 5 /* single-bond bench only */
} lc_scheme;

typedef enum lc_fixture {
  LC_FIXTURE_VIRTUAL_LOOP = 0,
  LC_FIXTURE_TOY_PAIR = 1,
  LC_FIXTURE_PRODUCT_ENV = 2,
  LC_FIXTURE_LOOPY_ENV = 3
} lc_fixture;

LC_API const char* lc_version(void);
LC_API const char* lc_status_name(lc_status status);

/* Message of the last failed call on this thread; empty after a success. */
LC_API const char* lc_last_error(void);

LC_API const char* lc_scheme_name(lc_scheme scheme);
LC_API lc_status lc_scheme_parse(const char* name, lc_scheme* out);
LC_API const char* lc_fixture_name(lc_fixture kind);
LC_API lc_status lc_fixture_parse(const char* name, lc_fixture* out);

/* ---- TRG ---- */

typedef struct lc_trg_options {
  double beta;
  int64_t chi;
  int32_t iterations;
  lc_scheme scheme;
  double delta;
  uint64_t seed;
  int32_t run_als;
  int32_t als_max_sweeps;
  double als_tol;
  double als_rcond;
  double vidal_drop;
  int32_t eat_gauge_init;
  int64_t general_dim_cap; /* 0 disables */
  int32_t measure_loopiness;
} lc_trg_options;

LC_API void lc_trg_options_init(lc_trg_options* opts);

typedef struct lc_trg_iteration {
  int32_t iteration;
  int64_t ring_dim;
  int64_t split_dim;
  double gauge_residual;
  double loopiness; /* -1 when not measured */
  double f_initial_rel;
  double f_final_rel;
  int32_t als_sweeps;
  double als_max_rise;
  int64_t switch_dims[4]; /* -1 where no switch happened or not applicable */
  double log_z_per_spin;
  double free_energy;
  double onsager;
  double relative_error;
  double wall_time_ms;
} lc_trg_iteration;

typedef struct lc_trg lc_trg;

LC_API lc_status lc_trg_create(const lc_trg_options* opts, lc_trg** out);
LC_API void lc_trg_destroy(lc_trg* run);

/* Schemes whose initial cost is also evaluated on every later split. */
LC_API lc_status lc_trg_set_compare(lc_trg* run, const lc_scheme* schemes, size_t count);

LC_API lc_status lc_trg_step(lc_trg* run, lc_trg_iteration* out);
LC_API int32_t lc_trg_iterations_done(const lc_trg* run);

/* Comparison results of the latest step, in the order given to lc_trg_set_compare. */
LC_API size_t lc_trg_compared_count(const lc_trg* run);
LC_API lc_status lc_trg_compared(const lc_trg* run, size_t index, lc_scheme* scheme, double* f_initial_rel);

/* ---- single-bond fixtures ---- */

typedef struct lc_fixture_options {
  lc_fixture kind;
  int64_t d_bond;
  int64_t d_loop;
  double loop_target;
  uint64_t seed;
  int64_t target_dim; /* 0: exact dimension for virtual-loop, D - 1 otherwise */
  double delta;
} lc_fixture_options;

LC_API void lc_fixture_options_init(lc_fixture_options* opts);

typedef struct lc_fixture_info {
  int64_t bond_dim;
  int64_t default_target_dim;
  double loopiness;
  double expected_loopiness; /* virtual-loop only, else -1 */
  double norm;
} lc_fixture_info;

LC_API lc_status lc_fixture_describe(const lc_fixture_options* opts, lc_fixture_info* out);

typedef struct lc_bench_result {
  lc_scheme scheme;
  int64_t bond_dim;
  int64_t target_dim;
  double loopiness;
  double f_initial_abs;
  double f_initial_rel;
  int64_t switch_dim;
  double wall_time_ms;
} lc_bench_result;

LC_API lc_status lc_bench_run(const lc_fixture_options* opts, lc_scheme scheme, lc_bench_result* out);

#ifdef __cplusplus
}
#endif

#endif

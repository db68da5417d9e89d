#ifndef HYPOCTL_HYPOCTL_H
#define HYPOCTL_HYPOCTL_H

/* C interface to the hypoctl library. All handles are opaque and owned by
 * the caller; free them with the matching *_free function. Strings returned
 * through char** outputs are heap allocated and released with
 * hypoctl_string_free. On failure a function returns a non-OK status and
 * hypoctl_last_error() describes it (per thread). */

#include <stddef.h>

#if defined(_WIN32)
#define HYPOCTL_API __declspec(dllexport)
#else
#define HYPOCTL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hypoctl_status {
  HYPOCTL_OK = 0,
  HYPOCTL_INVALID_ARG = 1,
  HYPOCTL_CONFIG = 2,
  HYPOCTL_IO = 3,
  HYPOCTL_NUMERIC = 4,
  HYPOCTL_NOT_STABILIZABLE = 5,
  HYPOCTL_CONVERGENCE = 6,
  HYPOCTL_MISMATCH = 7,
  HYPOCTL_INTERNAL = 8
} hypoctl_status;

typedef struct hypoctl_config hypoctl_config;
typedef struct hypoctl_problem hypoctl_problem;
typedef struct hypoctl_riccati hypoctl_riccati;
typedef struct hypoctl_trajectory hypoctl_trajectory;

HYPOCTL_API const char* hypoctl_version(void);
HYPOCTL_API const char* hypoctl_last_error(void);
HYPOCTL_API const char* hypoctl_status_name(hypoctl_status status);
HYPOCTL_API void hypoctl_string_free(char* s);
/* Thread count of the BLAS backend, if it exposes one. */
HYPOCTL_API hypoctl_status hypoctl_set_num_threads(int threads);

/* Configuration. */
HYPOCTL_API hypoctl_status hypoctl_config_default(hypoctl_config** out);
HYPOCTL_API hypoctl_status hypoctl_config_load(const char* path, hypoctl_config** out);
/* base_dir resolves relative file references; may be NULL. */
HYPOCTL_API hypoctl_status hypoctl_config_parse(const char* text, const char* base_dir,
                                                hypoctl_config** out);
HYPOCTL_API hypoctl_status hypoctl_config_set(hypoctl_config* cfg, const char* key,
                                              const char* value);
HYPOCTL_API hypoctl_status hypoctl_config_get(const hypoctl_config* cfg, const char* key,
                                              char** value);
HYPOCTL_API hypoctl_status hypoctl_config_text(const hypoctl_config* cfg, char** text);
HYPOCTL_API void hypoctl_config_free(hypoctl_config* cfg);

/* Problem: assembled and deflated operators for one configuration. */
HYPOCTL_API hypoctl_status hypoctl_problem_create(const hypoctl_config* cfg,
                                                  hypoctl_problem** out);
/* Reuses the invariant direction stored with a Riccati solution so its gain
 * applies in the same basis. */
HYPOCTL_API hypoctl_status hypoctl_problem_create_with_gain(const hypoctl_config* cfg,
                                                            const hypoctl_riccati* gain,
                                                            hypoctl_problem** out);
/* Grid size n and input count m; the deflated state has n - 1 entries. */
HYPOCTL_API hypoctl_status hypoctl_problem_dims(const hypoctl_problem* p, size_t* n,
                                                size_t* m);
HYPOCTL_API void hypoctl_problem_free(hypoctl_problem* p);

/* Spectrum and Hautus report. json and csv may be NULL. */
HYPOCTL_API hypoctl_status hypoctl_analyze(const hypoctl_problem* p, int* passed, char** json,
                                           char** csv);
HYPOCTL_API hypoctl_status hypoctl_problem_save_operators(const hypoctl_problem* p,
                                                          const char* path);

/* Riccati solve. The callback, if any, sees every Newton iterate. */
typedef void (*hypoctl_iterate_fn)(int k, double update_norm, double residual,
                                   double abscissa, void* user);
HYPOCTL_API hypoctl_status hypoctl_riccati_solve(const hypoctl_problem* p,
                                                 hypoctl_iterate_fn on_iterate, void* user,
                                                 hypoctl_riccati** out);
HYPOCTL_API hypoctl_status hypoctl_riccati_history_csv(const hypoctl_riccati* r, char** csv);
HYPOCTL_API hypoctl_status hypoctl_riccati_spectrum_csv(const hypoctl_riccati* r, char** csv);
HYPOCTL_API hypoctl_status hypoctl_riccati_summary_json(const hypoctl_riccati* r, char** json);
HYPOCTL_API hypoctl_status hypoctl_riccati_save(const hypoctl_riccati* r, const char* path);
/* With expected_cfg, fails with HYPOCTL_MISMATCH listing differing keys. */
HYPOCTL_API hypoctl_status hypoctl_riccati_load(const char* path,
                                                const hypoctl_config* expected_cfg,
                                                hypoctl_riccati** out);
HYPOCTL_API void hypoctl_riccati_free(hypoctl_riccati* r);

/* Simulation with the configured initial state; gain NULL runs open loop. */
HYPOCTL_API hypoctl_status hypoctl_simulate(const hypoctl_problem* p,
                                            const hypoctl_riccati* gain,
                                            hypoctl_trajectory** out);
HYPOCTL_API hypoctl_status hypoctl_trajectory_csv(const hypoctl_trajectory* t, char** csv);
HYPOCTL_API hypoctl_status hypoctl_trajectory_summary_json(const hypoctl_trajectory* t,
                                                           char** json);
HYPOCTL_API hypoctl_status hypoctl_trajectory_save_snapshots(const hypoctl_trajectory* t,
                                                             const char* path);
HYPOCTL_API size_t hypoctl_trajectory_size(const hypoctl_trajectory* t);
/* Time, deflated-state norm and mass of sample i. */
HYPOCTL_API hypoctl_status hypoctl_trajectory_sample(const hypoctl_trajectory* t, size_t i,
                                                     double* time, double* norm, double* mass);
HYPOCTL_API void hypoctl_trajectory_free(hypoctl_trajectory* t);

/* Acceptance checks. only_ids may be NULL (run all). */
typedef void (*hypoctl_check_fn)(int id, const char* name, int passed, const char* measured,
                                  double seconds, void* user);
HYPOCTL_API hypoctl_status hypoctl_verify(const hypoctl_config* cfg, const int* only_ids,
                                          size_t only_count, hypoctl_check_fn on_check,
                                          void* user, int* all_passed);

#ifdef __cplusplus
}
#endif

#endif

#ifndef PDSDE_PDSDE_H
#define PDSDE_PDSDE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  ifdef PDSDE_BUILDING
#    define PDSDE_API __declspec(dllexport)
#  else
#    define PDSDE_API __declspec(dllimport)
#  endif
#else
#  define PDSDE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pdsde_status {
    PDSDE_OK = 0,
    PDSDE_ERR_ARGUMENT = 1,  /* null handle or invalid option */
    PDSDE_ERR_IO = 2,
    PDSDE_ERR_PARSE = 3,     /* coefficient DSL or JSON syntax */
    PDSDE_ERR_CONFIG = 4,    /* scenario validation; see pdsde_last_error_key */
    PDSDE_ERR_DIMENSION = 5,
    PDSDE_ERR_DOMAIN = 6,    /* precondition failed */
    PDSDE_ERR_NUMERIC = 7,   /* division by zero, blow-up */
    PDSDE_ERR_INTERNAL = 8
} pdsde_status;

typedef struct pdsde_scenario pdsde_scenario;
typedef struct pdsde_measure pdsde_measure;
typedef struct pdsde_result pdsde_result;

typedef struct pdsde_options {
    unsigned threads;      /* 0 or 1: serial */
    int timing;            /* nonzero: add wall_seconds to reports */
    int trajectories;      /* simulate: emit per-particle path CSVs */
    int psi_trace;         /* order-test: emit the psi_n functional trace */
} pdsde_options;

PDSDE_API const char* pdsde_version(void);
PDSDE_API const char* pdsde_status_name(pdsde_status status);

/* Message of the last failed call on this thread ("" if none). */
PDSDE_API const char* pdsde_last_error(void);
/* Offending scenario key of the last PDSDE_ERR_CONFIG, e.g. "grid.dt". */
PDSDE_API const char* pdsde_last_error_key(void);

PDSDE_API void pdsde_options_init(pdsde_options* opts);

/* Scenarios */
PDSDE_API pdsde_status pdsde_scenario_load(const char* path, pdsde_scenario** out);
PDSDE_API pdsde_status pdsde_scenario_parse(const char* text, const char* base_dir, pdsde_scenario** out);
PDSDE_API pdsde_status pdsde_scenario_set_seed(pdsde_scenario* scenario, uint64_t seed);
/* Resolved scenario as JSON; the string lives until the handle is freed. */
PDSDE_API const char* pdsde_scenario_json(const pdsde_scenario* scenario);
PDSDE_API const char* pdsde_scenario_model_hash(const pdsde_scenario* scenario);
PDSDE_API void pdsde_scenario_free(pdsde_scenario* scenario);

/* Empirical measures ({shape, atoms} JSON) */
PDSDE_API pdsde_status pdsde_measure_load(const char* path, pdsde_measure** out);
PDSDE_API pdsde_status pdsde_measure_parse(const char* json, pdsde_measure** out);
PDSDE_API size_t pdsde_measure_size(const pdsde_measure* measure);
PDSDE_API void pdsde_measure_free(pdsde_measure* measure);

PDSDE_API pdsde_status pdsde_w2(const pdsde_measure* mu, const pdsde_measure* nu, double* out);
/* matching may be null; otherwise it receives pdsde_measure_size(mu) entries when *holds. */
PDSDE_API pdsde_status pdsde_dominance(const pdsde_measure* mu, const pdsde_measure* nu, int* holds,
                                       size_t* matching);

/* Commands; each yields a result handle. */
PDSDE_API pdsde_status pdsde_simulate(const pdsde_scenario* scenario, const pdsde_options* opts,
                                      pdsde_result** out);
PDSDE_API pdsde_status pdsde_order_test(const pdsde_scenario* scenario, const pdsde_options* opts,
                                        pdsde_result** out);
PDSDE_API pdsde_status pdsde_necessity_probe(const pdsde_scenario* scenario, const pdsde_options* opts,
                                             pdsde_result** out);
PDSDE_API pdsde_status pdsde_check_conditions(const pdsde_scenario* scenario, const pdsde_options* opts,
                                              pdsde_result** out);
PDSDE_API pdsde_status pdsde_psi_table(const size_t* ns, size_t count, double lo, double hi, size_t points,
                                       pdsde_result** out);
PDSDE_API pdsde_status pdsde_w2_report(const pdsde_measure* mu, const pdsde_measure* nu, pdsde_result** out);
PDSDE_API pdsde_status pdsde_dominance_report(const pdsde_measure* mu, const pdsde_measure* nu,
                                              pdsde_result** out);

/* Results */
PDSDE_API const char* pdsde_result_json(const pdsde_result* result);
PDSDE_API const char* pdsde_result_csv(const pdsde_result* result);
/* Nonzero when a condition or order violation was detected. */
PDSDE_API int pdsde_result_flagged(const pdsde_result* result);
PDSDE_API size_t pdsde_result_artifact_count(const pdsde_result* result);
PDSDE_API const char* pdsde_result_artifact_name(const pdsde_result* result, size_t index);
PDSDE_API const char* pdsde_result_artifact_data(const pdsde_result* result, size_t index);
PDSDE_API void pdsde_result_free(pdsde_result* result);

#ifdef __cplusplus
}
#endif

#endif

/* obslab — observability laboratory for coupled 1D evolution systems.
 *
 * C interface to the shared library: opaque handles, status codes, string
 * results. Every entry point is safe to call from C; error details for the
 * calling thread are available via obslab_last_error().
 */
#ifndef OBSLAB_H
#define OBSLAB_H

#ifdef __cplusplus
extern "C" {
#endif

typedef struct obslab_scenario obslab_scenario;
typedef struct obslab_result obslab_result;

typedef enum obslab_status {
  OBSLAB_OK = 0,
  OBSLAB_ERR_IO = 1,         /* unreadable files */
  OBSLAB_ERR_VALIDATION = 2, /* schema, alignment, precondition violations */
  OBSLAB_ERR_NUMERIC = 3,    /* solver failures (EnergyNotPD, ConvergenceFailure) */
  OBSLAB_ERR_INTERNAL = 4
} obslab_status;

/* Library version, e.g. "0.1.0". */
const char* obslab_version(void);

/* Message of the most recent error on this thread ("" when none). */
const char* obslab_last_error(void);

/* Stable error name of the most recent error (e.g. "SchemaError"). */
const char* obslab_last_error_name(void);

/* Load a scenario JSON file. On success *out owns the scenario. */
obslab_status obslab_scenario_load(const char* path, obslab_scenario** out);

/* Parse a scenario from JSON text. */
obslab_status obslab_scenario_parse(const char* json_text, obslab_scenario** out);

void obslab_scenario_free(obslab_scenario* scenario);

/* Run a command (modes, solve, symbols, gramian, obsconst, sweep, simul,
 * super, kernel, hmeasure). options_json may be NULL or "" for defaults;
 * recognized keys: m0_lo, m0_hi, bins, tol, scaling, truncations,
 * theta_families, family_modes. */
obslab_status obslab_run(const obslab_scenario* scenario, const char* command,
                         const char* options_json, obslab_result** out);

/* Deterministic JSON report (NUL-terminated, owned by the result). */
const char* obslab_result_report_json(const obslab_result* result);

/* CSV attachments produced by the run. */
int obslab_result_csv_count(const obslab_result* result);
const char* obslab_result_csv_name(const obslab_result* result, int index);
const char* obslab_result_csv_data(const obslab_result* result, int index);

void obslab_result_free(obslab_result* result);

#ifdef __cplusplus
}
#endif

#endif /* OBSLAB_H */

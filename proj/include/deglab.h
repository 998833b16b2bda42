/* C interface to the degenerate-operator laboratory. All functions are
 * thread-compatible: distinct handles may be used from distinct threads;
 * a single handle must not be shared without external synchronization. */
#ifndef DEGLAB_H
#define DEGLAB_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined _WIN32
#define DEGLAB_API __declspec(dllexport)
#else
#define DEGLAB_API __attribute__((visibility("default")))
#endif

typedef enum deglab_status {
  DEGLAB_OK = 0,
  DEGLAB_E_CHECK_FAILED = 1, /* a gated experiment failed */
  DEGLAB_E_CONFIG = 2,       /* invalid configuration */
  DEGLAB_E_INVALID_ARG = 3,
  DEGLAB_E_IO = 4,
  DEGLAB_E_INTERNAL = 5
} deglab_status;

typedef struct deglab_config deglab_config;
typedef struct deglab_report deglab_report;

DEGLAB_API const char* deglab_version(void);

/* Error message of the most recent failing call on this thread ("" if none).
 * The pointer stays valid until the next deglab call on the same thread. */
DEGLAB_API const char* deglab_last_error(void);

/* Configuration: load from a JSON file or parse from a JSON string. On
 * success *out owns the handle; release with deglab_config_free. */
DEGLAB_API deglab_status deglab_config_load(const char* path, deglab_config** out);
DEGLAB_API deglab_status deglab_config_parse(const char* json_text, deglab_config** out);
DEGLAB_API deglab_status deglab_config_set_output_dir(deglab_config* cfg, const char* dir);
DEGLAB_API deglab_status deglab_config_set_workers(deglab_config* cfg, int workers);
DEGLAB_API deglab_status deglab_config_set_override_validity(deglab_config* cfg, int enabled);
DEGLAB_API void deglab_config_free(deglab_config* cfg);

/* Runs every experiment in the config, writes report.json and tables/*.csv
 * under the configured output directory, and returns the report. Returns
 * DEGLAB_E_CHECK_FAILED when the run completed but at least one gated
 * experiment failed (the report is still produced). */
DEGLAB_API deglab_status deglab_run(const deglab_config* cfg, deglab_report** out);

DEGLAB_API int deglab_report_pass_count(const deglab_report* rep);
DEGLAB_API int deglab_report_fail_count(const deglab_report* rep);
DEGLAB_API int deglab_report_flag_count(const deglab_report* rep);
/* Serialized report document; free with deglab_string_free. */
DEGLAB_API char* deglab_report_json(const deglab_report* rep);
DEGLAB_API void deglab_report_free(deglab_report* rep);

/* Preset catalogue (fields, cutoffs, regions, multipliers, experiment
 * kinds); deterministic ordering. Free with deglab_string_free. */
DEGLAB_API char* deglab_presets(void);

DEGLAB_API void deglab_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* DEGLAB_H */

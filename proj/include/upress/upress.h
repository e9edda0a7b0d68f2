#ifndef UPRESS_UPRESS_H
#define UPRESS_UPRESS_H

#include <stddef.h>
#include <stdint.h>

#if defined(UPRESS_BUILDING_LIBRARY)
#define UPRESS_API __attribute__((visibility("default")))
#else
#define UPRESS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes double as process exit codes. */
typedef enum {
  UPRESS_OK = 0,
  UPRESS_ERR_INTERNAL = 1,     /* I/O or unexpected failure */
  UPRESS_ERR_USAGE = 2,        /* invalid config or argument */
  UPRESS_ERR_REFUSED = 3,      /* typed refusal: under-resolved, depth, unsupported, ... */
  UPRESS_ERR_CHECK_FAILED = 4  /* a hard invariant failed */
} upress_status;

typedef struct upress_config upress_config;

/* Every function returning int returns an upress_status. On failure the calling thread's
   last reason and message describe it. */
UPRESS_API const char* upress_status_name(int status);
UPRESS_API const char* upress_last_reason(void);
UPRESS_API const char* upress_last_error(void);

UPRESS_API int upress_config_from_file(const char* path, upress_config** out);
UPRESS_API int upress_config_from_string(const char* text, upress_config** out);
UPRESS_API int upress_config_from_preset(const char* name, upress_config** out);
UPRESS_API void upress_config_free(upress_config* config);

UPRESS_API int upress_config_set_seed(upress_config* config, uint64_t seed);
UPRESS_API int upress_config_set_jobs(upress_config* config, int jobs);
UPRESS_API int upress_config_set_output_dir(upress_config* config, const char* dir);
UPRESS_API int upress_config_validate(const upress_config* config);
/* YAML text of the config; release with upress_string_free. */
UPRESS_API int upress_config_to_string(const upress_config* config, char** out);
UPRESS_API void upress_string_free(char* text);

UPRESS_API size_t upress_preset_count(void);
/* NULL past the end. */
UPRESS_API const char* upress_preset_name(size_t index);

/* Runners write their files under the config's output directory (error.json on failure). */
UPRESS_API int upress_run_estimate(const upress_config* config, double* estimate);
UPRESS_API int upress_run_verify(const upress_config* config);
UPRESS_API int upress_run_sweep(const upress_config* config);
UPRESS_API int upress_run_oracle(const upress_config* config);

/* Writes error.json under dir from the calling thread's last failure with the given status. */
UPRESS_API int upress_write_error_report(const char* dir, const char* command, int status);

/* Pressure estimate of the config without writing files. */
UPRESS_API int upress_estimate_value(const upress_config* config, double* estimate);
/* Expansion rate of the unstable bundle of the config system. */
UPRESS_API int upress_unstable_rate(const upress_config* config, double* rate);

/* sum p_i (a_i - log p_i) <= log sum e^{a_i}; gibbs (length n) may be NULL. */
UPRESS_API int upress_log_sum_inequality(const double* p, const double* a, size_t n, double* lhs, double* rhs,
                                         double* gibbs);

#ifdef __cplusplus
}
#endif

#endif

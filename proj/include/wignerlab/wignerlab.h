#ifndef WIGNERLAB_H
#define WIGNERLAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  ifdef WIGNERLAB_BUILDING
#    define WL_API __declspec(dllexport)
#  else
#    define WL_API __declspec(dllimport)
#  endif
#else
#  define WL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum wl_status {
    WL_OK = 0,
    WL_INVALID_DIMENSION,
    WL_INVALID_STATE,
    WL_UNSUPPORTED_ORDER,
    WL_INVALID_ARGUMENTS,
    WL_OUT_OF_RANGE,
    WL_DIMENSION_MISMATCH,
    WL_NOT_HERMITIAN,
    WL_SINGULAR_INPUT,
    WL_ILL_CONDITIONED_ENERGY,
    WL_NUMERICAL_FAILURE,
    WL_CONFIG,
    WL_NOT_FOUND,
    WL_IO,
    WL_CORRUPT,
    WL_INTERNAL
} wl_status;

typedef struct wl_ensemble wl_ensemble;
typedef struct wl_matrix wl_matrix;
typedef struct wl_spectrum wl_spectrum;
typedef struct wl_result wl_result;

/* Kebab-case name of a status, e.g. "invalid-dimension". */
WL_API const char* wl_status_name(wl_status status);
/* Message of the last failure on the calling thread; "" after success. */
WL_API const char* wl_last_error(void);
/* Frees strings returned through char** out-parameters. */
WL_API void wl_string_free(char* s);

/* Builtin name ("gue", "goe", ...), or a JSON ensemble document. */
WL_API wl_status wl_ensemble_builtin(const char* name, wl_ensemble** out);
WL_API wl_status wl_ensemble_from_json(const char* json, wl_ensemble** out);
WL_API wl_status wl_ensemble_to_json(const wl_ensemble* e, char** out);
WL_API void wl_ensemble_free(wl_ensemble* e);

/* Raw M_n from stream (master_seed, stream_index). */
WL_API wl_status wl_sample(const wl_ensemble* e, size_t n, uint64_t master_seed, uint64_t stream_index,
                           wl_matrix** out);
/* W_n = M_n / sqrt(n); fails with WL_INVALID_STATE on a normalized input. */
WL_API wl_status wl_normalize(const wl_matrix* raw, wl_matrix** out);
WL_API size_t wl_matrix_dim(const wl_matrix* m);
WL_API int wl_matrix_is_normalized(const wl_matrix* m);
WL_API wl_status wl_matrix_entry(const wl_matrix* m, size_t i, size_t j, double* re, double* im);
WL_API void wl_matrix_free(wl_matrix* m);

/* Eigenvalues of a normalized matrix, ascending. */
WL_API wl_status wl_eigenvalues(const wl_matrix* m, wl_spectrum** out);
WL_API size_t wl_spectrum_size(const wl_spectrum* s);
/* Copies min(capacity, size) ascending eigenvalues. */
WL_API size_t wl_spectrum_values(const wl_spectrum* s, double* values, size_t capacity);
/* Eigenvalues in [lo, hi). */
WL_API size_t wl_spectrum_count(const wl_spectrum* s, double lo, double hi);
WL_API void wl_spectrum_free(wl_spectrum* s);

WL_API double wl_semicircle_density(double x);
WL_API double wl_semicircle_cdf(double x);
WL_API wl_status wl_classical_location(size_t n, size_t i, double* out);
/* s_sc(E + i eta), eta > 0. */
WL_API wl_status wl_semicircle_stieltjes(double energy, double eta, double* re, double* im);

/* Runs the experiment described by a JSON config; workers = 0 uses every core. */
WL_API wl_status wl_experiment_run(const char* config_json, unsigned workers, const char* cache_dir,
                                   wl_result** out);
/* JSON summary with the resolved config embedded. */
WL_API wl_status wl_result_summary(const wl_result* r, char** out);
/* 1 when every built-in check of the run passed. */
WL_API int wl_result_passed(const wl_result* r);
/* Writes JSON, CSV and optionally SVG files; never overwrites. */
WL_API wl_status wl_result_write(const wl_result* r, const char* out_dir, int plots);
WL_API void wl_result_free(wl_result* r);

/* Samples, writes matrix.csv and spectrum.csv, stores the spectrum in the cache. */
WL_API wl_status wl_sample_to_dir(const wl_ensemble* e, size_t n, uint64_t master_seed, const char* out_dir,
                                  const char* cache_dir);

/* Default cache root: the environment variable, else ".wignerlab-cache". */
WL_API wl_status wl_cache_default_root(char** out);
/* JSON array of {key, file, status, detail}; verify checks every entry. */
WL_API wl_status wl_cache_list(const char* cache_dir, int verify, char** out);
WL_API wl_status wl_cache_prune(const char* cache_dir, size_t* removed);

#ifdef __cplusplus
}
#endif

#endif

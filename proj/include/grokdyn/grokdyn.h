/* C interface to grokdyn. All functions return a grokdyn_status; on failure the
 * message is available from grokdyn_last_error() on the same thread. */
#ifndef GROKDYN_H
#define GROKDYN_H

#include <stddef.h>
#include <stdint.h>

#if defined(GROKDYN_BUILDING_LIBRARY)
#define GROKDYN_API __attribute__((visibility("default")))
#else
#define GROKDYN_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum grokdyn_status {
  GROKDYN_OK = 0,
  GROKDYN_ERR_INVALID_ARGUMENT = 1,
  GROKDYN_ERR_DIMENSION = 2,
  GROKDYN_ERR_DIVERGENCE = 3,
  GROKDYN_ERR_RANK_DEFICIENT = 4,
  GROKDYN_ERR_NUMERICAL = 5,
  GROKDYN_ERR_INSUFFICIENT_HISTORY = 6,
  GROKDYN_ERR_IO = 7,
  GROKDYN_ERR_CHECK_FAILED = 8,
  GROKDYN_ERR_NULL = 9,
  GROKDYN_ERR_BUFFER_TOO_SMALL = 10,
  GROKDYN_ERR_INTERNAL = 99
} grokdyn_status;

GROKDYN_API const char* grokdyn_version(void);
GROKDYN_API const char* grokdyn_last_error(void);
GROKDYN_API const char* grokdyn_status_name(grokdyn_status status);
/* Process exit code for a status: 0 ok, 1 failed check, 2 validation, 3 numerical, 4 I/O. */
GROKDYN_API int grokdyn_exit_code(grokdyn_status status);

/* ---- datasets: all unordered pairs a <= b of residues mod p ---- */
typedef struct grokdyn_dataset grokdyn_dataset;

GROKDYN_API grokdyn_status grokdyn_dataset_create(int p, grokdyn_dataset** out);
GROKDYN_API grokdyn_status grokdyn_dataset_split(grokdyn_dataset* d, double train_fraction,
                                                 uint64_t seed);
GROKDYN_API grokdyn_status grokdyn_dataset_split_count(grokdyn_dataset* d, int64_t n_train,
                                                       uint64_t seed);
GROKDYN_API grokdyn_status grokdyn_dataset_size(const grokdyn_dataset* d, int64_t* total,
                                                int64_t* n_train, int64_t* n_test);
GROKDYN_API grokdyn_status grokdyn_dataset_pair(const grokdyn_dataset* d, int64_t row, int* a,
                                                int* b, int* c);
/* Copies up to `capacity` sorted 0-based train row indices. */
GROKDYN_API grokdyn_status grokdyn_dataset_train_rows(const grokdyn_dataset* d, int64_t* out,
                                                      int64_t capacity);
GROKDYN_API void grokdyn_dataset_destroy(grokdyn_dataset* d);

/* ---- Fourier analysis of a p x d_h embedding (column-major doubles, p odd) ---- */
typedef struct grokdyn_fourier grokdyn_fourier;

GROKDYN_API grokdyn_status grokdyn_fourier_analyze(const double* embedding, int64_t p,
                                                   int64_t d_h, grokdyn_fourier** out);
GROKDYN_API grokdyn_status grokdyn_fourier_frequencies(const grokdyn_fourier* f, int* count);
/* k in 1..(p-1)/2 */
GROKDYN_API grokdyn_status grokdyn_fourier_metrics(const grokdyn_fourier* f, int k,
                                                   double* norm_re, double* norm_im,
                                                   double* aspect, double* ortho);
GROKDYN_API grokdyn_status grokdyn_fourier_mean_overlap(const grokdyn_fourier* f, double* out);
/* Writes the JSON report (NUL-terminated). *needed receives the required size incl. NUL. */
GROKDYN_API grokdyn_status grokdyn_fourier_report_json(const grokdyn_fourier* f, char* buf,
                                                       size_t capacity, size_t* needed);
GROKDYN_API void grokdyn_fourier_destroy(grokdyn_fourier* f);

/* ---- effective dynamics on the train rows of a split dataset ---- */
/* embedding is p x d_h column-major; activation is "relu", "identity" or "leaky_relu:<s>". */
GROKDYN_API grokdyn_status grokdyn_effective_cost(const grokdyn_dataset* d,
                                                  const double* embedding, int64_t d_h,
                                                  double lambda, const char* activation,
                                                  double* out);
/* Writes the p x d_h update direction (column-major) into out. */
GROKDYN_API grokdyn_status grokdyn_effective_direction(const grokdyn_dataset* d,
                                                       const double* embedding, int64_t d_h,
                                                       const char* activation, double* out);
GROKDYN_API grokdyn_status grokdyn_gradcheck(int p, int64_t d_h, const char* activation,
                                             double lambda, uint64_t seed,
                                             double* max_rel_error);

/* ---- parabola landscape (y - x^2)^2 ---- */
GROKDYN_API grokdyn_status grokdyn_parabola_projection(double x, double y, double* foot_x,
                                                       double* dist);

/* ---- experiment runs ---- */
typedef void (*grokdyn_log_fn)(const char* line, void* user);

/* Effective default config for a subcommand, as JSON. */
GROKDYN_API grokdyn_status grokdyn_default_config(const char* subcommand, char* buf,
                                                  size_t capacity, size_t* needed);
/* config_json: flat JSON object with at least "subcommand". */
GROKDYN_API grokdyn_status grokdyn_run(const char* config_json, grokdyn_log_fn log, void* user);
GROKDYN_API grokdyn_status grokdyn_emit_plots(const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* GROKDYN_H */

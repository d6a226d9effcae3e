/* Exercises the shared library through its C header only. */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "grokdyn/grokdyn.h"

static int failures = 0;

#define EXPECT(cond)                                                  \
  do {                                                                \
    if (!(cond)) {                                                    \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                     \
    }                                                                 \
  } while (0)

static void count_lines(const char* line, void* user) {
  (void)line;
  ++*(int*)user;
}

int main(void) {
  EXPECT(strlen(grokdyn_version()) > 0);
  EXPECT(strcmp(grokdyn_status_name(GROKDYN_OK), "ok") == 0);

  /* datasets */
  grokdyn_dataset* d = NULL;
  EXPECT(grokdyn_dataset_create(2, &d) == GROKDYN_ERR_INVALID_ARGUMENT);
  EXPECT(strlen(grokdyn_last_error()) > 0);
  EXPECT(grokdyn_dataset_create(5, NULL) == GROKDYN_ERR_NULL);
  EXPECT(grokdyn_dataset_create(5, &d) == GROKDYN_OK);
  int64_t total = 0, n_train = 0, n_test = 0;
  EXPECT(grokdyn_dataset_size(d, &total, &n_train, &n_test) == GROKDYN_OK);
  EXPECT(total == 15);
  int a = 0, b = 0, c = 0;
  EXPECT(grokdyn_dataset_pair(d, 14, &a, &b, &c) == GROKDYN_OK);
  EXPECT(a == 4 && b == 4 && c == 3);
  EXPECT(grokdyn_dataset_pair(d, 15, &a, &b, &c) == GROKDYN_ERR_INVALID_ARGUMENT);
  EXPECT(grokdyn_dataset_split(d, 0.7, 0) == GROKDYN_OK);
  EXPECT(grokdyn_dataset_size(d, &total, &n_train, &n_test) == GROKDYN_OK);
  EXPECT(n_train == 10 && n_test == 5);
  int64_t rows[10];
  EXPECT(grokdyn_dataset_train_rows(d, rows, 10) == GROKDYN_OK);
  for (int i = 1; i < 10; ++i) EXPECT(rows[i] > rows[i - 1]);

  /* effective dynamics on the train rows */
  double E[5 * 24];
  srand(3);
  for (int i = 0; i < 5 * 24; ++i) E[i] = (double)rand() / RAND_MAX - 0.5;
  double cost = 0.0;
  EXPECT(grokdyn_effective_cost(d, E, 24, 0.01, "relu", &cost) == GROKDYN_OK);
  EXPECT(cost > 0.0 && isfinite(cost));
  double dir[5 * 24];
  EXPECT(grokdyn_effective_direction(d, E, 24, "relu", dir) == GROKDYN_OK);
  EXPECT(grokdyn_effective_cost(d, E, 24, 0.01, "swish", &cost) == GROKDYN_ERR_INVALID_ARGUMENT);
  grokdyn_dataset_destroy(d);
  grokdyn_dataset_destroy(NULL);

  double err = 1.0;
  EXPECT(grokdyn_gradcheck(7, 32, "relu", 1e-3, 0, &err) == GROKDYN_OK);
  EXPECT(err < 1e-4);

  /* Fourier: a single circle at frequency 2 */
  const int p = 11;
  double circle[11 * 2];
  for (int j = 0; j < p; ++j) {
    circle[j] = cos(2.0 * M_PI * 2 * j / p);
    circle[p + j] = sin(2.0 * M_PI * 2 * j / p);
  }
  grokdyn_fourier* f = NULL;
  EXPECT(grokdyn_fourier_analyze(circle, p, 2, &f) == GROKDYN_OK);
  int nf = 0;
  EXPECT(grokdyn_fourier_frequencies(f, &nf) == GROKDYN_OK && nf == 5);
  double re, im, aspect, ortho;
  EXPECT(grokdyn_fourier_metrics(f, 2, &re, &im, &aspect, &ortho) == GROKDYN_OK);
  EXPECT(fabs(re - 0.5) < 1e-12 && fabs(im - 0.5) < 1e-12);
  EXPECT(fabs(aspect - 1.0) < 1e-12 && ortho < 1e-12);
  EXPECT(grokdyn_fourier_metrics(f, 6, &re, &im, &aspect, &ortho) == GROKDYN_ERR_INVALID_ARGUMENT);
  size_t needed = 0;
  EXPECT(grokdyn_fourier_report_json(f, NULL, 0, &needed) == GROKDYN_ERR_BUFFER_TOO_SMALL);
  char* buf = malloc(needed);
  EXPECT(grokdyn_fourier_report_json(f, buf, needed, &needed) == GROKDYN_OK);
  EXPECT(strstr(buf, "\"power_rank\"") != NULL);
  free(buf);
  grokdyn_fourier_destroy(f);
  EXPECT(grokdyn_fourier_analyze(circle, 10, 2, &f) == GROKDYN_ERR_INVALID_ARGUMENT);

  double fx = 0.0, dist = 0.0;
  EXPECT(grokdyn_parabola_projection(0.0, -1.0, &fx, &dist) == GROKDYN_OK);
  EXPECT(fx == 0.0 && fabs(dist - 1.0) < 1e-12);

  /* runs */
  needed = 0;
  grokdyn_default_config("toy", NULL, 0, &needed);
  EXPECT(needed > 2);
  EXPECT(grokdyn_run("{\"subcommand\":\"nope\"}", NULL, NULL) == GROKDYN_ERR_INVALID_ARGUMENT);
  EXPECT(grokdyn_run("{not json", NULL, NULL) == GROKDYN_ERR_INVALID_ARGUMENT);
  EXPECT(grokdyn_exit_code(GROKDYN_ERR_INVALID_ARGUMENT) == 2);
  EXPECT(grokdyn_exit_code(GROKDYN_ERR_IO) == 4);
  EXPECT(grokdyn_exit_code(GROKDYN_ERR_NUMERICAL) == 3);
  EXPECT(grokdyn_exit_code(GROKDYN_ERR_CHECK_FAILED) == 1);

  char cfg[512];
  snprintf(cfg, sizeof cfg,
           "{\"subcommand\":\"toy\",\"steps\":100,\"lambda\":0.01,\"out_dir\":\"%s\"}",
           CAPI_SCRATCH_DIR);
  int lines = 0;
  EXPECT(grokdyn_run(cfg, count_lines, &lines) == GROKDYN_OK);
  EXPECT(lines > 0);
  EXPECT(grokdyn_emit_plots(CAPI_SCRATCH_DIR) == GROKDYN_OK);
  EXPECT(grokdyn_emit_plots(CAPI_SCRATCH_DIR "/missing") == GROKDYN_ERR_IO);

  if (failures) {
    fprintf(stderr, "%d C API check(s) failed\n", failures);
    return 1;
  }
  printf("C API checks passed\n");
  return 0;
}

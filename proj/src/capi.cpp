#include "grokdyn/grokdyn.h"

#include <cstring>
#include <string>

#include "grokdyn/data.hpp"
#include "grokdyn/effective.hpp"
#include "grokdyn/experiment.hpp"
#include "grokdyn/fourier.hpp"
#include "grokdyn/manifold.hpp"

struct grokdyn_dataset {
  grokdyn::Dataset d;
};

struct grokdyn_fourier {
  grokdyn::FourierFeatures ff;
  std::vector<grokdyn::CircleMetrics> metrics;
  double mean_overlap = 0.0;
};

namespace {

thread_local std::string g_last_error;

grokdyn_status fail(grokdyn_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <typename F>
grokdyn_status guarded(F&& f) {
  try {
    g_last_error.clear();
    f();
    return GROKDYN_OK;
  } catch (const grokdyn::Error& e) {
    return fail(static_cast<grokdyn_status>(static_cast<int>(e.code())), e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(GROKDYN_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(GROKDYN_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(GROKDYN_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(GROKDYN_ERR_INTERNAL, "unknown error");
  }
}

grokdyn_status copy_out(const std::string& s, char* buf, size_t capacity, size_t* needed) {
  if (needed) *needed = s.size() + 1;
  if (!buf || capacity < s.size() + 1) {
    return fail(GROKDYN_ERR_BUFFER_TOO_SMALL, "buffer needs " + std::to_string(s.size() + 1) +
                                                   " bytes");
  }
  std::memcpy(buf, s.c_str(), s.size() + 1);
  return GROKDYN_OK;
}

void need(const void* p, const char* what) {
  if (!p) throw grokdyn::InvalidArgument(std::string(what) + " is null");
}

grokdyn::Matrix embedding_for(const grokdyn_dataset* d, const double* embedding, int64_t d_h) {
  need(embedding, "embedding");
  if (d_h < 1) throw grokdyn::InvalidArgument("d_h must be >= 1");
  return Eigen::Map<const grokdyn::Matrix>(embedding, d->d.p, d_h);
}

}  // namespace

extern "C" {

const char* grokdyn_version(void) { return GROKDYN_VERSION; }

const char* grokdyn_last_error(void) { return g_last_error.c_str(); }

const char* grokdyn_status_name(grokdyn_status status) {
  switch (status) {
    case GROKDYN_OK: return "ok";
    case GROKDYN_ERR_INVALID_ARGUMENT: return "invalid argument";
    case GROKDYN_ERR_DIMENSION: return "dimension mismatch";
    case GROKDYN_ERR_DIVERGENCE: return "divergence";
    case GROKDYN_ERR_RANK_DEFICIENT: return "rank deficient";
    case GROKDYN_ERR_NUMERICAL: return "numerical error";
    case GROKDYN_ERR_INSUFFICIENT_HISTORY: return "insufficient history";
    case GROKDYN_ERR_IO: return "i/o error";
    case GROKDYN_ERR_CHECK_FAILED: return "check failed";
    case GROKDYN_ERR_NULL: return "null handle";
    case GROKDYN_ERR_BUFFER_TOO_SMALL: return "buffer too small";
    case GROKDYN_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

int grokdyn_exit_code(grokdyn_status status) {
  switch (status) {
    case GROKDYN_OK: return 0;
    case GROKDYN_ERR_NULL:
    case GROKDYN_ERR_BUFFER_TOO_SMALL:
      return 2;
    case GROKDYN_ERR_INTERNAL: return 1;
    default: return grokdyn::exit_status(static_cast<grokdyn::ErrorCode>(status));
  }
}

grokdyn_status grokdyn_dataset_create(int p, grokdyn_dataset** out) {
  if (!out) return fail(GROKDYN_ERR_NULL, "out is null");
  *out = nullptr;
  return guarded([&] { *out = new grokdyn_dataset{grokdyn::build_dataset(p)}; });
}

grokdyn_status grokdyn_dataset_split(grokdyn_dataset* d, double train_fraction, uint64_t seed) {
  if (!d) return fail(GROKDYN_ERR_NULL, "dataset is null");
  return guarded([&] { d->d = grokdyn::split_dataset(std::move(d->d), train_fraction, seed); });
}

grokdyn_status grokdyn_dataset_split_count(grokdyn_dataset* d, int64_t n_train, uint64_t seed) {
  if (!d) return fail(GROKDYN_ERR_NULL, "dataset is null");
  return guarded([&] { d->d = grokdyn::split_dataset_count(std::move(d->d), n_train, seed); });
}

grokdyn_status grokdyn_dataset_size(const grokdyn_dataset* d, int64_t* total, int64_t* n_train,
                                    int64_t* n_test) {
  if (!d) return fail(GROKDYN_ERR_NULL, "dataset is null");
  if (total) *total = d->d.size();
  if (n_train) *n_train = static_cast<int64_t>(d->d.train_idx.size());
  if (n_test) *n_test = static_cast<int64_t>(d->d.test_idx.size());
  return GROKDYN_OK;
}

grokdyn_status grokdyn_dataset_pair(const grokdyn_dataset* d, int64_t row, int* a, int* b,
                                    int* c) {
  if (!d) return fail(GROKDYN_ERR_NULL, "dataset is null");
  if (row < 0 || row >= d->d.size()) {
    return fail(GROKDYN_ERR_INVALID_ARGUMENT, "row " + std::to_string(row) + " out of range");
  }
  const auto& pr = d->d.pairs[static_cast<std::size_t>(row)];
  if (a) *a = pr.a;
  if (b) *b = pr.b;
  if (c) *c = pr.c;
  return GROKDYN_OK;
}

grokdyn_status grokdyn_dataset_train_rows(const grokdyn_dataset* d, int64_t* out,
                                          int64_t capacity) {
  if (!d) return fail(GROKDYN_ERR_NULL, "dataset is null");
  if (!out) return fail(GROKDYN_ERR_NULL, "out is null");
  const auto n = static_cast<int64_t>(d->d.train_idx.size());
  if (capacity < n) return fail(GROKDYN_ERR_BUFFER_TOO_SMALL, "need " + std::to_string(n));
  for (int64_t i = 0; i < n; ++i) out[i] = d->d.train_idx[static_cast<std::size_t>(i)];
  return GROKDYN_OK;
}

void grokdyn_dataset_destroy(grokdyn_dataset* d) { delete d; }

grokdyn_status grokdyn_fourier_analyze(const double* embedding, int64_t p, int64_t d_h,
                                       grokdyn_fourier** out) {
  if (!out) return fail(GROKDYN_ERR_NULL, "out is null");
  *out = nullptr;
  return guarded([&] {
    need(embedding, "embedding");
    if (p < 1 || d_h < 1) throw grokdyn::InvalidArgument("embedding shape must be positive");
    const grokdyn::Matrix E = Eigen::Map<const grokdyn::Matrix>(embedding, p, d_h);
    auto* f = new grokdyn_fourier;
    try {
      f->ff = grokdyn::dft_embedding(E);
      f->metrics = grokdyn::circle_metrics(f->ff);
      f->mean_overlap = grokdyn::mean_off_diagonal(grokdyn::frequency_overlap(f->ff));
    } catch (...) {
      delete f;
      throw;
    }
    *out = f;
  });
}

grokdyn_status grokdyn_fourier_frequencies(const grokdyn_fourier* f, int* count) {
  if (!f) return fail(GROKDYN_ERR_NULL, "fourier handle is null");
  if (!count) return fail(GROKDYN_ERR_NULL, "count is null");
  *count = f->ff.frequencies();
  return GROKDYN_OK;
}

grokdyn_status grokdyn_fourier_metrics(const grokdyn_fourier* f, int k, double* norm_re,
                                       double* norm_im, double* aspect, double* ortho) {
  if (!f) return fail(GROKDYN_ERR_NULL, "fourier handle is null");
  if (k < 1 || k > f->ff.frequencies()) {
    return fail(GROKDYN_ERR_INVALID_ARGUMENT, "frequency " + std::to_string(k) + " out of range");
  }
  const auto& m = f->metrics[static_cast<std::size_t>(k - 1)];
  if (norm_re) *norm_re = m.norm_re;
  if (norm_im) *norm_im = m.norm_im;
  if (aspect) *aspect = m.aspect;
  if (ortho) *ortho = m.ortho;
  return GROKDYN_OK;
}

grokdyn_status grokdyn_fourier_mean_overlap(const grokdyn_fourier* f, double* out) {
  if (!f) return fail(GROKDYN_ERR_NULL, "fourier handle is null");
  if (!out) return fail(GROKDYN_ERR_NULL, "out is null");
  *out = f->mean_overlap;
  return GROKDYN_OK;
}

grokdyn_status grokdyn_fourier_report_json(const grokdyn_fourier* f, char* buf, size_t capacity,
                                           size_t* needed) {
  if (!f) return fail(GROKDYN_ERR_NULL, "fourier handle is null");
  std::string s;
  const grokdyn_status st = guarded([&] { s = grokdyn::fourier_report(f->ff).dump(2); });
  if (st != GROKDYN_OK) return st;
  return copy_out(s, buf, capacity, needed);
}

void grokdyn_fourier_destroy(grokdyn_fourier* f) { delete f; }

grokdyn_status grokdyn_effective_cost(const grokdyn_dataset* d, const double* embedding,
                                      int64_t d_h, double lambda, const char* activation,
                                      double* out) {
  if (!d) return fail(GROKDYN_ERR_NULL, "dataset is null");
  if (!out) return fail(GROKDYN_ERR_NULL, "out is null");
  return guarded([&] {
    need(activation, "activation");
    const grokdyn::TrainTest tt = grokdyn::materialize(d->d);
    *out = grokdyn::cost_R(embedding_for(d, embedding, d_h), tt.X_train, tt.Y_train, lambda,
                           grokdyn::Activation::parse(activation));
  });
}

grokdyn_status grokdyn_effective_direction(const grokdyn_dataset* d, const double* embedding,
                                           int64_t d_h, const char* activation, double* out) {
  if (!d) return fail(GROKDYN_ERR_NULL, "dataset is null");
  if (!out) return fail(GROKDYN_ERR_NULL, "out is null");
  return guarded([&] {
    need(activation, "activation");
    const grokdyn::TrainTest tt = grokdyn::materialize(d->d);
    const grokdyn::Matrix delta = grokdyn::grad_R(embedding_for(d, embedding, d_h), tt.X_train,
                                                  tt.Y_train, grokdyn::Activation::parse(activation));
    Eigen::Map<grokdyn::Matrix>(out, delta.rows(), delta.cols()) = delta;
  });
}

grokdyn_status grokdyn_gradcheck(int p, int64_t d_h, const char* activation, double lambda,
                                 uint64_t seed, double* max_rel_error) {
  if (!max_rel_error) return fail(GROKDYN_ERR_NULL, "max_rel_error is null");
  return guarded([&] {
    need(activation, "activation");
    const auto inst =
        grokdyn::make_gradcheck_instance(p, d_h, grokdyn::Activation::parse(activation), seed);
    *max_rel_error = grokdyn::gradcheck(inst, lambda);
  });
}

grokdyn_status grokdyn_parabola_projection(double x, double y, double* foot_x, double* dist) {
  return guarded([&] {
    const grokdyn::ParabolaFoot f = grokdyn::parabola_projection(x, y);
    if (foot_x) *foot_x = f.x;
    if (dist) *dist = f.dist;
  });
}

grokdyn_status grokdyn_default_config(const char* subcommand, char* buf, size_t capacity,
                                      size_t* needed) {
  std::string s;
  const grokdyn_status st = guarded([&] {
    need(subcommand, "subcommand");
    s = grokdyn::RunConfig::defaults_for(subcommand).to_json().dump(2);
  });
  if (st != GROKDYN_OK) return st;
  return copy_out(s, buf, capacity, needed);
}

grokdyn_status grokdyn_run(const char* config_json, grokdyn_log_fn log, void* user) {
  return guarded([&] {
    need(config_json, "config_json");
    const auto j = nlohmann::json::parse(config_json);
    const grokdyn::RunConfig cfg = grokdyn::RunConfig::from_json(j);
    grokdyn::LogFn fn;
    if (log) fn = [log, user](const std::string& line) { log(line.c_str(), user); };
    grokdyn::run(cfg, fn);
  });
}

grokdyn_status grokdyn_emit_plots(const char* out_dir) {
  return guarded([&] {
    need(out_dir, "out_dir");
    grokdyn::emit_plots(out_dir);
  });
}

}  // extern "C"

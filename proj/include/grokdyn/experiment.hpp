#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "grokdyn/data.hpp"
#include "grokdyn/effective.hpp"
#include "grokdyn/errors.hpp"
#include "grokdyn/manifold.hpp"
#include "grokdyn/toy.hpp"
#include "grokdyn/trainer.hpp"

namespace grokdyn {

inline constexpr const char* kSubcommands[] = {"toy",     "train-real", "probe-cosine",
                                               "sim-isolated", "fourier", "gradcheck"};

bool is_subcommand(const std::string& name);

/// Flat run description. Each subcommand has its own defaults (see defaults_for);
/// a JSON file and then command-line flags override them.
struct RunConfig {
  std::string subcommand = "train-real";
  int p = 11;
  Index d_h = 128;
  double f_s = 0.7;
  Index n_test = 0;  // > 0 overrides f_s with an explicit test-set size
  double lambda = 1e-4;
  double eta = 1.0;
  double beta = 0.0;
  Index steps = 20000;
  Index c = 10;
  std::vector<std::uint64_t> seeds{0};
  Index snapshot_stride = 0;
  Index log_stride = 10;
  Index probe_stride = 10;
  std::string activation = "relu";
  std::string reduction = "mean";  // "sum" or "mean" data term during training
  std::string out_dir = "runs";
  int jobs = 1;

  // toy
  std::string kind = "linear2";
  std::string init = "default";  // "default", "random" or comma-separated numbers

  // fourier: embedding/params prefix to analyse, and an optional baseline to compare with
  std::string input;
  std::string baseline;

  // probe-cosine projection
  Index projection_steps = 1000;
  double projection_eta = 1.0;
  double projection_beta = 0.9;
  double accept_loss = 1e-6;

  // gradcheck
  double fd_step = 1e-6;
  double tolerance = 1e-4;

  bool operator==(const RunConfig&) const = default;

  static RunConfig defaults_for(const std::string& subcommand);

  /// Defaults for j["subcommand"] (or `fallback_subcommand`), overlaid with every key in j.
  /// Unknown keys and ill-typed values raise InvalidArgument.
  static RunConfig from_json(const nlohmann::json& j, const std::string& fallback_subcommand = "");
  nlohmann::ordered_json to_json() const;

  /// Checks every field against the subcommand's preconditions.
  void validate() const;

  Activation parsed_activation() const { return Activation::parse(activation); }
  double data_scale(Index n_train) const;
};

std::vector<std::uint64_t> parse_seed_list(const std::string& text);

/// Default output directory: $GROKDYN_OUT if set, else "runs".
std::string default_out_dir();

// ---- per-seed runners (in memory, no files) ----

Dataset split_for(const RunConfig& cfg, std::uint64_t seed);

struct TrainSeedRun {
  std::uint64_t seed = 0;
  Dataset dataset;
  TrainResult train;
  std::optional<ProbeSeries> probe;  // filled for probe-cosine
};

TrainSeedRun run_train_seed(const RunConfig& cfg, std::uint64_t seed);

struct SimSeedRun {
  std::uint64_t seed = 0;
  Dataset dataset;
  SimulateResult sim;
};

SimSeedRun run_sim_seed(const RunConfig& cfg, std::uint64_t seed);

struct ToySeedRun {
  std::uint64_t seed = 0;
  Vector init;
  std::vector<ToyStep> trajectory;
};

ToyModel toy_model_for(const RunConfig& cfg, std::uint64_t seed);
ToySeedRun run_toy_seed(const RunConfig& cfg, std::uint64_t seed);

struct GradcheckReport {
  double max_rel_error = 0.0;
  Index rows = 0;
  bool passed = false;
};

GradcheckReport run_gradcheck(const RunConfig& cfg, std::uint64_t seed);

// ---- aggregation across seeds ----

/// Column-wise mean of logs that share the same steps.
MetricsLog mean_log(std::span<const MetricsLog> logs);

/// Per-step mean cos_sim over seeds, restricted to steps present in every series.
std::vector<ProbeResult> mean_probe(std::span<const std::vector<ProbeResult>> series);

struct CosineShape {
  std::optional<Index> memorized_step;  // first step with mean train accuracy 1
  Index peak_step = 0;
  double peak_cos = 0.0;
  double pre_memorization_mean = 0.0;  // mean cos over probe steps before memorized_step
  bool peak_after_memorization = false;
  bool peak_exceeds_pre = false;
};

CosineShape cosine_shape(const std::vector<ProbeResult>& mean_cos, const MetricsLog& mean_metrics);

// ---- full runs ----

using LogFn = std::function<void(const std::string&)>;

/// Validates, runs every seed (up to cfg.jobs concurrently) and writes artifacts into
/// cfg.out_dir, then renders plots. Throws grokdyn::Error on failure; artifacts of seeds
/// that completed (and partial logs of failed ones) are written first.
void run(const RunConfig& cfg, const LogFn& log = {});

/// Renders SVG figures from the artifacts already in out_dir. Throws IoError when
/// config.json or the metrics it implies are missing.
void emit_plots(const std::filesystem::path& out_dir);

/// Process exit status for an error code: 2 validation, 3 numerical, 4 I/O, 1 failed check.
int exit_status(ErrorCode code);

nlohmann::ordered_json environment_fingerprint(std::uint64_t seed);

}  // namespace grokdyn

#pragma once

#include <deque>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "grokdyn/data.hpp"
#include "grokdyn/errors.hpp"
#include "grokdyn/net.hpp"

namespace grokdyn {

struct Snapshot {
  Index step = 0;
  Vector theta;
};

/// Optimiser state for full-batch gradient descent with heavy-ball momentum.
/// `history` keeps at most `history_capacity` snapshots, oldest first.
struct TrainState {
  Index step = 0;
  FlatVector params;
  Vector velocity;
  std::deque<Snapshot> history;
  std::size_t history_capacity = 11;

  static TrainState start(FlatVector params, Index window);
  void record();
};

using GradientFn = std::function<Vector(const Vector&)>;

/// v <- beta v + grad(theta); theta <- theta - eta v. Throws DivergenceError if
/// the gradient or the new iterate is not finite.
TrainState gd_step(TrainState state, const GradientFn& gradient, double eta, double beta);

struct GdSettings {
  double lambda = 0.0;
  double eta = 1.0;
  double beta = 0.0;
  double data_scale = 1.0;  // 1 for the summed loss, 1/(k m) for a mean loss
};

TrainState gd_step(TrainState state, Activation activation, const Matrix& X, const Matrix& Y,
                   const GdSettings& settings);

/// Fraction of rows whose argmax matches the target argmax (ties -> lowest index).
double accuracy_from_predictions(const Matrix& Yhat, const Matrix& Y);
double accuracy(const NetParams& params, const Matrix& X, const Matrix& Y);

struct MetricsRow {
  Index step = 0;
  double train_loss = 0.0;
  double test_loss = 0.0;
  double train_acc = 0.0;
  double test_acc = 0.0;
  double theta_norm = 0.0;
};

struct MetricsLog {
  std::vector<MetricsRow> rows;
};

struct RunSummary {
  Index final_step = 0;
  double final_train_acc = 0.0;
  double final_test_acc = 0.0;
  double final_train_loss = 0.0;
  double final_test_loss = 0.0;
  std::optional<Index> grokking_onset;  // first logged step with test acc >= threshold
};

RunSummary summarize(const MetricsLog& log, double onset_threshold = 0.99);

/// `step,train_loss,test_loss,train_acc,test_acc,theta_norm`
void write_metrics_csv(const MetricsLog& log, std::ostream& out);
MetricsLog read_metrics_csv(std::istream& in);

struct TrainConfig {
  Index steps = 1000;
  GdSettings gd;
  Index log_stride = 1;
  Index snapshot_stride = 1;  // 0 disables snapshots
  Index window = 10;          // update-averaging window c
};

struct TrainResult {
  MetricsLog log;
  std::vector<Snapshot> snapshots;
  NetParams final_params;
};

/// Thrown by train() on divergence; carries everything logged so far.
class TrainingDiverged : public DivergenceError {
 public:
  TrainingDiverged(std::int64_t step, const std::string& what, MetricsLog partial)
      : DivergenceError(step, what), partial_(std::move(partial)) {}
  const MetricsLog& partial_log() const noexcept { return partial_; }

 private:
  MetricsLog partial_;
};

MetricsRow evaluate(const NetParams& params, const TrainTest& data, Index step);

TrainResult train(const TrainConfig& config, const TrainTest& data, const NetParams& init);

}  // namespace grokdyn

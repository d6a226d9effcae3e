#include "grokdyn/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace grokdyn {

TrainState TrainState::start(FlatVector params, Index window) {
  if (window < 1) throw InvalidArgument("update window c must be >= 1");
  TrainState s;
  s.params = std::move(params);
  s.velocity = Vector::Zero(s.params.values.size());
  s.history_capacity = static_cast<std::size_t>(window) + 1;
  s.record();
  return s;
}

void TrainState::record() {
  history.push_back({step, params.values});
  while (history.size() > history_capacity) history.pop_front();
}

TrainState gd_step(TrainState state, const GradientFn& gradient, double eta, double beta) {
  if (!(eta > 0.0)) throw InvalidArgument("learning rate must be > 0");
  if (!(beta >= 0.0 && beta < 1.0)) throw InvalidArgument("momentum must lie in [0, 1)");
  const Vector g = gradient(state.params.values);
  if (!g.allFinite()) throw DivergenceError(state.step, "non-finite gradient");
  if (state.velocity.size() != g.size()) state.velocity = Vector::Zero(g.size());
  state.velocity = beta * state.velocity + g;
  state.params.values -= eta * state.velocity;
  if (!state.params.values.allFinite()) {
    throw DivergenceError(state.step, "non-finite parameters");
  }
  ++state.step;
  state.record();
  return state;
}

TrainState gd_step(TrainState state, Activation activation, const Matrix& X, const Matrix& Y,
                   const GdSettings& settings) {
  if (settings.lambda < 0.0) throw InvalidArgument("lambda must be >= 0");
  const std::vector<LayoutEntry> layout = state.params.layout;
  auto gradient = [&](const Vector& theta) {
    const NetParams p = unflatten(FlatVector{theta, layout}, activation);
    return grad_loss(p, X, Y, settings.lambda, settings.data_scale).values;
  };
  return gd_step(std::move(state), gradient, settings.eta, settings.beta);
}

double accuracy_from_predictions(const Matrix& Yhat, const Matrix& Y) {
  if (Yhat.rows() != Y.rows() || Yhat.cols() != Y.cols()) {
    throw DimensionError("prediction and target shapes differ");
  }
  if (Y.rows() == 0) return 0.0;
  Index correct = 0;
  for (Index i = 0; i < Y.rows(); ++i) {
    Index pred = 0;
    Index target = 0;
    // maxCoeff keeps the first maximal index.
    Yhat.row(i).maxCoeff(&pred);
    Y.row(i).maxCoeff(&target);
    if (pred == target) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(Y.rows());
}

double accuracy(const NetParams& params, const Matrix& X, const Matrix& Y) {
  return accuracy_from_predictions(forward(params, X).Yhat, Y);
}

RunSummary summarize(const MetricsLog& log, double onset_threshold) {
  RunSummary s;
  if (log.rows.empty()) return s;
  const auto& last = log.rows.back();
  s.final_step = last.step;
  s.final_train_acc = last.train_acc;
  s.final_test_acc = last.test_acc;
  s.final_train_loss = last.train_loss;
  s.final_test_loss = last.test_loss;
  for (const auto& r : log.rows) {
    if (r.test_acc >= onset_threshold) {
      s.grokking_onset = r.step;
      break;
    }
  }
  return s;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_metrics_csv(const MetricsLog& log, std::ostream& out) {
  out << "step,train_loss,test_loss,train_acc,test_acc,theta_norm\n";
  for (const auto& r : log.rows) {
    out << r.step << ',' << fmt(r.train_loss) << ',' << fmt(r.test_loss) << ','
        << fmt(r.train_acc) << ',' << fmt(r.test_acc) << ',' << fmt(r.theta_norm) << '\n';
  }
}

MetricsLog read_metrics_csv(std::istream& in) {
  MetricsLog log;
  std::string line;
  if (!std::getline(in, line) || line.rfind("step,train_loss", 0) != 0) {
    throw IoError("metrics CSV header missing");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    MetricsRow r;
    char comma = 0;
    ss >> r.step >> comma >> r.train_loss >> comma >> r.test_loss >> comma >> r.train_acc >>
        comma >> r.test_acc >> comma >> r.theta_norm;
    if (!ss) throw IoError("malformed metrics row: " + line);
    log.rows.push_back(r);
  }
  return log;
}

MetricsRow evaluate(const NetParams& params, const TrainTest& data, Index step) {
  MetricsRow r;
  r.step = step;
  const ForwardPass tr = forward(params, data.X_train);
  r.train_loss = (tr.Yhat - data.Y_train).squaredNorm();
  r.train_acc = accuracy_from_predictions(tr.Yhat, data.Y_train);
  if (data.X_test.rows() > 0) {
    const ForwardPass te = forward(params, data.X_test);
    r.test_loss = (te.Yhat - data.Y_test).squaredNorm();
    r.test_acc = accuracy_from_predictions(te.Yhat, data.Y_test);
  }
  r.theta_norm = std::sqrt(params.squared_norm());
  return r;
}

TrainResult train(const TrainConfig& config, const TrainTest& data, const NetParams& init) {
  if (config.steps < 0) throw InvalidArgument("step count must be >= 0");
  if (config.log_stride < 1) throw InvalidArgument("log stride must be >= 1");
  if (config.snapshot_stride < 0) throw InvalidArgument("snapshot stride must be >= 0");

  TrainResult result;
  TrainState state = TrainState::start(flatten(init), config.window);
  const Activation act = init.activation;
  auto params_of = [&](const TrainState& s) { return unflatten(s.params, act); };

  auto observe = [&](const TrainState& s) {
    const bool last = s.step == config.steps;
    if (s.step % config.log_stride == 0 || last) {
      result.log.rows.push_back(evaluate(params_of(s), data, s.step));
    }
    if (config.snapshot_stride > 0 && (s.step % config.snapshot_stride == 0 || last)) {
      result.snapshots.push_back({s.step, s.params.values});
    }
  };

  observe(state);
  try {
    while (state.step < config.steps) {
      state = gd_step(std::move(state), act, data.X_train, data.Y_train, config.gd);
      observe(state);
    }
  } catch (const DivergenceError& e) {
    throw TrainingDiverged(e.step(), "training diverged", result.log);
  }
  result.final_params = params_of(state);
  return result;
}

}  // namespace grokdyn

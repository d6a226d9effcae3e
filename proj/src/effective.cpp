#include "grokdyn/effective.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>

namespace grokdyn {

GramFactor::GramFactor(const Matrix& H, double max_condition) {
  if (!H.allFinite()) throw NumericalError("hidden activations are not finite");
  Matrix gram = Matrix::Zero(H.rows(), H.rows());
  gram.selfadjointView<Eigen::Lower>().rankUpdate(H);
  llt_.compute(gram);
  if (llt_.info() != Eigen::Success) {
    throw RankDeficiencyError(std::numeric_limits<double>::infinity(),
                              "H H^T is not positive definite");
  }
  const double rc = llt_.rcond();
  condition_ = rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
  if (!(condition_ <= max_condition)) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "cond(H H^T) ~ %.3e exceeds %.1e", condition_, max_condition);
    throw RankDeficiencyError(condition_, buf);
  }
}

Matrix GramFactor::inverse() const {
  return llt_.solve(Matrix::Identity(size(), size()));
}

Matrix ridge_solve(const Matrix& H, const Matrix& Y, double lambda) {
  if (!(lambda > 0.0)) throw InvalidArgument("ridge_solve needs lambda > 0; use pinv_solve");
  if (H.rows() != Y.rows()) throw DimensionError("H and Y row counts differ");
  // Solve in whichever dimension is smaller; both forms give the same minimiser.
  if (H.rows() < H.cols()) {
    Matrix K = Matrix::Zero(H.rows(), H.rows());
    K.selfadjointView<Eigen::Lower>().rankUpdate(H);
    K.diagonal().array() += lambda;
    Eigen::LLT<Matrix> llt(K.selfadjointView<Eigen::Lower>());
    if (llt.info() != Eigen::Success) throw NumericalError("ridge system not positive definite");
    return H.transpose() * llt.solve(Y);
  }
  Matrix K = Matrix::Zero(H.cols(), H.cols());
  K.selfadjointView<Eigen::Lower>().rankUpdate(H.transpose());
  K.diagonal().array() += lambda;
  Eigen::LLT<Matrix> llt(K.selfadjointView<Eigen::Lower>());
  if (llt.info() != Eigen::Success) throw NumericalError("ridge system not positive definite");
  return llt.solve(H.transpose() * Y);
}

Matrix pinv_solve(const Matrix& H, const Matrix& Y) {
  if (H.rows() != Y.rows()) throw DimensionError("H and Y row counts differ");
  if (H.rows() > H.cols()) {
    throw DimensionError("pinv_solve needs n <= d_h (more hidden units than samples)");
  }
  const GramFactor gram(H);
  return H.transpose() * gram.solve(Y);
}

namespace {

Matrix hidden(const Matrix& E, const Matrix& X, Activation activation) {
  if (X.cols() != E.rows()) throw DimensionError("X columns must equal embedding rows");
  return activation.apply(X * E);
}

}  // namespace

double cost_R(const Matrix& E, const Matrix& X, const Matrix& Y, double lambda,
              Activation activation) {
  const Matrix H = hidden(E, X, activation);
  if (H.rows() > H.cols()) throw DimensionError("cost_R needs n <= d_h");
  if (Y.rows() != H.rows()) throw DimensionError("Y rows must equal X rows");
  const GramFactor gram(H);
  const double trace = (Y.transpose() * gram.solve(Y)).trace();
  return lambda * E.squaredNorm() + lambda * trace;
}

double cost_R_ridge(const Matrix& E, const Matrix& X, const Matrix& Y, double lambda,
                    Activation activation) {
  const Matrix H = hidden(E, X, activation);
  const Matrix W2 = ridge_solve(H, Y, lambda);
  return (H * W2 - Y).squaredNorm() + lambda * (E.squaredNorm() + W2.squaredNorm());
}

Matrix grad_R(const Matrix& E, const Matrix& X, const Matrix& Y, Activation activation) {
  const Matrix Z = X * E;
  const Matrix H = activation.apply(Z);
  if (H.rows() > H.cols()) throw DimensionError("grad_R needs n <= d_h");
  if (Y.rows() != H.rows()) throw DimensionError("Y rows must equal X rows");
  const GramFactor gram(H);
  const Matrix B = gram.solve(Y);              // A Y
  const Matrix M = B * (B.transpose() * H);    // A Y Y^T A H
  return X.transpose() * M.cwiseProduct(activation.derivative(Z)) - E;
}

double max_relative_error(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("shape mismatch");
  if (a.size() == 0) return 0.0;
  const double scale = std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
  if (scale == 0.0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

double envelope_check(const Matrix& E, const Matrix& X, const Matrix& Y, double lambda,
                      Activation activation, double h) {
  if (!(lambda > 0.0)) throw InvalidArgument("envelope_check needs lambda > 0");
  const Matrix H = hidden(E, X, activation);
  NetParams at_min;
  at_min.W1 = E;
  at_min.W2 = ridge_solve(H, Y, lambda);
  at_min.activation = activation;
  const FlatVector g = grad_loss(at_min, X, Y, lambda);
  const Matrix analytic = g.values.head(E.size()).reshaped(E.rows(), E.cols());
  const Matrix numeric = central_difference(
      E, h, [&](const Matrix& e) { return cost_R_ridge(e, X, Y, lambda, activation); });
  return max_relative_error(numeric, analytic);
}

GradcheckInstance make_gradcheck_instance(int p, Index d_h, Activation activation,
                                          std::uint64_t seed, double margin) {
  Dataset d = build_dataset(p);
  GradcheckInstance inst;
  inst.activation = activation;
  if (activation.kind == Activation::Kind::kIdentity) {
    std::vector<Index> rows;
    for (int b = 0; b < p; ++b) rows.push_back(pair_row(p, 0, b));
    inst.X = select_rows(d.X, rows);
    inst.Y = select_rows(d.Y, rows);
  } else {
    inst.X = d.X;
    inst.Y = d.Y;
  }
  if (inst.X.rows() > d_h) throw InvalidArgument("gradcheck needs d_h >= number of pairs");
  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    inst.E = init_embedding(p, d_h, rng);
    if (activation.kind != Activation::Kind::kIdentity &&
        (inst.X * inst.E).cwiseAbs().minCoeff() < margin) {
      continue;
    }
    try {
      GramFactor check(activation.apply(inst.X * inst.E));
    } catch (const RankDeficiencyError&) {
      continue;
    }
    return inst;
  }
  throw NumericalError("could not draw a well-conditioned gradcheck instance");
}

double gradcheck(const GradcheckInstance& inst, double lambda, double h) {
  const Matrix analytic = -2.0 * lambda * grad_R(inst.E, inst.X, inst.Y, inst.activation);
  const Matrix numeric = central_difference(inst.E, h, [&](const Matrix& e) {
    return cost_R(e, inst.X, inst.Y, lambda, inst.activation);
  });
  return max_relative_error(numeric, analytic);
}

Matrix init_embedding(Index p, Index d_h, std::mt19937_64& rng) {
  if (p <= 0 || d_h <= 0) throw InvalidArgument("embedding shape must be positive");
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(p)));
  Matrix E(p, d_h);
  for (Index i = 0; i < E.size(); ++i) E.data()[i] = normal(rng);
  return E;
}

SimulateResult simulate(const SimulateConfig& config, const TrainTest& data, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return simulate(config, data, init_embedding(data.X_train.cols(), config.d_h, rng));
}

SimulateResult simulate(const SimulateConfig& config, const TrainTest& data, const Matrix& E0) {
  if (config.steps < 0) throw InvalidArgument("step count must be >= 0");
  if (!(config.eta > 0.0)) throw InvalidArgument("step size must be > 0");
  if (config.log_stride < 1) throw InvalidArgument("log stride must be >= 1");
  if (E0.rows() != data.X_train.cols()) throw DimensionError("embedding rows must equal p");
  if (E0.cols() <= data.X_train.rows()) {
    throw InvalidArgument("isolated dynamics need d_h > n_train (" + std::to_string(E0.cols()) +
                          " <= " + std::to_string(data.X_train.rows()) + ")");
  }

  const Matrix& X = data.X_train;
  const Matrix& Y = data.Y_train;
  const double y_norm = Y.norm();
  const Activation act = config.activation;

  SimulateResult result;
  Matrix E = E0;
  result.embeddings.push_back({0, E});

  for (Index t = 0;; ++t) {
    const Matrix Z = X * E;
    const Matrix H = act.apply(Z);
    std::optional<GramFactor> gram;
    try {
      gram.emplace(H);
    } catch (const RankDeficiencyError& e) {
      throw SimulationAborted(t, e.condition_estimate(), e.what(), result.log);
    }
    result.max_condition = std::max(result.max_condition, gram->condition_estimate());
    const Matrix B = gram->solve(Y);  // A Y

    const bool last = t == config.steps;
    if (t % config.log_stride == 0 || last) {
      const Matrix W2 = H.transpose() * B;  // H^+ Y
      const Matrix residual = H * W2 - Y;
      MetricsRow row;
      row.step = t;
      row.train_loss = residual.squaredNorm();
      row.train_acc = accuracy_from_predictions(H * W2, Y);
      if (data.X_test.rows() > 0) {
        const Matrix pred = act.apply(data.X_test * E) * W2;
        row.test_loss = (pred - data.Y_test).squaredNorm();
        row.test_acc = accuracy_from_predictions(pred, data.Y_test);
      }
      row.theta_norm = std::sqrt(E.squaredNorm() + W2.squaredNorm());
      result.log.rows.push_back(row);
      if (y_norm > 0.0) {
        result.max_interpolation_residual =
            std::max(result.max_interpolation_residual, residual.norm() / y_norm);
      }
    }
    if (config.snapshot_stride > 0 && t > 0 && t % config.snapshot_stride == 0 && !last) {
      result.embeddings.push_back({t, E});
    }
    if (last) break;

    const Matrix M = B * (B.transpose() * H);
    const Matrix delta = X.transpose() * M.cwiseProduct(act.derivative(Z)) - E;
    E += config.eta * delta;
    if (!E.allFinite()) {
      throw SimulationAborted(t + 1, std::numeric_limits<double>::infinity(),
                              "embedding became non-finite", result.log);
    }
  }
  if (config.steps > 0) result.embeddings.push_back({config.steps, E});
  return result;
}

}  // namespace grokdyn

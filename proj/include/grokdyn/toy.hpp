#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "grokdyn/manifold.hpp"
#include "grokdyn/types.hpp"

namespace grokdyn {

enum class ToyKind {
  kLinear2,         // y = w1 x1 + w2 x2
  kLinear3,         // y = w1 x1 + w2 x2 + w3 x3
  kTwoLayerScalar,  // y = w2 w1 x
  kLeaky1,          // y = leaky(w1 x1 + w2 x2)
  kParabola,        // L(x, y) = (y - x^2)^2 over parameters (x, y)
};

ToyKind parse_toy_kind(const std::string& name);
std::string toy_kind_name(ToyKind kind);
Index toy_dimension(ToyKind kind);

struct ToySample {
  std::vector<double> x;
  double y = 0.0;
};

struct ToyModel {
  ToyKind kind = ToyKind::kLinear2;
  Vector params;
  std::vector<ToySample> samples;  // unused by kParabola
  double lambda = 0.0;
  double leaky_slope = 0.1;

  /// Training sample of the corresponding figure: 1+1=2, 1+1+1=3, 1*1=1.
  static ToyModel with_defaults(ToyKind kind, double lambda);
};

struct ToyEvaluation {
  double loss = 0.0;         // unregularised
  double regularized = 0.0;  // loss + lambda ||theta||^2
  Vector grad;               // gradient of `regularized`
};

ToyEvaluation toy_loss_grad(const ToyModel& model, const Vector& theta);
inline ToyEvaluation toy_loss_grad(const ToyModel& model) {
  return toy_loss_grad(model, model.params);
}

/// Residuals f(theta, x_i) - y_i and their Jacobian (one row per sample).
void toy_residuals(const ToyModel& model, const Vector& theta, Vector& residual, Matrix& J);

ZeroLossProblem make_toy_problem(const ToyModel& model);

/// 100 Gaussian test inputs labelled by the target function of `kind`
/// (sum of inputs, or the scalar ratio of the training sample).
std::vector<ToySample> toy_test_set(const ToyModel& model, std::uint64_t seed, int count = 100);

/// Mean squared error over a sample set; NaN for kParabola.
double toy_mse(const ToyModel& model, const Vector& theta, const std::vector<ToySample>& set);

struct ToyStep {
  Index step = 0;
  Vector theta;
  double train_loss = 0.0;
  double test_loss = 0.0;
};

struct ToyRunOptions {
  double eta = 0.01;
  Index steps = 50000;
  Index log_stride = 1;
  std::uint64_t test_seed = 0;
};

/// Full-batch gradient descent from model.params.
std::vector<ToyStep> run_toy(const ToyModel& model, const ToyRunOptions& options);

/// `step,w1,w2[,w3],train_loss,test_loss`
void write_toy_csv(const std::vector<ToyStep>& trajectory, std::ostream& out);

}  // namespace grokdyn

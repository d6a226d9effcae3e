#include "grokdyn/toy.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <random>

#include "grokdyn/errors.hpp"

namespace grokdyn {

ToyKind parse_toy_kind(const std::string& name) {
  if (name == "linear2") return ToyKind::kLinear2;
  if (name == "linear3") return ToyKind::kLinear3;
  if (name == "two_layer_scalar") return ToyKind::kTwoLayerScalar;
  if (name == "leaky1") return ToyKind::kLeaky1;
  if (name == "parabola") return ToyKind::kParabola;
  throw InvalidArgument("unknown toy kind '" + name + "'");
}

std::string toy_kind_name(ToyKind kind) {
  switch (kind) {
    case ToyKind::kLinear2: return "linear2";
    case ToyKind::kLinear3: return "linear3";
    case ToyKind::kTwoLayerScalar: return "two_layer_scalar";
    case ToyKind::kLeaky1: return "leaky1";
    case ToyKind::kParabola: return "parabola";
  }
  return "linear2";
}

Index toy_dimension(ToyKind kind) { return kind == ToyKind::kLinear3 ? 3 : 2; }

ToyModel ToyModel::with_defaults(ToyKind kind, double lambda) {
  ToyModel m;
  m.kind = kind;
  m.lambda = lambda;
  switch (kind) {
    case ToyKind::kLinear2:
      m.samples = {{{1.0, 1.0}, 2.0}};
      m.params = Vector{{-1.0, 1.0}};
      break;
    case ToyKind::kLeaky1:
      // Starts with a negative pre-activation, inside the leaky branch.
      m.samples = {{{1.0, 1.0}, 2.0}};
      m.params = Vector{{-1.5, 0.5}};
      break;
    case ToyKind::kLinear3:
      m.samples = {{{1.0, 1.0, 1.0}, 3.0}};
      m.params = Vector{{-1.0, 1.0, 0.5}};
      break;
    case ToyKind::kTwoLayerScalar:
      m.samples = {{{1.0}, 1.0}};
      m.params = Vector{{2.0, 0.1}};
      break;
    case ToyKind::kParabola:
      m.params = Vector{{0.5, 1.0}};
      break;
  }
  return m;
}

void toy_residuals(const ToyModel& model, const Vector& theta, Vector& residual, Matrix& J) {
  const Index dim = toy_dimension(model.kind);
  if (theta.size() != dim) {
    throw DimensionError(toy_kind_name(model.kind) + " expects " + std::to_string(dim) +
                         " parameters");
  }
  if (model.kind == ToyKind::kParabola) {
    const double x = theta(0);
    residual = Vector{{theta(1) - x * x}};
    J.resize(1, 2);
    J << -2.0 * x, 1.0;
    return;
  }
  const Index n = static_cast<Index>(model.samples.size());
  residual.resize(n);
  J.resize(n, dim);
  for (Index i = 0; i < n; ++i) {
    const auto& s = model.samples[static_cast<std::size_t>(i)];
    const std::size_t in_dim = model.kind == ToyKind::kTwoLayerScalar ? 1 : static_cast<std::size_t>(dim);
    if (s.x.size() != in_dim) throw DimensionError("toy sample has the wrong input width");
    switch (model.kind) {
      case ToyKind::kLinear2:
      case ToyKind::kLinear3: {
        double f = 0.0;
        for (Index j = 0; j < dim; ++j) {
          f += theta(j) * s.x[static_cast<std::size_t>(j)];
          J(i, j) = s.x[static_cast<std::size_t>(j)];
        }
        residual(i) = f - s.y;
        break;
      }
      case ToyKind::kTwoLayerScalar: {
        const double x = s.x[0];
        residual(i) = theta(1) * theta(0) * x - s.y;
        J(i, 0) = theta(1) * x;
        J(i, 1) = theta(0) * x;
        break;
      }
      case ToyKind::kLeaky1: {
        const double z = theta(0) * s.x[0] + theta(1) * s.x[1];
        const double slope = z > 0.0 ? 1.0 : model.leaky_slope;
        residual(i) = slope * z - s.y;
        J(i, 0) = slope * s.x[0];
        J(i, 1) = slope * s.x[1];
        break;
      }
      case ToyKind::kParabola: break;
    }
  }
}

ToyEvaluation toy_loss_grad(const ToyModel& model, const Vector& theta) {
  Vector r;
  Matrix J;
  toy_residuals(model, theta, r, J);
  ToyEvaluation ev;
  ev.loss = r.squaredNorm();
  ev.regularized = ev.loss + model.lambda * theta.squaredNorm();
  ev.grad = 2.0 * J.transpose() * r + 2.0 * model.lambda * theta;
  return ev;
}

ZeroLossProblem make_toy_problem(const ToyModel& model) {
  ZeroLossProblem problem;
  problem.loss = [model](const Vector& theta) {
    Vector r;
    Matrix J;
    toy_residuals(model, theta, r, J);
    return r.squaredNorm();
  };
  problem.gradient = [model](const Vector& theta) {
    Vector r;
    Matrix J;
    toy_residuals(model, theta, r, J);
    return Vector(2.0 * J.transpose() * r);
  };
  problem.jacobian = [model](const Vector& theta) {
    Vector r;
    Matrix J;
    toy_residuals(model, theta, r, J);
    return J;
  };
  return problem;
}

std::vector<ToySample> toy_test_set(const ToyModel& model, std::uint64_t seed, int count) {
  std::vector<ToySample> out;
  if (model.kind == ToyKind::kParabola) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Index dim = toy_dimension(model.kind);
  double ratio = 1.0;
  if (model.kind == ToyKind::kTwoLayerScalar && !model.samples.empty() &&
      model.samples[0].x[0] != 0.0) {
    ratio = model.samples[0].y / model.samples[0].x[0];
  }
  for (int i = 0; i < count; ++i) {
    ToySample s;
    if (model.kind == ToyKind::kTwoLayerScalar) {
      s.x = {normal(rng)};
      s.y = ratio * s.x[0];
    } else {
      for (Index j = 0; j < dim; ++j) {
        s.x.push_back(normal(rng));
        s.y += s.x.back();
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

double toy_mse(const ToyModel& model, const Vector& theta, const std::vector<ToySample>& set) {
  if (model.kind == ToyKind::kParabola || set.empty()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  ToyModel probe = model;
  probe.samples = set;
  Vector r;
  Matrix J;
  toy_residuals(probe, theta, r, J);
  return r.squaredNorm() / static_cast<double>(set.size());
}

std::vector<ToyStep> run_toy(const ToyModel& model, const ToyRunOptions& options) {
  if (!(options.eta > 0.0)) throw InvalidArgument("learning rate must be > 0");
  if (options.steps < 0 || options.log_stride < 1) throw InvalidArgument("bad step settings");
  const auto test = toy_test_set(model, options.test_seed);
  std::vector<ToyStep> traj;
  Vector theta = model.params;
  for (Index t = 0;; ++t) {
    const ToyEvaluation ev = toy_loss_grad(model, theta);
    if (t % options.log_stride == 0 || t == options.steps) {
      traj.push_back({t, theta, ev.loss, toy_mse(model, theta, test)});
    }
    if (t == options.steps) break;
    if (!ev.grad.allFinite()) throw DivergenceError(t, "toy gradient not finite");
    theta -= options.eta * ev.grad;
    if (!theta.allFinite()) throw DivergenceError(t + 1, "toy parameters not finite");
  }
  return traj;
}

void write_toy_csv(const std::vector<ToyStep>& trajectory, std::ostream& out) {
  const Index dim = trajectory.empty() ? 2 : trajectory.front().theta.size();
  out << "step";
  for (Index j = 0; j < dim; ++j) out << ",w" << (j + 1);
  out << ",train_loss,test_loss\n";
  char buf[40];
  for (const auto& s : trajectory) {
    out << s.step;
    for (Index j = 0; j < dim; ++j) {
      std::snprintf(buf, sizeof buf, ",%.17g", s.theta(j));
      out << buf;
    }
    std::snprintf(buf, sizeof buf, ",%.17g", s.train_loss);
    out << buf;
    std::snprintf(buf, sizeof buf, ",%.17g\n", s.test_loss);
    out << buf;
  }
}

}  // namespace grokdyn

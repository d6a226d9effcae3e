#include "grokdyn/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>

#include "grokdyn/errors.hpp"

namespace grokdyn {

ZeroLossProblem make_net_problem(const Matrix& X, const Matrix& Y, const NetParams& shape,
                                 double data_scale) {
  const NetParams like = shape;
  ZeroLossProblem problem;
  problem.loss = [X, Y, like](const Vector& theta) {
    return loss(unflatten_like(theta, like), X, Y, 0.0).data;
  };
  problem.gradient = [X, Y, like, data_scale](const Vector& theta) {
    return grad_loss(unflatten_like(theta, like), X, Y, 0.0, data_scale).values;
  };
  problem.jacobian = [X, like](const Vector& theta) {
    return jacobian(unflatten_like(theta, like), X);
  };
  return problem;
}

Projection estimate_projection(const ZeroLossProblem& problem, const Vector& theta,
                               const ProjectionOptions& options) {
  const double start_loss = problem.loss(theta);
  if (!std::isfinite(start_loss)) throw DivergenceError(0, "projection start loss not finite");
  Vector x = theta;
  Vector v = Vector::Zero(theta.size());
  for (Index s = 0; s < options.steps; ++s) {
    const Vector g = problem.gradient(x);
    v = options.beta * v + g;
    x -= options.eta * v;
    if (!x.allFinite()) throw DivergenceError(s, "projection descent diverged");
  }
  const double end_loss = problem.loss(x);
  if (!std::isfinite(end_loss)) throw DivergenceError(options.steps, "projection loss not finite");
  return {std::move(x), end_loss};
}

NetProjection estimate_projection(const NetParams& params, const Matrix& X, const Matrix& Y,
                                  const ProjectionOptions& options, double data_scale) {
  const ZeroLossProblem problem = make_net_problem(X, Y, params, data_scale);
  Projection pr = estimate_projection(problem, flatten(params).values, options);
  return {unflatten_like(pr.theta, params), pr.loss};
}

namespace {

struct ThinSvd {
  Matrix U;
  Vector s;
  Matrix V;
  Index rank = 0;
};

ThinSvd thin_svd(const Matrix& J, double rcond) {
  if (!J.allFinite()) throw NumericalError("matrix has non-finite entries");
  Eigen::BDCSVD<Matrix> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw NumericalError("SVD did not converge");
  ThinSvd out{svd.matrixU(), svd.singularValues(), svd.matrixV(), 0};
  const double cutoff = out.s.size() > 0 ? rcond * out.s(0) : 0.0;
  while (out.rank < out.s.size() && out.s(out.rank) > cutoff) ++out.rank;
  return out;
}

}  // namespace

Matrix pseudo_inverse(const Matrix& J, double rcond) {
  const ThinSvd svd = thin_svd(J, rcond);
  const Index r = svd.rank;
  return svd.V.leftCols(r) * svd.s.head(r).cwiseInverse().asDiagonal() *
         svd.U.leftCols(r).transpose();
}

Matrix nullspace_projector(const Matrix& J, double rcond) {
  const ThinSvd svd = thin_svd(J, rcond);
  const Matrix Vr = svd.V.leftCols(svd.rank);
  return Matrix::Identity(J.cols(), J.cols()) - Vr * Vr.transpose();
}

Vector norm_min_direction_svd(const Vector& theta, const Matrix& J, double rcond) {
  if (theta.size() != J.cols()) throw DimensionError("theta length must equal Jacobian columns");
  const ThinSvd svd = thin_svd(J, rcond);
  const Matrix Vr = svd.V.leftCols(svd.rank);
  return -(theta - Vr * (Vr.transpose() * theta));
}

Vector norm_min_direction(const Vector& theta, const Matrix& J, double rcond) {
  if (theta.size() != J.cols()) throw DimensionError("theta length must equal Jacobian columns");
  if (J.rows() > 0 && J.rows() <= J.cols() && J.allFinite()) {
    Matrix gram = Matrix::Zero(J.rows(), J.rows());
    gram.selfadjointView<Eigen::Lower>().rankUpdate(J);
    Eigen::LLT<Matrix> llt(gram);
    if (llt.info() == Eigen::Success && llt.rcond() > 1e-12) {
      const Vector z = llt.solve(J * theta);
      return -(theta - J.transpose() * z);
    }
  }
  return norm_min_direction_svd(theta, J, rcond);
}

double cosine_similarity(const Vector& a, const Vector& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

Vector update_direction(std::span<const Snapshot> history, Index c) {
  if (history.empty()) throw InsufficientHistory("no snapshots recorded");
  return update_direction(history, history.back().step, c);
}

Vector update_direction(std::span<const Snapshot> history, Index n, Index c) {
  if (history.empty()) throw InsufficientHistory("no snapshots recorded");
  if (c < 1) throw InvalidArgument("update window c must be >= 1");
  const Index m = std::max<Index>(0, n - c);
  const Snapshot* now = nullptr;
  const Snapshot* then = nullptr;
  for (const auto& s : history) {
    if (s.step == n) now = &s;
    if (s.step == m) then = &s;
  }
  if (!now || !then) {
    throw InsufficientHistory("need snapshots at steps " + std::to_string(m) + " and " +
                              std::to_string(n));
  }
  return now->theta - then->theta;
}

ProbeSeries cosine_series(const ZeroLossProblem& problem, std::span<const Snapshot> trajectory,
                          const ProbeOptions& options) {
  if (options.stride < 1) throw InvalidArgument("probe stride must be >= 1");
  ProbeSeries series;
  for (const auto& snap : trajectory) {
    if (snap.step % options.stride != 0) continue;
    Vector delta;
    try {
      delta = update_direction(trajectory, snap.step, options.window);
    } catch (const InsufficientHistory& e) {
      series.warnings.push_back({snap.step, e.what()});
      continue;
    }
    Projection proj;
    try {
      proj = estimate_projection(problem, snap.theta, options.projection);
    } catch (const DivergenceError& e) {
      series.warnings.push_back({snap.step, e.what()});
      continue;
    }
    const Matrix J = problem.jacobian(proj.theta);
    const Vector gtilde = norm_min_direction(snap.theta, J, options.rcond);

    ProbeResult r;
    r.step = snap.step;
    r.cos_sim = cosine_similarity(delta, gtilde);
    r.proj_loss = proj.loss;
    r.update_norm = delta.norm();
    r.gtilde_norm = gtilde.norm();
    r.on_manifold = proj.loss < options.accept_loss;
    if (!r.on_manifold) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "projection loss %.3e above acceptance %.1e", proj.loss,
                    options.accept_loss);
      series.warnings.push_back({snap.step, buf});
    }
    series.results.push_back(r);
  }
  return series;
}

void write_probe_csv(const std::vector<ProbeResult>& results, std::ostream& out) {
  out << "step,cos_sim,proj_loss,update_norm,gtilde_norm\n";
  char buf[160];
  for (const auto& r : results) {
    std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g,%.17g,%.17g\n",
                  static_cast<long long>(r.step), r.cos_sim, r.proj_loss, r.update_norm,
                  r.gtilde_norm);
    out << buf;
  }
}

double parabola_loss(double x, double y) {
  const double r = y - x * x;
  return r * r;
}

Eigen::Vector2d parabola_gradient(double x, double y) {
  const double r = y - x * x;
  return {-4.0 * x * r, 2.0 * r};
}

ParabolaFoot parabola_projection(double x0, double y0) {
  // Stationary points of (x - x0)^2 + (x^2 - y0)^2 solve
  // x^3 + p x + q = 0 with p = (1 - 2 y0) / 2, q = -x0 / 2.
  const double p = 0.5 * (1.0 - 2.0 * y0);
  const double q = -0.5 * x0;
  std::vector<double> roots;
  const double disc = 0.25 * q * q + p * p * p / 27.0;
  if (disc > 0.0) {
    const double s = std::sqrt(disc);
    roots.push_back(std::cbrt(-0.5 * q + s) + std::cbrt(-0.5 * q - s));
  } else if (p == 0.0) {
    roots.push_back(0.0);
  } else {
    const double r = 2.0 * std::sqrt(-p / 3.0);
    const double arg = std::clamp(3.0 * q / (p * r), -1.0, 1.0);
    const double phi = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k) {
      roots.push_back(r * std::cos(phi - 2.0 * std::numbers::pi * k / 3.0));
    }
  }
  auto dist2 = [&](double x) {
    const double dx = x - x0;
    const double dy = x * x - y0;
    return dx * dx + dy * dy;
  };
  ParabolaFoot best{0.0, std::numeric_limits<double>::infinity()};
  for (double x : roots) {
    // Newton polish on the cubic.
    for (int it = 0; it < 3; ++it) {
      const double f = x * x * x + p * x + q;
      const double df = 3.0 * x * x + p;
      if (df == 0.0) break;
      const double nx = x - f / df;
      if (!std::isfinite(nx)) break;
      x = nx;
    }
    const double d2 = dist2(x);
    if (d2 < best.dist) best = {x, d2};
  }
  best.dist = std::sqrt(best.dist);
  return best;
}

std::vector<OrthoRow> orthogonality_probe(std::span<const Eigen::Vector2d> points) {
  std::vector<OrthoRow> rows;
  rows.reserve(points.size());
  for (const auto& pt : points) {
    OrthoRow row;
    row.x = pt.x();
    row.y = pt.y();
    const ParabolaFoot foot = parabola_projection(pt.x(), pt.y());
    row.dist = foot.dist;
    const Eigen::Vector2d tangent(1.0, 2.0 * foot.x);
    const Eigen::Vector2d grad = parabola_gradient(pt.x(), pt.y());
    const double denom = tangent.norm() * grad.norm();
    row.abs_cos = denom == 0.0 ? 0.0 : std::abs(tangent.dot(grad)) / denom;
    rows.push_back(row);
  }
  return rows;
}

std::vector<Eigen::Vector2d> normal_ladder(double foot_x, double side,
                                           std::span<const double> distances) {
  Eigen::Vector2d n(-2.0 * foot_x, 1.0);
  n.normalize();
  if (side < 0.0) n = -n;
  const Eigen::Vector2d foot(foot_x, foot_x * foot_x);
  std::vector<Eigen::Vector2d> pts;
  pts.reserve(distances.size());
  for (double d : distances) pts.push_back(foot + d * n);
  return pts;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw InvalidArgument("slope fit needs two or more paired samples");
  }
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw InvalidArgument("degenerate abscissae in slope fit");
  return (n * sxy - sx * sy) / denom;
}

}  // namespace grokdyn

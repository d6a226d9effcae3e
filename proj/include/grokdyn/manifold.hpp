#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "grokdyn/net.hpp"
#include "grokdyn/trainer.hpp"

namespace grokdyn {

/// A model seen only through its flat parameter vector: the unregularised
/// training loss, the gradient used to descend onto the zero-loss set, and
/// the Jacobian of the concatenated outputs.
struct ZeroLossProblem {
  std::function<double(const Vector&)> loss;
  std::function<Vector(const Vector&)> gradient;
  std::function<Matrix(const Vector&)> jacobian;
};

/// `data_scale` scales the descent objective only; `loss` always reports the sum.
ZeroLossProblem make_net_problem(const Matrix& X, const Matrix& Y, const NetParams& shape,
                                 double data_scale = 1.0);

struct ProjectionOptions {
  Index steps = 100;
  double eta = 1.0;
  double beta = 0.9;
};

struct Projection {
  Vector theta;
  double loss = 0.0;
};

/// Approximates proj_Z(theta) by momentum gradient descent on the loss
/// without weight decay.
Projection estimate_projection(const ZeroLossProblem& problem, const Vector& theta,
                               const ProjectionOptions& options = {});

struct NetProjection {
  NetParams params;
  double loss = 0.0;
};

NetProjection estimate_projection(const NetParams& params, const Matrix& X, const Matrix& Y,
                                  const ProjectionOptions& options = {},
                                  double data_scale = 1.0);

inline constexpr double kDefaultRcond = 1e-10;

/// SVD pseudoinverse; singular values below rcond * sigma_max are dropped.
Matrix pseudo_inverse(const Matrix& J, double rcond = kDefaultRcond);

/// I - J^+ J, built from the SVD. Dense d x d, intended for small problems.
Matrix nullspace_projector(const Matrix& J, double rcond = kDefaultRcond);

/// (I - J^+ J)(-theta). Uses a Cholesky factorisation of J J^T when J has
/// full row rank with cond(J J^T) <= 1e12 and falls back to the SVD otherwise.
Vector norm_min_direction(const Vector& theta, const Matrix& J, double rcond = kDefaultRcond);

/// Same quantity, always through the SVD.
Vector norm_min_direction_svd(const Vector& theta, const Matrix& J,
                              double rcond = kDefaultRcond);

/// Cosine similarity; 0 when either vector is zero.
double cosine_similarity(const Vector& a, const Vector& b);

/// theta_n - theta_{max(0, n - c)} with n the newest snapshot in `history`.
Vector update_direction(std::span<const Snapshot> history, Index c);
Vector update_direction(std::span<const Snapshot> history, Index n, Index c);

struct ProbeOptions {
  Index stride = 10;
  Index window = 10;
  ProjectionOptions projection;
  double accept_loss = 1e-6;
  double rcond = kDefaultRcond;
};

struct ProbeResult {
  Index step = 0;
  double cos_sim = 0.0;
  double proj_loss = 0.0;
  double update_norm = 0.0;
  double gtilde_norm = 0.0;
  bool on_manifold = true;  // proj_loss < accept_loss
};

struct ProbeWarning {
  Index step = 0;
  std::string message;
};

struct ProbeSeries {
  std::vector<ProbeResult> results;
  std::vector<ProbeWarning> warnings;
};

/// Probes every snapshot whose step is a multiple of `stride`. Steps whose
/// projection diverges or whose history is missing are skipped with a warning;
/// steps whose projection stays above `accept_loss` are kept and flagged.
ProbeSeries cosine_series(const ZeroLossProblem& problem, std::span<const Snapshot> trajectory,
                          const ProbeOptions& options);

/// `step,cos_sim,proj_loss,update_norm,gtilde_norm`
void write_probe_csv(const std::vector<ProbeResult>& results, std::ostream& out);

// Toy landscape L(x, y) = (y - x^2)^2 with zero set y = x^2.

double parabola_loss(double x, double y);
Eigen::Vector2d parabola_gradient(double x, double y);

struct ParabolaFoot {
  double x = 0.0;     // foot point is (x, x^2)
  double dist = 0.0;  // distance from the query point
};

/// Exact nearest point on y = x^2 (roots of the stationarity cubic).
ParabolaFoot parabola_projection(double x, double y);

struct OrthoRow {
  double x = 0.0;
  double y = 0.0;
  double dist = 0.0;
  double abs_cos = 0.0;  // |cos(tangent at foot, grad L)|; 0 on the zero set
};

std::vector<OrthoRow> orthogonality_probe(std::span<const Eigen::Vector2d> points);

/// Points foot + d * n for each d, where n is the unit normal at (foot_x,
/// foot_x^2) pointing to the side given by the sign of `side`.
std::vector<Eigen::Vector2d> normal_ladder(double foot_x, double side,
                                           std::span<const double> distances);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace grokdyn

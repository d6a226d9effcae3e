#pragma once

#include <cstdint>
#include <vector>

#include "grokdyn/data.hpp"
#include "grokdyn/errors.hpp"
#include "grokdyn/net.hpp"
#include "grokdyn/trainer.hpp"

namespace grokdyn {

/// Largest accepted condition-number estimate of H H^T.
inline constexpr double kMaxGramCondition = 1e12;

/// Cholesky factorisation of the Gram matrix H H^T, guarded by an L1
/// condition-number estimate. Throws RankDeficiencyError instead of
/// regularising.
class GramFactor {
 public:
  explicit GramFactor(const Matrix& H, double max_condition = kMaxGramCondition);

  /// (H H^T)^{-1} B
  Matrix solve(const Matrix& B) const { return llt_.solve(B); }
  Matrix inverse() const;
  double condition_estimate() const { return condition_; }
  Index size() const { return llt_.rows(); }

 private:
  Eigen::LLT<Matrix> llt_;
  double condition_ = 0.0;
};

/// argmin_W ||H W - Y||^2 + lambda ||W||^2 = (H^T H + lambda I)^{-1} H^T Y.
Matrix ridge_solve(const Matrix& H, const Matrix& Y, double lambda);

/// H^+ Y = H^T (H H^T)^{-1} Y for H with independent rows (n <= d_h).
Matrix pinv_solve(const Matrix& H, const Matrix& Y);

/// Zero-loss limit of the isolated first-layer cost:
/// lambda ||E||^2 + lambda Tr(Y^T (H H^T)^{-1} Y), H = sigma(X E).
double cost_R(const Matrix& E, const Matrix& X, const Matrix& Y, double lambda,
              Activation activation);

/// min over W2 of L_lambda(E, W2), attained at the ridge solution.
double cost_R_ridge(const Matrix& E, const Matrix& X, const Matrix& Y, double lambda,
                    Activation activation);

/// Update direction Delta E = X^T((A Y Y^T A H) .* sigma'(X E)) - E with
/// A = (H H^T)^{-1}. Equals -grad R / (2 lambda).
Matrix grad_R(const Matrix& E, const Matrix& X, const Matrix& Y, Activation activation);

/// max |a - b| / max(||a||_inf, ||b||_inf); 0 when both are zero.
double max_relative_error(const Matrix& a, const Matrix& b);

/// Central-difference gradient of a scalar function of a matrix.
template <typename F>
Matrix central_difference(const Matrix& at, double h, F&& f) {
  Matrix g(at.rows(), at.cols());
  Matrix probe = at;
  for (Index i = 0; i < at.size(); ++i) {
    const double orig = probe.data()[i];
    probe.data()[i] = orig + h;
    const double up = f(probe);
    probe.data()[i] = orig - h;
    const double down = f(probe);
    probe.data()[i] = orig;
    g.data()[i] = (up - down) / (2.0 * h);
  }
  return g;
}

/// Envelope identity check: finite-difference gradient of cost_R_ridge
/// against dL_lambda/dE at (E, ridge_solve(H, Y, lambda)). Returns the max
/// relative discrepancy.
double envelope_check(const Matrix& E, const Matrix& X, const Matrix& Y, double lambda,
                      Activation activation, double h = 1e-6);

/// Small instance for checking grad_R against finite differences of cost_R.
struct GradcheckInstance {
  Matrix E;
  Matrix X;
  Matrix Y;
  Activation activation;
};

/// ReLU (or leaky): all p(p+1)/2 pairs, E redrawn until every pre-activation clears
/// `margin`. Identity: only the p pairs (0, b), since rank(X) <= p would make H H^T singular.
GradcheckInstance make_gradcheck_instance(int p, Index d_h, Activation activation,
                                          std::uint64_t seed, double margin = 1e-5);

/// max_relative_error between central differences of cost_R and -2 lambda grad_R.
double gradcheck(const GradcheckInstance& instance, double lambda, double h = 1e-6);

struct SimulateConfig {
  Index d_h = 512;
  double eta = 1e-3;
  Index steps = 5000;
  Activation activation = Activation::relu();
  Index log_stride = 1;
  Index snapshot_stride = 0;  // 0 keeps only the first and last embedding
};

struct EmbeddingSnapshot {
  Index step = 0;
  Matrix E;
};

struct SimulateResult {
  MetricsLog log;
  std::vector<EmbeddingSnapshot> embeddings;  // always includes step 0 and the last step
  double max_interpolation_residual = 0.0;    // max ||H W2 - Y||_F / ||Y||_F over logged steps
  double max_condition = 0.0;
};

/// Thrown when H H^T degenerates mid-run; carries the partial log.
class SimulationAborted : public RankDeficiencyError {
 public:
  SimulationAborted(Index step, double condition, const std::string& what, MetricsLog partial)
      : RankDeficiencyError(condition, what + " (step " + std::to_string(step) + ")"),
        step_(step),
        partial_(std::move(partial)) {}
  Index step() const noexcept { return step_; }
  const MetricsLog& partial_log() const noexcept { return partial_; }

 private:
  Index step_;
  MetricsLog partial_;
};

/// E ~ N(0, sigma^2) entrywise with sigma = p^{-1/2}.
Matrix init_embedding(Index p, Index d_h, std::mt19937_64& rng);

SimulateResult simulate(const SimulateConfig& config, const TrainTest& data, const Matrix& E0);
SimulateResult simulate(const SimulateConfig& config, const TrainTest& data, std::uint64_t seed);

}  // namespace grokdyn

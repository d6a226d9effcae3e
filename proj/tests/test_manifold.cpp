#include <doctest.h>

#include <random>

#include "grokdyn/errors.hpp"
#include "grokdyn/data.hpp"
#include "grokdyn/manifold.hpp"
#include "grokdyn/toy.hpp"

using namespace grokdyn;

namespace {

Matrix random_matrix(Index r, Index c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(r, c);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

double rel(const Matrix& a, const Matrix& b) { return (a - b).norm() / std::max(1e-300, b.norm()); }

// Brute-force nearest point on y = x^2: grid scan then golden-section refinement.
double parabola_foot_oracle(double x0, double y0) {
  auto d2 = [&](double x) { return (x - x0) * (x - x0) + (x * x - y0) * (x * x - y0); };
  double best = 0.0;
  for (double x = -5.0; x <= 5.0; x += 1e-3)
    if (d2(x) < d2(best)) best = x;
  double a = best - 2e-3, b = best + 2e-3;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int i = 0; i < 200; ++i) {
    const double c = b - g * (b - a), d = a + g * (b - a);
    if (d2(c) < d2(d)) b = d;
    else a = c;
  }
  return 0.5 * (a + b);
}

ZeroLossProblem linear2_problem() {
  ToyModel m = ToyModel::with_defaults(ToyKind::kLinear2, 0.0);
  return make_toy_problem(m);
}

}  // namespace

TEST_SUITE("manifold") {

TEST_CASE("pseudo inverse examples") {
  CHECK(pseudo_inverse(Matrix::Identity(4, 4)).isApprox(Matrix::Identity(4, 4), 1e-14));
  Matrix J(2, 3);
  J << 1, 0, 0, 0, 1, 0;
  CHECK(pseudo_inverse(J).isApprox(J.transpose(), 1e-14));
}

TEST_CASE("Penrose identities on a wide random Jacobian") {
  const Matrix J = random_matrix(77, 300, 1);
  const Matrix P = pseudo_inverse(J);
  CHECK(rel(J * P * J, J) < 1e-8);
  CHECK(rel(P * J * P, P) < 1e-8);
  CHECK(rel((J * P).transpose(), J * P) < 1e-8);
  CHECK(rel((P * J).transpose(), P * J) < 1e-8);
}

TEST_CASE("null-space projector is an orthogonal projector") {
  const Matrix J = random_matrix(20, 50, 2);
  const Matrix N = nullspace_projector(J);
  CHECK(rel(N * N, N) < 1e-8);
  CHECK(rel(N.transpose(), N) < 1e-8);
  CHECK((J * N).norm() < 1e-10 * J.norm());
  CHECK(N.trace() == doctest::Approx(30.0).epsilon(1e-10));
}

TEST_CASE("norm-minimising direction") {
  Matrix J(1, 2);
  J << 1, 1;
  const Vector g = norm_min_direction(Vector{{0, 2}}, J);
  CHECK(g(0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(g(1) == doctest::Approx(-1.0).epsilon(1e-14));

  const Matrix full = random_matrix(4, 4, 3);
  CHECK(norm_min_direction(Vector::Ones(4), full).norm() < 1e-10);

  const Matrix W = random_matrix(30, 80, 4);
  const Vector theta = random_matrix(80, 1, 5);
  const Vector a = norm_min_direction(theta, W);
  const Vector b = norm_min_direction_svd(theta, W);
  CHECK(rel(a, b) < 1e-8);
  CHECK(a.dot(theta) == doctest::Approx(-a.squaredNorm()).epsilon(1e-8));
  CHECK((W * a).norm() / (W.norm() * a.norm()) < 1e-10);

  // rank-deficient rows fall back to the SVD path
  Matrix R(3, 5);
  R << W.topLeftCorner(2, 5), W.topLeftCorner(1, 5) + W.block(1, 0, 1, 5);
  const Vector c = norm_min_direction(theta.head(5), R);
  CHECK(rel(c, norm_min_direction_svd(theta.head(5), R)) < 1e-8);
}

TEST_CASE("cosine conventions") {
  CHECK(cosine_similarity(Vector::Zero(3), Vector::Ones(3)) == 0.0);
  CHECK(cosine_similarity(Vector::Ones(3), Vector::Ones(3)) <= 1.0);
  CHECK(cosine_similarity(Vector{{1, 0}}, Vector{{-2, 0}}) == -1.0);
}

TEST_CASE("update direction window") {
  std::vector<Snapshot> h;
  for (Index t = 0; t <= 20; ++t) h.push_back({t, Vector::Constant(2, static_cast<double>(t * t))});
  CHECK(update_direction(h, 0, 10).isZero(0.0));
  CHECK(update_direction(h, 4, 10) == h[4].theta - h[0].theta);
  CHECK(update_direction(h, 20, 10) == h[20].theta - h[10].theta);
  CHECK(update_direction(h, 10) == h[20].theta - h[10].theta);
  std::vector<Snapshot> flat(5, Snapshot{0, Vector::Ones(2)});
  for (Index t = 0; t < 5; ++t) flat[static_cast<std::size_t>(t)].step = t;
  CHECK(update_direction(flat, 4, 2).isZero(0.0));
  CHECK_THROWS_AS(update_direction(std::span<const Snapshot>(h).subspan(15), 17, 10), InsufficientHistory);
}

TEST_CASE("projection of the linear toy") {
  const ZeroLossProblem prob = linear2_problem();
  const ProjectionOptions opt{100, 0.1, 0.5};
  const Projection p = estimate_projection(prob, Vector{{0, 1}}, opt);
  CHECK(std::abs(p.theta.sum() - 2.0) < 1e-6);
  // GD on this quadratic moves along the normal: the foot of (0,1) is (0.5,1.5)
  CHECK((p.theta - Vector{{0.5, 1.5}}).norm() < 1e-6);

  const Projection s = estimate_projection(prob, Vector{{0.5, 1.5}}, opt);
  CHECK(s.loss <= 1e-12);
  CHECK((s.theta - Vector{{0.5, 1.5}}).norm() < 1e-12);
}

TEST_CASE("cosine series on toys") {
  const ZeroLossProblem prob = linear2_problem();
  ProbeOptions opt;
  opt.stride = 5;
  opt.window = 5;
  opt.projection = {100, 0.1, 0.5};

  std::vector<Snapshot> still;
  for (Index t = 0; t <= 20; ++t) still.push_back({t, Vector{{0.5, 1.5}}});
  const ProbeSeries a = cosine_series(prob, still, opt);
  CHECK(a.results.size() == 5);
  for (const auto& r : a.results) CHECK(r.cos_sim == 0.0);

  // after memorisation the linear toy slides along (1,-1) towards the minimum-norm point
  ToyModel m = ToyModel::with_defaults(ToyKind::kLinear2, 0.01);
  std::vector<Snapshot> traj;
  Vector th = m.params;
  for (Index t = 0; t <= 3000; ++t) {
    traj.push_back({t, th});
    th -= 0.01 * toy_loss_grad(m, th).grad;
  }
  opt.stride = 500;
  opt.window = 10;
  const ProbeSeries b = cosine_series(prob, traj, opt);
  REQUIRE(!b.results.empty());
  CHECK(b.results.back().cos_sim > 1.0 - 1e-3);
  for (const auto& r : b.results) CHECK(std::abs(r.cos_sim) <= 1.0 + 1e-12);
  for (const auto& r : b.results) CHECK(r.proj_loss >= 0.0);
}

TEST_CASE("n=11 checkpoint lies near a full-rank zero-loss point") {
  const TrainTest tt = materialize(split_dataset_count(build_dataset(11), 59, 0));
  std::mt19937_64 rng(7);
  NetParams params = init_fan_in_uniform(11, 128, 11, Activation::relu(), rng);
  const double scale = 1.0 / 649.0;
  FlatVector theta = flatten(params);
  for (int t = 0; t < 1500; ++t) {
    theta.values -= grad_loss(unflatten(theta, params.activation), tt.X_train, tt.Y_train, 1e-4, scale).values;
  }
  params = unflatten(theta, params.activation);
  const NetProjection proj = estimate_projection(params, tt.X_train, tt.Y_train, {1000, 1.0, 0.9}, scale);
  CHECK(proj.loss < 1e-6);

  const Matrix J = jacobian(proj.params, tt.X_train);
  Eigen::BDCSVD<Matrix> svd(J);
  CHECK(svd.rank() == 59 * 11);
  const Vector g = norm_min_direction(theta.values, J);
  CHECK((J * g).norm() / (J.norm() * g.norm()) < 1e-6);
}

TEST_CASE("parabola landscape") {
  CHECK(parabola_loss(0.0, 1.0) == 1.0);
  CHECK(parabola_gradient(0.0, 1.0) == Eigen::Vector2d(0.0, 2.0));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 50; ++i) {
    const double x = u(rng), y = u(rng) + 1.0;
    const ParabolaFoot f = parabola_projection(x, y);
    CHECK(f.x == doctest::Approx(parabola_foot_oracle(x, y)).epsilon(1e-6));
    CHECK(f.dist == doctest::Approx(std::hypot(f.x - x, f.x * f.x - y)).epsilon(1e-12));
  }
}

TEST_CASE("orthogonality probe") {
  const std::vector<Eigen::Vector2d> sym{{0.0, 0.3}, {0.0, 1e-3}};
  for (const auto& r : orthogonality_probe(sym)) CHECK(r.abs_cos == 0.0);

  const std::vector<Eigen::Vector2d> on{{0.7, 0.49}};
  const auto z = orthogonality_probe(on);
  CHECK(z[0].dist < 1e-12);
  CHECK(z[0].abs_cos == 0.0);

  const std::vector<double> ds{0.02, 0.01};
  const auto ladder = normal_ladder(0.8, 1.0, ds);
  const auto rows = orthogonality_probe(ladder);
  CHECK(rows[0].dist == doctest::Approx(0.02).epsilon(1e-8));
  const double ratio = rows[0].abs_cos / rows[1].abs_cos;
  CHECK(ratio >= 1.6);
  CHECK(ratio <= 2.4);
}

TEST_CASE("log-log slope") {
  const std::vector<double> x{1, 2, 4, 8};
  const std::vector<double> y{3, 12, 48, 192};
  CHECK(loglog_slope(x, y) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_THROWS_AS(loglog_slope(std::vector<double>{1}, std::vector<double>{1}), InvalidArgument);
}

}

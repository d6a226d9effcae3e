#include <doctest.h>

#include <random>
#include <sstream>

#include "grokdyn/errors.hpp"
#include "grokdyn/toy.hpp"

using namespace grokdyn;

namespace {

ToyRunOptions opts(Index steps = 50000, double eta = 0.01) {
  ToyRunOptions o;
  o.steps = steps;
  o.eta = eta;
  o.log_stride = 10;
  return o;
}

// First logged step whose loss is within reach of the floor set by weight decay.
std::size_t memorized_index(const std::vector<ToyStep>& traj, double abs_floor = 1e-3) {
  const double floor = std::max(abs_floor, 1.1 * traj.back().train_loss);
  for (std::size_t i = 0; i < traj.size(); ++i)
    if (traj[i].train_loss < floor) return i;
  return traj.size();
}

double post_memorization_max(const std::vector<ToyStep>& traj) {
  double m = 0.0;
  for (std::size_t i = memorized_index(traj); i < traj.size(); ++i) m = std::max(m, traj[i].train_loss);
  return m;
}

}  // namespace

TEST_SUITE("toy") {

TEST_CASE("kinds and dimensions") {
  CHECK(toy_dimension(ToyKind::kLinear2) == 2);
  CHECK(toy_dimension(ToyKind::kLinear3) == 3);
  CHECK(toy_dimension(ToyKind::kTwoLayerScalar) == 2);
  CHECK(toy_dimension(ToyKind::kLeaky1) == 2);
  CHECK(toy_dimension(ToyKind::kParabola) == 2);
  for (const char* name : {"linear2", "linear3", "two_layer_scalar", "leaky1", "parabola"})
    CHECK(toy_kind_name(parse_toy_kind(name)) == name);
  CHECK_THROWS_AS(parse_toy_kind("cubic"), InvalidArgument);
  ToyModel m = ToyModel::with_defaults(ToyKind::kLinear3, 0.0);
  CHECK_THROWS_AS(toy_loss_grad(m, Vector{{1.0, 1.0}}), DimensionError);
}

TEST_CASE("loss and gradient examples") {
  ToyModel m2 = ToyModel::with_defaults(ToyKind::kLinear2, 0.0);
  const auto e2 = toy_loss_grad(m2, Vector{{1.0, 1.0}});
  CHECK(e2.loss == 0.0);
  CHECK(e2.grad.isZero(0.0));

  ToyModel m3 = ToyModel::with_defaults(ToyKind::kLinear3, 0.0);
  CHECK(toy_loss_grad(m3, Vector::Ones(3)).loss == 0.0);

  ToyModel pb = ToyModel::with_defaults(ToyKind::kParabola, 0.0);
  const auto ep = toy_loss_grad(pb, Vector{{0.0, 1.0}});
  CHECK(ep.loss == 1.0);
  CHECK(ep.grad == Vector{{0.0, 2.0}});

  ToyModel ts = ToyModel::with_defaults(ToyKind::kTwoLayerScalar, 0.5);
  const auto et = toy_loss_grad(ts, Vector{{2.0, 3.0}});
  // (6 - 1)^2 + 0.5 * 13
  CHECK(et.loss == 25.0);
  CHECK(et.regularized == 31.5);
  CHECK(et.grad == Vector{{2.0 * 5.0 * 3.0 + 2.0, 2.0 * 5.0 * 2.0 + 3.0}});

  ToyModel lk = ToyModel::with_defaults(ToyKind::kLeaky1, 0.0);
  const auto el = toy_loss_grad(lk, Vector{{-1.5, 0.5}});
  CHECK(el.loss == doctest::Approx(2.1 * 2.1));
  CHECK(el.grad(0) == doctest::Approx(2.0 * -2.1 * 0.1));
}

TEST_CASE("finite-difference gradients") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  for (ToyKind k : {ToyKind::kLinear2, ToyKind::kLinear3, ToyKind::kTwoLayerScalar,
                    ToyKind::kLeaky1, ToyKind::kParabola}) {
    ToyModel m = ToyModel::with_defaults(k, 0.03);
    Vector th(toy_dimension(k));
    for (Index i = 0; i < th.size(); ++i) th(i) = n(rng);
    const Vector g = toy_loss_grad(m, th).grad;
    for (Index i = 0; i < th.size(); ++i) {
      Vector a = th, b = th;
      a(i) += 1e-6;
      b(i) -= 1e-6;
      const double fd = (toy_loss_grad(m, a).regularized - toy_loss_grad(m, b).regularized) / 2e-6;
      CHECK(fd == doctest::Approx(g(i)).epsilon(1e-6));
    }
  }
}

TEST_CASE("linear2 two-phase grokking") {
  ToyModel m = ToyModel::with_defaults(ToyKind::kLinear2, 0.01);
  const auto traj = run_toy(m, opts());
  const Vector target = Vector::Ones(2);
  CHECK((traj.back().theta - target).norm() < 1e-2);

  bool memorized_far = false;
  Index first_mem = -1, first_close = -1;
  for (const auto& s : traj) {
    if (s.train_loss < 1e-3 && (s.theta - target).norm() > 0.5) memorized_far = true;
    if (first_mem < 0 && s.train_loss < 1e-3) first_mem = s.step;
    if (first_close < 0 && (s.theta - target).norm() < 1e-2) first_close = s.step;
  }
  CHECK(memorized_far);
  REQUIRE(first_mem > 0);
  REQUIRE(first_close > 0);
  CHECK(10 * first_mem <= first_close);
}

TEST_CASE("linear2 endpoint is the regularised minimiser") {
  for (double lambda : {0.01, 0.1, 0.2}) {
    ToyModel m = ToyModel::with_defaults(ToyKind::kLinear2, lambda);
    const auto traj = run_toy(m, opts());
    const double w = 2.0 / (2.0 + lambda);
    CHECK((traj.back().theta - Vector::Constant(2, w)).norm() < 1e-4);
    CHECK((traj.back().theta - Vector::Ones(2)).norm() ==
          doctest::Approx(std::sqrt(2.0) * lambda / (2.0 + lambda)).epsilon(1e-4));
  }
}

TEST_CASE("smaller weight decay stays closer to the zero-loss line") {
  double prev = -1.0;
  for (double lambda : {0.01, 0.1, 0.2}) {
    ToyModel m = ToyModel::with_defaults(ToyKind::kLinear2, lambda);
    const double peak = post_memorization_max(run_toy(m, opts()));
    CHECK(peak > prev);
    prev = peak;
  }
}

TEST_CASE("zero weight decay on the zero-loss line does not move") {
  ToyModel m = ToyModel::with_defaults(ToyKind::kLinear2, 0.0);
  m.params = Vector{{0.5, 1.5}};
  const auto traj = run_toy(m, opts(2000));
  CHECK((traj.back().theta - m.params).norm() < 1e-10);
}

TEST_CASE("stability from the zero-loss line") {
  ToyModel m = ToyModel::with_defaults(ToyKind::kLinear2, 0.01);
  m.params = Vector{{-0.5, 2.5}};
  ToyRunOptions o = opts(20000, 0.01);
  o.log_stride = 1;
  double sup = 0.0;
  for (const auto& s : run_toy(m, o)) sup = std::max(sup, s.train_loss);
  CHECK(sup <= 0.01 * m.params.squaredNorm() + 1e-9);
}

TEST_CASE("linear3 random starts") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int r = 0; r < 4; ++r) {
    ToyModel m = ToyModel::with_defaults(ToyKind::kLinear3, 0.01);
    m.params = Vector{{n(rng), n(rng), n(rng)}};
    const auto traj = run_toy(m, opts());
    CHECK((traj.back().theta - Vector::Ones(3)).norm() < 1e-2);
    for (std::size_t i = memorized_index(traj, 0.0); i < traj.size(); ++i)
      CHECK(std::abs(traj[i].theta.sum() - 3.0) <= 2.0 * m.lambda);
  }
}

TEST_CASE("two-layer scalar balances its weights") {
  ToyModel m = ToyModel::with_defaults(ToyKind::kTwoLayerScalar, 0.01);
  const auto traj = run_toy(m, opts());
  const Vector w = traj.back().theta;
  CHECK(std::abs(w(0) - w(1)) < 1e-2);
  CHECK(std::abs(w(0) * w(1) - 1.0) < 2.0 * m.lambda);
}

TEST_CASE("leaky model leaves the negative branch and fits") {
  ToyModel m = ToyModel::with_defaults(ToyKind::kLeaky1, 0.01);
  const auto traj = run_toy(m, opts());
  CHECK(traj.front().theta.sum() < 0.0);
  CHECK(traj.back().train_loss < 1e-3);
  CHECK((traj.back().theta - Vector::Ones(2)).norm() < 2e-2);
}

TEST_CASE("test set and trajectory csv") {
  ToyModel m = ToyModel::with_defaults(ToyKind::kLinear2, 0.0);
  const auto test = toy_test_set(m, 3);
  CHECK(test.size() == 100);
  CHECK(toy_mse(m, Vector::Ones(2), test) < 1e-28);
  CHECK(toy_test_set(m, 3)[7].x == test[7].x);
  CHECK(std::isnan(toy_mse(ToyModel::with_defaults(ToyKind::kParabola, 0.0), Vector::Ones(2), {})));

  const auto traj = run_toy(ToyModel::with_defaults(ToyKind::kLinear3, 0.1), opts(20));
  CHECK(traj.size() == 3);
  std::ostringstream os;
  write_toy_csv(traj, os);
  CHECK(os.str().rfind("step,w1,w2,w3,train_loss,test_loss\n", 0) == 0);
}

TEST_CASE("divergence") {
  ToyModel m = ToyModel::with_defaults(ToyKind::kLinear2, 0.0);
  CHECK_THROWS_AS(run_toy(m, opts(5000, 2.0)), DivergenceError);
  CHECK_THROWS_AS(run_toy(m, opts(10, 0.0)), InvalidArgument);
}

}

#include <doctest.h>

#include <random>
#include <sstream>

#include "grokdyn/errors.hpp"
#include "grokdyn/data.hpp"
#include "grokdyn/trainer.hpp"

using namespace grokdyn;

namespace {

// y = w1 + w2 on the single sample (1,1) -> 2
GradientFn linear2_grad(double lambda) {
  return [lambda](const Vector& t) {
    const double r = t(0) + t(1) - 2.0;
    return Vector{{2 * r + 2 * lambda * t(0), 2 * r + 2 * lambda * t(1)}};
  };
}

double linear2_obj(const Vector& t, double lambda) {
  const double r = t(0) + t(1) - 2.0;
  return r * r + lambda * t.squaredNorm();
}

TrainState toy_state(double w1, double w2, Index window = 10) {
  FlatVector f;
  f.values = Vector{{w1, w2}};
  return TrainState::start(f, window);
}

TrainTest n11(std::uint64_t seed) { return materialize(split_dataset_count(build_dataset(11), 59, seed)); }

}  // namespace

TEST_SUITE("trainer") {

TEST_CASE("one toy step by hand") {
  const TrainState s = gd_step(toy_state(-1, 1), linear2_grad(0.01), 0.01, 0.0);
  CHECK(s.step == 1);
  CHECK(s.params.values(0) == doctest::Approx(-0.9598).epsilon(1e-12));
  CHECK(s.params.values(1) == doctest::Approx(1.0398).epsilon(1e-12));
}

TEST_CASE("exact fit without decay is stationary") {
  const TrainState s = gd_step(toy_state(0.5, 1.5), linear2_grad(0.0), 0.01, 0.0);
  CHECK(s.params.values == Vector{{0.5, 1.5}});
}

TEST_CASE("momentum decays the velocity") {
  TrainState s = toy_state(0.0, 0.0);
  s.velocity = Vector{{1.0, -2.0}};
  const GradientFn zero = [](const Vector& t) { return Vector::Zero(t.size()).eval(); };
  const TrainState n = gd_step(s, zero, 0.1, 0.9);
  CHECK(n.params.values(0) == doctest::Approx(-0.09).epsilon(1e-14));
  CHECK(n.params.values(1) == doctest::Approx(0.18).epsilon(1e-14));
}

TEST_CASE("history keeps c+1 snapshots in order") {
  TrainState s = toy_state(-1, 1, 3);
  for (int i = 0; i < 10; ++i) s = gd_step(std::move(s), linear2_grad(0.1), 0.01, 0.0);
  CHECK(s.history.size() == 4);
  CHECK(s.history.front().step == 7);
  CHECK(s.history.back().step == 10);
  CHECK(s.history.back().theta == s.params.values);
}

TEST_CASE("bad step settings") {
  CHECK_THROWS_AS(gd_step(toy_state(0, 0), linear2_grad(0), 0.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(gd_step(toy_state(0, 0), linear2_grad(0), 0.1, 1.0), InvalidArgument);
  const GradientFn nan = [](const Vector& t) { return Vector::Constant(t.size(), std::nan("")).eval(); };
  CHECK_THROWS_AS(gd_step(toy_state(0, 0), nan, 0.1, 0.0), DivergenceError);
}

TEST_CASE("monotone descent and stability on the toy") {
  for (double lambda : {0.01, 0.1, 0.2}) {
    TrainState s = toy_state(-1, 1);
    double prev = linear2_obj(s.params.values, lambda);
    bool monotone = true;
    for (int t = 0; t < 3000; ++t) {
      s = gd_step(std::move(s), linear2_grad(lambda), 0.05, 0.0);
      const double now = linear2_obj(s.params.values, lambda);
      monotone = monotone && now <= prev + 1e-12;
      prev = now;
    }
    CHECK(monotone);
  }
  // started on the zero-loss line: L never exceeds lambda ||theta_0||^2
  const double lambda = 0.01;
  TrainState s = toy_state(-1, 3);
  const double bound = lambda * s.params.values.squaredNorm() + 1e-9;
  double worst = 0.0;
  for (int t = 0; t < 20000; ++t) {
    s = gd_step(std::move(s), linear2_grad(lambda), 0.01, 0.0);
    const double r = s.params.values.sum() - 2.0;
    worst = std::max(worst, r * r);
  }
  CHECK(worst <= bound);
}

TEST_CASE("toy with decay converges to the regularised minimiser") {
  // argmin (w1+w2-2)^2 + l|w|^2 = 2/(2+l) (1,1); distance to (1,1) is sqrt(2) l/(2+l)
  const double lambda = 0.1;
  TrainState s = toy_state(-1, 1);
  for (int t = 0; t < 50000; ++t) s = gd_step(std::move(s), linear2_grad(lambda), 0.01, 0.0);
  const double m = 2.0 / (2.0 + lambda);
  CHECK((s.params.values - Vector{{m, m}}).norm() < 1e-2);
  CHECK((s.params.values - Vector{{1, 1}}).norm() == doctest::Approx(std::sqrt(2.0) * lambda / (2 + lambda)).epsilon(1e-3));
}

TEST_CASE("lambda zero from the zero-loss set does not move") {
  TrainState s = toy_state(0.25, 1.75);
  const Vector start = s.params.values;
  for (int t = 0; t < 1000; ++t) s = gd_step(std::move(s), linear2_grad(0.0), 1e-4, 0.0);
  CHECK((s.params.values - start).norm() < 1e-8);
}

TEST_CASE("accuracy examples") {
  const Dataset d = build_dataset(5);
  CHECK(accuracy_from_predictions(d.Y, d.Y) == 1.0);

  // brute-force argmax with first-index ties
  const Matrix neg = -d.Y;
  int hits = 0;
  for (Index i = 0; i < neg.rows(); ++i) {
    Index best = 0;
    for (Index j = 1; j < neg.cols(); ++j)
      if (neg(i, j) > neg(i, best)) best = j;
    hits += best == d.pairs[static_cast<std::size_t>(i)].c;
  }
  CHECK(accuracy_from_predictions(neg, d.Y) == static_cast<double>(hits) / 15.0);
  CHECK(hits == 0);
  CHECK(accuracy_from_predictions(Matrix(0, 5), Matrix(0, 5)) == 0.0);
}

TEST_CASE("random networks are at chance on p=37") {
  const Dataset d = build_dataset(37);
  double sum = 0.0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    std::mt19937_64 rng(s);
    sum += accuracy(init_fan_in_uniform(37, 64, 37, Activation::relu(), rng), d.X, d.Y);
  }
  const double mean = sum / 5.0;
  const double chance = 1.0 / 37.0;
  const double sigma = std::sqrt(chance * (1 - chance) / (5.0 * 703.0));
  CHECK(std::abs(mean - chance) < 3 * sigma);
}

TEST_CASE("n=11 setup memorises and stays under its starting objective") {
  const TrainTest tt = n11(0);
  std::mt19937_64 rng(1);
  const NetParams init = init_fan_in_uniform(11, 128, 11, Activation::relu(), rng);
  TrainConfig cfg;
  cfg.steps = 1500;
  cfg.gd = {1e-4, 1.0, 0.0, 1.0 / (59.0 * 11.0)};
  cfg.log_stride = 10;
  cfg.snapshot_stride = 0;
  const TrainResult r = train(cfg, tt, init);
  const RunSummary s = summarize(r.log);
  CHECK(s.final_train_acc == 1.0);

  // after the first row with train accuracy 1, the regularised objective never rises above it
  auto objective = [&](const MetricsRow& row) {
    return cfg.gd.data_scale * row.train_loss + cfg.gd.lambda * row.theta_norm * row.theta_norm;
  };
  const MetricsRow* m = nullptr;
  bool bounded = true;
  for (const auto& row : r.log.rows) {
    if (!m && row.train_acc == 1.0) m = &row;
    if (m) bounded = bounded && objective(row) <= objective(*m) + 1e-6;
  }
  REQUIRE(m != nullptr);
  CHECK(bounded);
}

TEST_CASE("logging, snapshots and determinism") {
  const TrainTest tt = n11(2);
  std::mt19937_64 rng(3);
  const NetParams init = init_fan_in_uniform(11, 16, 11, Activation::relu(), rng);
  TrainConfig cfg;
  cfg.steps = 25;
  cfg.gd = {1e-4, 1.0, 0.0, 1.0 / 649.0};
  cfg.log_stride = 10;
  cfg.snapshot_stride = 10;
  const TrainResult a = train(cfg, tt, init);
  std::vector<Index> steps;
  for (const auto& row : a.log.rows) steps.push_back(row.step);
  CHECK(steps == std::vector<Index>{0, 10, 20, 25});
  CHECK(a.snapshots.size() == 4);
  CHECK(a.snapshots.front().theta == flatten(init).values);

  std::ostringstream x, y;
  write_metrics_csv(a.log, x);
  write_metrics_csv(train(cfg, tt, init).log, y);
  CHECK(x.str() == y.str());
  CHECK(x.str().rfind("step,train_loss,test_loss,train_acc,test_acc,theta_norm\n", 0) == 0);

  std::istringstream in(x.str());
  const MetricsLog back = read_metrics_csv(in);
  REQUIRE(back.rows.size() == a.log.rows.size());
  for (std::size_t i = 0; i < back.rows.size(); ++i) {
    CHECK(back.rows[i].train_loss == a.log.rows[i].train_loss);
    CHECK(back.rows[i].theta_norm == a.log.rows[i].theta_norm);
  }
}

TEST_CASE("summary onset") {
  MetricsLog log;
  log.rows = {{0, 1, 1, 0.5, 0.1, 1}, {10, 0, 1, 1, 0.98, 1}, {20, 0, 0, 1, 0.995, 1}, {30, 0, 0, 1, 1, 1}};
  const RunSummary s = summarize(log);
  REQUIRE(s.grokking_onset.has_value());
  CHECK(*s.grokking_onset == 20);
  CHECK(s.final_step == 30);
  CHECK(s.final_test_acc == 1.0);
  log.rows.pop_back();
  log.rows.pop_back();
  CHECK(!summarize(log).grokking_onset.has_value());
}

TEST_CASE("divergence keeps the partial log") {
  const TrainTest tt = n11(0);
  std::mt19937_64 rng(0);
  const NetParams init = init_fan_in_uniform(11, 16, 11, Activation::identity(), rng);
  TrainConfig cfg;
  cfg.steps = 500;
  cfg.gd = {0.0, 50.0, 0.0, 1.0};
  cfg.log_stride = 1;
  cfg.snapshot_stride = 0;
  try {
    train(cfg, tt, init);
    FAIL("expected divergence");
  } catch (const TrainingDiverged& e) {
    CHECK(!e.partial_log().rows.empty());
    CHECK(e.code() == ErrorCode::kDivergence);
  }
}

}

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "grokdyn/errors.hpp"
#include "grokdyn/fourier.hpp"

using namespace grokdyn;

namespace {

Matrix gaussian(Index r, Index c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(r, c);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

Matrix circle(int p, int k, Index d_h, Index col_cos, Index col_sin) {
  Matrix E = Matrix::Zero(p, d_h);
  for (int j = 0; j < p; ++j) {
    const double a = 2.0 * std::numbers::pi * j * k / p;
    E(j, col_cos) = std::cos(a);
    E(j, col_sin) = std::sin(a);
  }
  return E;
}

}  // namespace

TEST_SUITE("fourier") {

TEST_CASE("constant embedding has no oscillating part") {
  Matrix E(5, 3);
  E.rowwise() = Eigen::RowVector3d(1.0, -2.0, 0.5);
  const FourierFeatures ff = dft_embedding(E);
  CHECK(ff.frequencies() == 2);
  CHECK(ff.mean.isApprox(Vector{{1.0, -2.0, 0.5}}, 1e-14));
  for (int k = 0; k < 2; ++k) {
    CHECK(ff.re[k].norm() < 1e-14);
    CHECK(ff.im[k].norm() < 1e-14);
  }
}

TEST_CASE("cosine and sine columns") {
  const FourierFeatures ff = dft_embedding(circle(7, 1, 2, 0, 1));
  CHECK(ff.re[0](0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(std::abs(ff.im[0](0)) < 1e-14);
  CHECK(std::abs(ff.re[0](1)) < 1e-14);
  CHECK(ff.im[0](1) == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(ff.re[1].norm() < 1e-14);

  const auto m = circle_metrics(ff);
  CHECK(m[0].k == 1);
  CHECK(m[0].aspect == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m[0].ortho < 1e-12);
  CHECK(m[0].power == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(m[1].aspect == 1.0);
  CHECK(m[1].ortho == 0.0);
}

TEST_CASE("frequency count and zero conventions") {
  const FourierFeatures ff = dft_embedding(Matrix::Zero(37, 4));
  CHECK(ff.frequencies() == 18);
  for (const auto& m : circle_metrics(ff)) {
    CHECK(m.aspect == 1.0);
    CHECK(m.ortho == 0.0);
    CHECK(m.power == 0.0);
  }
  CHECK_THROWS(dft_embedding(Matrix::Zero(6, 3)));
}

TEST_CASE("overlap") {
  Matrix E = circle(11, 2, 6, 0, 1) + circle(11, 5, 6, 2, 3);
  const Matrix ov = frequency_overlap(dft_embedding(E));
  CHECK(ov.rows() == 5);
  CHECK(ov(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ov(4, 4) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(ov(1, 4)) < 1e-12);
  CHECK(ov(1, 4) == ov(4, 1));

  const Matrix same = circle(11, 2, 2, 0, 1) + circle(11, 3, 2, 0, 1);
  CHECK(frequency_overlap(dft_embedding(same))(1, 2) == doctest::Approx(1.0).epsilon(1e-12));

  Matrix o = Matrix::Identity(3, 3);
  o(0, 1) = o(1, 0) = 0.5;
  CHECK(mean_off_diagonal(o) == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("power ranking") {
  const Matrix E = 3.0 * circle(11, 4, 4, 0, 1) + circle(11, 2, 4, 2, 3);
  const auto rank = rank_by_power(circle_metrics(dft_embedding(E)));
  REQUIRE(rank.size() == 5);
  CHECK(rank[0] == 4);
  CHECK(rank[1] == 2);
}

TEST_CASE("Parseval and reconstruction") {
  for (int p : {5, 11, 37}) {
    const Matrix E = gaussian(p, 13, static_cast<std::uint64_t>(p));
    const FourierFeatures ff = dft_embedding(E);
    double spectral = 0.0;
    for (int k = 0; k < ff.frequencies(); ++k) spectral += ff.re[k].squaredNorm() + ff.im[k].squaredNorm();
    const double centred = (E.rowwise() - E.colwise().mean()).squaredNorm();
    CHECK(std::abs(2.0 * p * spectral - centred) / centred < 1e-8);
    CHECK((reconstruct_embedding(ff) - E).norm() / E.norm() < 1e-10);
  }
}

TEST_CASE("shifting residues rotates each coefficient") {
  const int p = 13, s = 4;
  const Matrix E = gaussian(p, 5, 7);
  Matrix shifted(p, 5);
  for (int j = 0; j < p; ++j) shifted.row(j) = E.row((j + s) % p);
  const FourierFeatures a = dft_embedding(E);
  const FourierFeatures b = dft_embedding(shifted);
  for (int k = 1; k <= a.frequencies(); ++k) {
    const double ang = 2.0 * std::numbers::pi * k * s / p;
    // F'_k = exp(i ang) F_k
    const Vector re = std::cos(ang) * a.re[k - 1] - std::sin(ang) * a.im[k - 1];
    const Vector im = std::sin(ang) * a.re[k - 1] + std::cos(ang) * a.im[k - 1];
    CHECK((b.re[k - 1] - re).norm() < 1e-10);
    CHECK((b.im[k - 1] - im).norm() < 1e-10);
  }
}

TEST_CASE("report layout") {
  const auto j = fourier_report(dft_embedding(gaussian(37, 8, 1)));
  CHECK(j["frequencies"].size() == 18);
  CHECK(j["power_rank"].size() == 18);
  CHECK(j["p"] == 37);
}

}

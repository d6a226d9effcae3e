#include "grokdyn/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <numeric>

#include "grokdyn/errors.hpp"

namespace grokdyn {

FourierFeatures dft_embedding(const Matrix& E) {
  const Index p = E.rows();
  if (p < 3 || p % 2 == 0) {
    throw InvalidArgument("Fourier analysis needs an odd modulus >= 3, got " + std::to_string(p));
  }
  FourierFeatures ff;
  ff.p = static_cast<int>(p);
  ff.mean = E.colwise().mean().transpose();
  const int half = static_cast<int>((p - 1) / 2);
  const double inv_p = 1.0 / static_cast<double>(p);
  for (int k = 1; k <= half; ++k) {
    Vector re = Vector::Zero(E.cols());
    Vector im = Vector::Zero(E.cols());
    for (Index j = 0; j < p; ++j) {
      // Reduce j*k mod p first so the angle stays in [0, 2 pi).
      const double angle =
          2.0 * std::numbers::pi * static_cast<double>((j * k) % p) * inv_p;
      re += std::cos(angle) * E.row(j).transpose();
      im -= std::sin(angle) * E.row(j).transpose();
    }
    ff.re.push_back(re * inv_p);
    ff.im.push_back(im * inv_p);
  }
  return ff;
}

Matrix reconstruct_embedding(const FourierFeatures& ff) {
  const Index p = ff.p;
  Matrix E = ff.mean.transpose().replicate(p, 1);
  for (int k = 1; k <= ff.frequencies(); ++k) {
    for (Index j = 0; j < p; ++j) {
      const double angle =
          2.0 * std::numbers::pi * static_cast<double>((j * k) % p) / static_cast<double>(p);
      E.row(j) += 2.0 * (std::cos(angle) * ff.re[k - 1] - std::sin(angle) * ff.im[k - 1])
                            .transpose();
    }
  }
  return E;
}

namespace {

double cosine0(const Vector& a, const Vector& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

Vector stacked_abs(const FourierFeatures& ff, int idx) {
  Vector v(ff.re[idx].size() + ff.im[idx].size());
  v << ff.re[idx].cwiseAbs(), ff.im[idx].cwiseAbs();
  return v;
}

}  // namespace

std::vector<CircleMetrics> circle_metrics(const FourierFeatures& ff) {
  // Parts at rounding level relative to the largest coefficient count as zero;
  // their ratios are noise.
  double scale = 0.0;
  for (int i = 0; i < ff.frequencies(); ++i) {
    scale = std::max({scale, ff.re[i].norm(), ff.im[i].norm()});
  }
  const double tiny = 1e-12 * scale;
  std::vector<CircleMetrics> out;
  for (int i = 0; i < ff.frequencies(); ++i) {
    CircleMetrics m;
    m.k = i + 1;
    m.norm_re = ff.re[i].norm();
    m.norm_im = ff.im[i].norm();
    const bool re0 = m.norm_re <= tiny;
    const bool im0 = m.norm_im <= tiny;
    if (re0 && im0) {
      m.aspect = 1.0;
    } else if (im0) {
      m.aspect = std::numeric_limits<double>::infinity();
    } else {
      m.aspect = m.norm_re / m.norm_im;
    }
    m.ortho = (re0 || im0) ? 0.0
                           : std::abs(ff.re[i].dot(ff.im[i])) / (m.norm_re * m.norm_im);
    m.power = m.norm_re * m.norm_re + m.norm_im * m.norm_im;
    m.part_similarity = cosine0(ff.re[i].cwiseAbs(), ff.im[i].cwiseAbs());
    out.push_back(m);
  }
  return out;
}

Matrix frequency_overlap(const FourierFeatures& ff) {
  const int n = ff.frequencies();
  std::vector<Vector> v;
  for (int i = 0; i < n; ++i) v.push_back(stacked_abs(ff, i));
  Matrix out(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) out(a, b) = cosine0(v[a], v[b]);
  }
  return out;
}

Matrix frequency_overlap_part(const FourierFeatures& ff, bool real_part) {
  const auto& parts = real_part ? ff.re : ff.im;
  const int n = ff.frequencies();
  Matrix out(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) out(a, b) = cosine0(parts[a].cwiseAbs(), parts[b].cwiseAbs());
  }
  return out;
}

double mean_off_diagonal(const Matrix& overlap) {
  const Index n = overlap.rows();
  if (n < 2) return 0.0;
  return (overlap.sum() - overlap.trace()) / static_cast<double>(n * (n - 1));
}

std::vector<int> rank_by_power(const std::vector<CircleMetrics>& metrics) {
  std::vector<int> order(metrics.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return metrics[a].power > metrics[b].power; });
  for (int& k : order) k = metrics[k].k;
  return order;
}

namespace {

nlohmann::ordered_json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

nlohmann::ordered_json matrix_json(const Matrix& m) {
  auto rows = nlohmann::ordered_json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::ordered_json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(finite_or_null(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

nlohmann::ordered_json fourier_report(const FourierFeatures& ff) {
  const auto metrics = circle_metrics(ff);
  const Matrix overlap = frequency_overlap(ff);
  nlohmann::ordered_json j;
  j["p"] = ff.p;
  j["d_h"] = ff.mean.size();
  j["frequencies"] = nlohmann::ordered_json::array();
  for (const auto& m : metrics) {
    j["frequencies"].push_back({{"k", m.k},
                                {"norm_re", m.norm_re},
                                {"norm_im", m.norm_im},
                                {"aspect", finite_or_null(m.aspect)},
                                {"ortho", m.ortho},
                                {"power", m.power},
                                {"part_similarity", m.part_similarity}});
  }
  j["power_rank"] = rank_by_power(metrics);
  j["overlap"] = matrix_json(overlap);
  j["overlap_re"] = matrix_json(frequency_overlap_part(ff, true));
  j["overlap_im"] = matrix_json(frequency_overlap_part(ff, false));
  j["mean_off_diagonal_overlap"] = mean_off_diagonal(overlap);
  return j;
}

}  // namespace grokdyn

#include "grokdyn/data.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include "grokdyn/errors.hpp"

namespace grokdyn {

Dataset build_dataset(int p) {
  if (p < 3) {
    throw InvalidArgument("modulus p must be >= 3, got " + std::to_string(p));
  }
  Dataset d;
  d.p = p;
  const Index k = static_cast<Index>(p) * (p + 1) / 2;
  d.pairs.reserve(static_cast<std::size_t>(k));
  d.X = Matrix::Zero(k, p);
  d.Y = Matrix::Zero(k, p);
  Index row = 0;
  for (int a = 0; a < p; ++a) {
    for (int b = a; b < p; ++b, ++row) {
      const int c = (a + b) % p;
      d.pairs.push_back({a, b, c});
      d.X(row, a) += 1.0;
      d.X(row, b) += 1.0;
      d.Y(row, c) = 1.0;
    }
  }
  return d;
}

Index train_size_for(Index k, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InvalidArgument("train fraction must lie in (0, 1), got " +
                          std::to_string(train_fraction));
  }
  // The epsilon absorbs products like 0.7 * 10 landing on 6.9999999.
  return static_cast<Index>(std::floor(train_fraction * static_cast<double>(k) + 1e-9));
}

Dataset split_dataset(Dataset d, double train_fraction, std::uint64_t seed) {
  const Index n_train = train_size_for(d.size(), train_fraction);
  return split_dataset_count(std::move(d), n_train, seed);
}

Dataset split_dataset_count(Dataset d, Index n_train, std::uint64_t seed) {
  const Index k = d.size();
  if (n_train < 0 || n_train > k) {
    throw InvalidArgument("train count " + std::to_string(n_train) +
                          " outside [0, " + std::to_string(k) + "]");
  }
  std::vector<Index> perm(static_cast<std::size_t>(k));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);

  d.train_idx.assign(perm.begin(), perm.begin() + n_train);
  d.test_idx.assign(perm.begin() + n_train, perm.end());
  std::sort(d.train_idx.begin(), d.train_idx.end());
  std::sort(d.test_idx.begin(), d.test_idx.end());
  d.split_seed = seed;
  return d;
}

Index pair_row(int p, int a, int b) {
  if (a > b) std::swap(a, b);
  if (a < 0 || b >= p) throw InvalidArgument("residue outside [0, p)");
  return static_cast<Index>(a) * p - static_cast<Index>(a) * (a - 1) / 2 + (b - a);
}

Matrix select_rows(const Matrix& m, std::span<const Index> rows) {
  Matrix out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Index>(i)) = m.row(rows[i]);
  }
  return out;
}

TrainTest materialize(const Dataset& d) {
  return {select_rows(d.X, d.train_idx), select_rows(d.Y, d.train_idx),
          select_rows(d.X, d.test_idx), select_rows(d.Y, d.test_idx)};
}

void write_dataset_csv(const Dataset& d, std::ostream& out) {
  std::vector<char> is_train(static_cast<std::size_t>(d.size()), 0);
  for (Index i : d.train_idx) is_train[static_cast<std::size_t>(i)] = 1;
  out << "a,b,c,split\n";
  for (std::size_t i = 0; i < d.pairs.size(); ++i) {
    const auto& pr = d.pairs[i];
    out << pr.a << ',' << pr.b << ',' << pr.c << ',' << (is_train[i] ? "train" : "test")
        << '\n';
  }
}

}  // namespace grokdyn

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "grokdyn/types.hpp"

namespace grokdyn {

struct ResiduePair {
  int a = 0;
  int b = 0;
  int c = 0;  // (a + b) mod p
};

/// Modular-addition dataset: every unordered pair a <= b < p exactly once.
/// Rows of X are e_a + e_b, rows of Y are e_{(a+b) mod p}. Index lists are
/// 0-based and sorted ascending.
struct Dataset {
  int p = 0;
  std::vector<ResiduePair> pairs;
  Matrix X;
  Matrix Y;
  std::vector<Index> train_idx;
  std::vector<Index> test_idx;
  std::uint64_t split_seed = 0;

  Index size() const { return static_cast<Index>(pairs.size()); }
  bool is_split() const { return !train_idx.empty() || !test_idx.empty(); }
};

/// Row-subset views materialised as dense matrices.
struct TrainTest {
  Matrix X_train;
  Matrix Y_train;
  Matrix X_test;
  Matrix Y_test;
};

/// Name of the PRNG used for splits and initialisations; echoed into run logs.
inline constexpr const char* kRngName = "mt19937_64";

Dataset build_dataset(int p);

/// Uniform random split with |train| = floor(f_s * k).
Dataset split_dataset(Dataset d, double train_fraction, std::uint64_t seed);

/// Same permutation rule as split_dataset but with an explicit train count.
Dataset split_dataset_count(Dataset d, Index n_train, std::uint64_t seed);

Index train_size_for(Index k, double train_fraction);

/// Row of (a, b), a <= b, in the lexicographic enumeration.
Index pair_row(int p, int a, int b);

Matrix select_rows(const Matrix& m, std::span<const Index> rows);

TrainTest materialize(const Dataset& d);

/// CSV with header `a,b,c,split`.
void write_dataset_csv(const Dataset& d, std::ostream& out);

}  // namespace grokdyn

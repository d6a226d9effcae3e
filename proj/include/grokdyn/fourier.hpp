#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "grokdyn/types.hpp"

namespace grokdyn {

/// DFT of an embedding over the residue index:
/// F_k = (1/p) sum_j exp(-2 pi i j k / p) E_j for k = 1..(p-1)/2.
struct FourierFeatures {
  int p = 0;
  Vector mean;          // k = 0 term, length d_h
  std::vector<Vector> re;  // Re F_k, index k-1
  std::vector<Vector> im;  // Im F_k, index k-1

  int frequencies() const { return static_cast<int>(re.size()); }
};

FourierFeatures dft_embedding(const Matrix& E);

/// E_j = mean + 2 sum_k [Re F_k cos(2 pi j k / p) - Im F_k sin(2 pi j k / p)].
Matrix reconstruct_embedding(const FourierFeatures& ff);

struct CircleMetrics {
  int k = 0;
  double norm_re = 0.0;
  double norm_im = 0.0;
  double aspect = 1.0;  // norm_re / norm_im; 1 when both vanish
  double ortho = 0.0;   // |<Re, Im>| / (norm_re norm_im); 0 when either vanishes
  double power = 0.0;   // norm_re^2 + norm_im^2
  double part_similarity = 0.0;  // cos(|Re F_k|, |Im F_k|)
};

std::vector<CircleMetrics> circle_metrics(const FourierFeatures& ff);

/// Cosine similarity between |[Re F_k; Im F_k]| and |[Re F_l; Im F_l]|.
Matrix frequency_overlap(const FourierFeatures& ff);
/// Same, restricted to one part: cos(|Re F_k|, |Re F_l|) or with Im.
Matrix frequency_overlap_part(const FourierFeatures& ff, bool real_part);

double mean_off_diagonal(const Matrix& overlap);

/// Frequencies (1-based) sorted by decreasing power; ties keep lower k first.
std::vector<int> rank_by_power(const std::vector<CircleMetrics>& metrics);

/// Report: per-frequency metrics, power ranking and overlap matrices.
nlohmann::ordered_json fourier_report(const FourierFeatures& ff);

}  // namespace grokdyn

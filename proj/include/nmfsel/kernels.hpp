#pragma once

// Data-parallel inner loops. Every OpenMP kernel has a plain serial twin
// that the tests compare against; the parallel versions fix their reduction
// order independently of the thread count, so results are bit-stable.

#include <span>
#include <vector>

#include "nmfsel/matrix.hpp"

namespace nmfsel::kernels {

/// Raw sums over the sample dimension that determine the contracted
/// cumulant: with p_n = sum_f v_fn and q_n = p_n^2,
///   weighted = sum_n q_n v_n v_nᵀ,  gram = sum_n v_n v_nᵀ,
///   pv = sum_n p_n v_n,             q_total = sum_n q_n.
struct MomentSums {
  Matrix weighted;
  Matrix gram;
  Vector pv;
  double q_total = 0.0;
};

/// Neumaier-compensated accumulation over fixed column blocks whose size
/// depends only on N; blocks are combined by a pairwise tree.
MomentSums moment_sums(const Matrix& V);

/// Straight loops with naive summation, kept as the reference.
MomentSums moment_sums_serial(const Matrix& V);

/// out = G(:, rows) * B(rows, :) for the listed rows of B (all other rows of
/// B are treated as zero).
Matrix rowsparse_product(const Matrix& G, const Matrix& B, std::span<const std::size_t> rows);
Matrix rowsparse_product_serial(const Matrix& G, const Matrix& B,
                                std::span<const std::size_t> rows);

/// Column block size used by moment_sums for N samples.
std::size_t moment_block_size(std::size_t n);

}  // namespace nmfsel::kernels

#pragma once

#include <cstddef>
#include <vector>

#include "nmfsel/matrix.hpp"

namespace nmfsel {

enum class NormKind { one, infinity, frobenius, spectral };

/// Induced 1- and infinity-norms, Frobenius norm, or the largest singular
/// value (power iteration on mᵀm seeded with the all-ones vector, relative
/// tolerance 1e-12, at most 10000 iterations).
double norm(const Matrix& m, NormKind kind);

enum class BlockNorm { l1_l2, linf_l2 };

/// ℓ₁/ℓ₂ is the sum of row Euclidean norms, ℓ∞/ℓ₂ their maximum.
double block_norm(const Matrix& m, BlockNorm kind);

Vector row_norms(const Matrix& m);

struct SymmetricEigen {
  Vector values;   // ascending
  Matrix vectors;  // column k pairs with values[k]
};

/// Cyclic Jacobi eigendecomposition. The input is symmetrized first; throws
/// NotSquare, or NotSymmetric when the relative asymmetry exceeds 1e-10.
SymmetricEigen eigen_sym(const Matrix& m);

double min_eigenvalue_sym(const Matrix& m);

/// Smallest singular value of a (possibly rectangular) matrix, via the
/// eigenvalues of the smaller Gram product.
double min_singular_value(const Matrix& m);

/// LU with partial pivoting. Throws NotSquare, or SingularBlock when a pivot
/// falls below `pivot_tol` times the largest absolute entry.
Matrix inverse(const Matrix& m, double pivot_tol = 1e-14);

struct ThinQr {
  Matrix Q;  // m × k, orthonormal columns, k = min(m, n)
  Matrix R;  // k × n, upper triangular
};

/// Householder QR without pivoting. For rank-deficient input the columns of Q
/// still span a superset of the range.
ThinQr thin_qr(const Matrix& m);

struct PivotedQr {
  Matrix Q;                       // m × rank, orthonormal columns
  std::vector<std::size_t> perm;  // column order chosen by the pivoting
  std::size_t rank = 0;
};

/// Householder QR with column pivoting, stopped once the largest remaining
/// column norm falls to rel_tol times the first pivot. The columns of Q span
/// the range of m up to that tolerance.
PivotedQr pivoted_qr(const Matrix& m, double rel_tol);

/// Solves a·x = b for square a.
Matrix solve(const Matrix& a, const Matrix& b, double pivot_tol = 1e-14);

}  // namespace nmfsel

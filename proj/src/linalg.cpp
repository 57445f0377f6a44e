#include "nmfsel/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace nmfsel {

namespace {

double max_abs(const Matrix& m) {
  double a = 0.0;
  for (double x : m.data()) a = std::max(a, std::abs(x));
  return a;
}

// Returns the dominant eigenvalue of mᵀm starting from x.
double power_iteration(const Matrix& m, Vector x) {
  double nx = std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0));
  for (double& v : x) v /= nx;
  double lambda = 0.0;
  const Matrix mt = m.transpose();
  for (int it = 0; it < 10000; ++it) {
    Vector y = matvec(mt, matvec(m, x));
    const double ny = std::sqrt(std::inner_product(y.begin(), y.end(), y.begin(), 0.0));
    if (ny == 0.0) return 0.0;
    const double prev = lambda;
    lambda = ny;
    for (std::size_t i = 0; i < y.size(); ++i) x[i] = y[i] / ny;
    if (std::abs(lambda - prev) <= 1e-12 * lambda) break;
  }
  return lambda;
}

}  // namespace

double norm(const Matrix& m, NormKind kind) {
  switch (kind) {
    case NormKind::one: {
      double best = 0.0;
      for (std::size_t j = 0; j < m.cols(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < m.rows(); ++i) s += std::abs(m(i, j));
        best = std::max(best, s);
      }
      return best;
    }
    case NormKind::infinity: {
      double best = 0.0;
      for (std::size_t i = 0; i < m.rows(); ++i) {
        double s = 0.0;
        for (double x : m.row(i)) s += std::abs(x);
        best = std::max(best, s);
      }
      return best;
    }
    case NormKind::frobenius: {
      double s = 0.0;
      for (double x : m.data()) s += x * x;
      return std::sqrt(s);
    }
    case NormKind::spectral: {
      if (m.empty()) return 0.0;
      double col_lower = 0.0;
      for (std::size_t j = 0; j < m.cols(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < m.rows(); ++i) s += m(i, j) * m(i, j);
        col_lower = std::max(col_lower, s);
      }
      double lambda = power_iteration(m, Vector(m.cols(), 1.0));
      // The all-ones seed can be orthogonal to the dominant singular subspace;
      // the largest column norm is a hard lower bound that detects this.
      if (lambda < col_lower * (1.0 - 1e-9)) {
        Vector seed(m.cols());
        for (std::size_t j = 0; j < seed.size(); ++j)
          seed[j] = 1.0 + 0.5 * std::sin(1.0 + 2.0 * static_cast<double>(j));
        lambda = std::max(lambda, power_iteration(m, std::move(seed)));
        lambda = std::max(lambda, col_lower);
      }
      return std::sqrt(lambda);
    }
  }
  return 0.0;
}

Vector row_norms(const Matrix& m) {
  Vector out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double s = 0.0;
    for (double x : m.row(i)) s += x * x;
    out[i] = std::sqrt(s);
  }
  return out;
}

double block_norm(const Matrix& m, BlockNorm kind) {
  const Vector r = row_norms(m);
  if (kind == BlockNorm::l1_l2) return std::accumulate(r.begin(), r.end(), 0.0);
  return r.empty() ? 0.0 : *std::max_element(r.begin(), r.end());
}

SymmetricEigen eigen_sym(const Matrix& m) {
  if (m.rows() != m.cols()) throw Error(Errc::NotSquare, "eigendecomposition needs a square matrix");
  const std::size_t n = m.rows();
  const double scale = max_abs(m);
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (std::abs(m(i, j) - m(j, i)) > 1e-10 * scale)
        throw Error(Errc::NotSymmetric, "relative asymmetry above 1e-10");
      a(i, j) = 0.5 * (m(i, j) + m(j, i));
    }
  Matrix v = Matrix::identity(n);

  const double fro = norm(a, NormKind::frobenius);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(2.0 * off) <= 1e-15 * fro || off == 0.0) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });
  SymmetricEigen out{Vector(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

double min_eigenvalue_sym(const Matrix& m) {
  const auto e = eigen_sym(m);
  if (e.values.empty()) throw Error(Errc::NotSquare, "empty matrix has no eigenvalues");
  return e.values.front();
}

double min_singular_value(const Matrix& m) {
  if (m.empty()) return 0.0;
  Matrix g = m.rows() <= m.cols() ? matmul_tn(m.transpose(), m.transpose()) : matmul_tn(m, m);
  // Exact symmetry so the Jacobi precondition holds regardless of rounding.
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = i + 1; j < g.cols(); ++j) g(j, i) = g(i, j);
  return std::sqrt(std::max(0.0, min_eigenvalue_sym(g)));
}

namespace {

struct Lu {
  Matrix lu;
  std::vector<std::size_t> perm;
};

Lu lu_factor(const Matrix& m, double pivot_tol) {
  if (m.rows() != m.cols()) throw Error(Errc::NotSquare, "LU needs a square matrix");
  const std::size_t n = m.rows();
  Lu f{m, std::vector<std::size_t>(n)};
  std::iota(f.perm.begin(), f.perm.end(), 0);
  const double scale = max_abs(m);
  if (n > 0 && scale == 0.0) throw Error(Errc::SingularBlock, "zero matrix");
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(f.lu(i, k)) > std::abs(f.lu(piv, k))) piv = i;
    if (std::abs(f.lu(piv, k)) <= pivot_tol * scale)
      throw Error(Errc::SingularBlock, "pivot below tolerance at column " + std::to_string(k));
    if (piv != k) {
      std::swap_ranges(f.lu.row(k).begin(), f.lu.row(k).end(), f.lu.row(piv).begin());
      std::swap(f.perm[k], f.perm[piv]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double l = f.lu(i, k) / f.lu(k, k);
      f.lu(i, k) = l;
      for (std::size_t j = k + 1; j < n; ++j) f.lu(i, j) -= l * f.lu(k, j);
    }
  }
  return f;
}

}  // namespace

Matrix solve(const Matrix& a, const Matrix& b, double pivot_tol) {
  if (a.rows() != b.rows()) throw Error(Errc::DimensionMismatch, "solve right-hand side");
  const Lu f = lu_factor(a, pivot_tol);
  const std::size_t n = a.rows();
  Matrix x(n, b.cols());
  for (std::size_t c = 0; c < b.cols(); ++c) {
    Vector y(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = b(f.perm[i], c);
      for (std::size_t j = 0; j < i; ++j) s -= f.lu(i, j) * y[j];
      y[i] = s;
    }
    for (std::size_t ii = n; ii-- > 0;) {
      double s = y[ii];
      for (std::size_t j = ii + 1; j < n; ++j) s -= f.lu(ii, j) * x(j, c);
      x(ii, c) = s / f.lu(ii, ii);
    }
  }
  return x;
}

Matrix inverse(const Matrix& m, double pivot_tol) {
  return solve(m, Matrix::identity(m.rows()), pivot_tol);
}

ThinQr thin_qr(const Matrix& m) {
  const std::size_t rows = m.rows(), cols = m.cols(), k = std::min(rows, cols);
  Matrix a = m;
  std::vector<Vector> reflectors;
  reflectors.reserve(k);
  for (std::size_t j = 0; j < k; ++j) {
    Vector v(rows - j);
    double s = 0.0;
    for (std::size_t i = j; i < rows; ++i) {
      v[i - j] = a(i, j);
      s += v[i - j] * v[i - j];
    }
    const double alpha = v[0] >= 0.0 ? -std::sqrt(s) : std::sqrt(s);
    v[0] -= alpha;
    double vv = 0.0;
    for (double x : v) vv += x * x;
    if (vv > 0.0) {
      for (std::size_t c = j; c < cols; ++c) {
        double d = 0.0;
        for (std::size_t i = j; i < rows; ++i) d += v[i - j] * a(i, c);
        d *= 2.0 / vv;
        for (std::size_t i = j; i < rows; ++i) a(i, c) -= d * v[i - j];
      }
    } else {
      std::fill(v.begin(), v.end(), 0.0);
    }
    reflectors.push_back(std::move(v));
  }
  ThinQr out;
  out.R = Matrix(k, cols);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t c = i; c < cols; ++c) out.R(i, c) = a(i, c);
  // Q = H_0 ⋯ H_{k−1} applied to the first k unit vectors.
  out.Q = Matrix(rows, k);
  for (std::size_t i = 0; i < k; ++i) out.Q(i, i) = 1.0;
  for (std::size_t j = k; j-- > 0;) {
    const Vector& v = reflectors[j];
    double vv = 0.0;
    for (double x : v) vv += x * x;
    if (vv == 0.0) continue;
    for (std::size_t c = 0; c < k; ++c) {
      double d = 0.0;
      for (std::size_t i = j; i < rows; ++i) d += v[i - j] * out.Q(i, c);
      d *= 2.0 / vv;
      for (std::size_t i = j; i < rows; ++i) out.Q(i, c) -= d * v[i - j];
    }
  }
  return out;
}

PivotedQr pivoted_qr(const Matrix& m, double rel_tol) {
  const std::size_t rows = m.rows(), cols = m.cols(), k = std::min(rows, cols);
  Matrix a = m;
  PivotedQr out;
  out.perm.resize(cols);
  std::iota(out.perm.begin(), out.perm.end(), std::size_t{0});
  std::vector<Vector> reflectors;
  double first = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    // Remaining column norms are recomputed exactly; the sizes here are small.
    std::size_t best = j;
    double best_norm = -1.0;
    for (std::size_t c = j; c < cols; ++c) {
      double s = 0.0;
      for (std::size_t i = j; i < rows; ++i) s += a(i, c) * a(i, c);
      if (s > best_norm) {
        best_norm = s;
        best = c;
      }
    }
    best_norm = std::sqrt(best_norm);
    if (j == 0) first = best_norm;
    if (!(best_norm > rel_tol * first) || best_norm == 0.0) break;
    if (best != j) {
      for (std::size_t i = 0; i < rows; ++i) std::swap(a(i, j), a(i, best));
      std::swap(out.perm[j], out.perm[best]);
    }
    Vector v(rows - j);
    for (std::size_t i = j; i < rows; ++i) v[i - j] = a(i, j);
    const double alpha = v[0] >= 0.0 ? -best_norm : best_norm;
    v[0] -= alpha;
    double vv = 0.0;
    for (double x : v) vv += x * x;
    for (std::size_t c = j; c < cols; ++c) {
      double d = 0.0;
      for (std::size_t i = j; i < rows; ++i) d += v[i - j] * a(i, c);
      d *= 2.0 / vv;
      for (std::size_t i = j; i < rows; ++i) a(i, c) -= d * v[i - j];
    }
    reflectors.push_back(std::move(v));
  }
  out.rank = reflectors.size();
  out.Q = Matrix(rows, out.rank);
  for (std::size_t i = 0; i < out.rank; ++i) out.Q(i, i) = 1.0;
  for (std::size_t j = out.rank; j-- > 0;) {
    const Vector& v = reflectors[j];
    double vv = 0.0;
    for (double x : v) vv += x * x;
    for (std::size_t c = 0; c < out.rank; ++c) {
      double d = 0.0;
      for (std::size_t i = j; i < rows; ++i) d += v[i - j] * out.Q(i, c);
      d *= 2.0 / vv;
      for (std::size_t i = j; i < rows; ++i) out.Q(i, c) -= d * v[i - j];
    }
  }
  return out;
}

}  // namespace nmfsel

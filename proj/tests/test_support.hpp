#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "nmfsel/grouplasso.hpp"
#include "nmfsel/linalg.hpp"
#include "nmfsel/matrix.hpp"
#include "nmfsel/philox.hpp"

namespace testing_support {

using nmfsel::Matrix;

inline nmfsel::PhiloxStream rng(std::uint64_t seed, std::uint64_t index = 0) {
  return nmfsel::PhiloxStream(seed, nmfsel::stream_id(nmfsel::StreamTag::test, index));
}

inline Matrix random_matrix(std::size_t r, std::size_t c, nmfsel::PhiloxStream& g,
                            double lo = -1.0, double hi = 1.0) {
  Matrix m(r, c);
  for (auto& v : m.data()) v = lo + (hi - lo) * g.uniform();
  return m;
}

inline Matrix random_gaussian(std::size_t r, std::size_t c, nmfsel::PhiloxStream& g) {
  Matrix m(r, c);
  for (auto& v : m.data()) v = g.normal();
  return m;
}

inline std::size_t uniform_int(nmfsel::PhiloxStream& g, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(g.uniform() * static_cast<double>(hi - lo + 1));
}

inline Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  return e;
}

inline Matrix from_eigen(const Eigen::MatrixXd& e) {
  Matrix m(e.rows(), e.cols());
  for (Eigen::Index i = 0; i < e.rows(); ++i)
    for (Eigen::Index j = 0; j < e.cols(); ++j) m(i, j) = e(i, j);
  return m;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.data().size(); ++k)
    d = std::max(d, std::abs(a.data()[k] - b.data()[k]));
  return d;
}

/// Exact block coordinate descent for the group lasso: each row update is the
/// closed-form minimizer with the other rows fixed. Slow, simple, independent
/// of the accelerated solver.
inline Matrix bcd_group_lasso(const Matrix& Y, const Matrix& A, double lambda,
                              std::size_t sweeps = 200000, double tol = 1e-15) {
  const std::size_t p = A.cols(), n = Y.cols();
  Eigen::MatrixXd a = to_eigen(A), y = to_eigen(Y);
  Eigen::MatrixXd G = a.transpose() * a;
  Eigen::MatrixXd C = a.transpose() * y;
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(p, n);
  Eigen::MatrixXd GB = Eigen::MatrixXd::Zero(p, n);  // G * B
  for (std::size_t s = 0; s < sweeps; ++s) {
    double change = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
      if (G(i, i) <= 0.0) continue;
      Eigen::RowVectorXd r = C.row(i) - GB.row(i) + G(i, i) * B.row(i);
      const double rn = r.norm();
      Eigen::RowVectorXd next = Eigen::RowVectorXd::Zero(n);
      if (rn > lambda) next = (1.0 - lambda / rn) * r / G(i, i);
      const Eigen::RowVectorXd delta = next - B.row(i);
      if (delta.squaredNorm() > 0.0) {
        GB += G.col(i) * delta;
        B.row(i) = next;
      }
      change = std::max(change, delta.norm());
      scale = std::max(scale, next.norm());
    }
    if (change <= tol * std::max(1.0, scale)) break;
  }
  return from_eigen(B);
}

struct RecoveryInstance {
  nmfsel::GroupLassoProblem problem;
  Matrix B_star;
  nmfsel::IndexSet support;
  double gamma = 0.0;
};

/// Random row-sparse regression Y = A·B* + L with a tall Gaussian design, a
/// small noise matrix and λ set to twice the smallest value the off-support
/// noise condition allows. The recovery hypotheses may or may not hold.
inline RecoveryInstance make_recovery_instance(std::uint64_t seed) {
  auto g = rng(seed, 77);
  const std::size_t m = uniform_int(g, 14, 20), p = uniform_int(g, 6, 10);
  const std::size_t n = uniform_int(g, 1, 4), s = uniform_int(g, 1, 3);
  Matrix A = random_gaussian(m, p, g) * (1.0 / std::sqrt(static_cast<double>(m)));
  std::vector<std::size_t> rows;
  while (rows.size() < s) {
    const std::size_t r = uniform_int(g, 0, p - 1);
    if (std::find(rows.begin(), rows.end(), r) == rows.end()) rows.push_back(r);
  }
  RecoveryInstance inst;
  inst.support = nmfsel::IndexSet::from_unsorted(rows);
  inst.B_star = Matrix(p, n);
  for (std::size_t i : inst.support) {
    std::vector<double> row(n);
    double nrm = 0.0;
    for (auto& v : row) {
      v = g.normal();
      nrm += v * v;
    }
    const double target = 1.0 + g.uniform();
    for (std::size_t j = 0; j < n; ++j) inst.B_star(i, j) = row[j] * target / std::sqrt(nrm);
  }
  const Matrix L = random_gaussian(m, n, g) * 1e-3;
  inst.problem.A = A;
  inst.problem.Y = A * inst.B_star + L;

  const Matrix A_s = nmfsel::select_cols(A, inst.support);
  const nmfsel::IndexSet off = inst.support.complement(p);
  const Matrix A_sc = nmfsel::select_cols(A, off);
  const Matrix gram_inv = nmfsel::inverse(nmfsel::matmul_tn(A_s, A_s));
  const double irrep =
      nmfsel::norm(nmfsel::matmul_tn(A_sc, A_s) * gram_inv, nmfsel::NormKind::infinity);
  inst.gamma = std::clamp(0.9 * (1.0 - irrep), 1e-3, 1.0);
  const double noise = nmfsel::block_norm(L, nmfsel::BlockNorm::linf_l2);
  inst.problem.lambda =
      std::max(4.0 * nmfsel::norm(A_sc, nmfsel::NormKind::one) * noise / inst.gamma, 1e-3);
  return inst;
}

}  // namespace testing_support

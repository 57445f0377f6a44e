#include "nmfsel/grouplasso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nmfsel/kernels.hpp"
#include "nmfsel/linalg.hpp"

namespace nmfsel {

void GroupLassoProblem::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw Error(Errc::InvalidConfig, "lambda must be a positive finite number");
  if (A.rows() != Y.rows())
    throw Error(Errc::DimensionMismatch, "A and Y must have the same number of rows");
  if (A.empty() || Y.empty()) throw Error(Errc::DimensionMismatch, "empty problem data");
}

void SolverSettings::validate() const {
  if (max_iters < 1) throw Error(Errc::InvalidConfig, "max_iters must be at least 1");
  if (!(rel_obj_tol > 0.0) || !(kkt_tol > 0.0))
    throw Error(Errc::InvalidConfig, "tolerances must be positive");
}

Matrix prox_row_group(const Matrix& B, double threshold) {
  Matrix out = B;
  for (std::size_t i = 0; i < B.rows(); ++i) {
    auto r = out.row(i);
    double s = 0.0;
    for (double x : r) s += x * x;
    const double nrm = std::sqrt(s);
    if (nrm <= threshold) {
      std::fill(r.begin(), r.end(), 0.0);
    } else if (threshold > 0.0) {
      const double scale = 1.0 - threshold / nrm;
      for (double& x : r) x *= scale;
    }
  }
  return out;
}

IndexSet row_support(const Matrix& B, double eps) {
  std::vector<std::size_t> rows;
  const Vector norms = row_norms(B);
  for (std::size_t i = 0; i < norms.size(); ++i)
    if (norms[i] > eps) rows.push_back(i);
  return IndexSet(std::move(rows));
}

double group_lasso_objective(const GroupLassoProblem& problem, const Matrix& B) {
  const Matrix r = problem.Y - problem.A * B;
  const double fit = norm(r, NormKind::frobenius);
  return 0.5 * fit * fit + problem.lambda * block_norm(B, BlockNorm::l1_l2);
}

Matrix group_lasso_gradient(const GroupLassoProblem& problem, const Matrix& B) {
  return matmul_tn(problem.A, problem.A * B - problem.Y);
}

double certificate_tolerance(const GroupLassoProblem& problem, double kkt_tol) {
  const double scale = block_norm(matmul_tn(problem.A, problem.Y), BlockNorm::linf_l2);
  return kkt_tol * std::max(1.0, problem.lambda) +
         64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, scale);
}

namespace {

std::vector<std::size_t> nonzero_rows(const Matrix& B) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < B.rows(); ++i) {
    const auto r = B.row(i);
    if (std::any_of(r.begin(), r.end(), [](double x) { return x != 0.0; })) rows.push_back(i);
  }
  return rows;
}

// Residual Y − A·B exploiting the zero rows of B.
Matrix sparse_residual(const GroupLassoProblem& p, const Matrix& B,
                       const std::vector<std::size_t>& rows) {
  return p.Y - kernels::rowsparse_product(p.A, B, rows);
}

struct KktParts {
  double stationarity = 0.0;
  double offsupport = 0.0;
};

KktParts kkt_parts(const Matrix& grad, const Matrix& B, const IndexSet& support, double lambda) {
  KktParts k;
  const Vector bn = row_norms(B);
  for (std::size_t i = 0; i < B.rows(); ++i) {
    double s = 0.0;
    if (support.contains(i)) {
      for (std::size_t j = 0; j < B.cols(); ++j) {
        const double z = bn[i] > 0.0 ? B(i, j) / bn[i] : 0.0;
        const double v = lambda * z + grad(i, j);
        s += v * v;
      }
      k.stationarity = std::max(k.stationarity, std::sqrt(s));
    } else {
      for (std::size_t j = 0; j < B.cols(); ++j) s += grad(i, j) * grad(i, j);
      k.offsupport = std::max(k.offsupport, std::sqrt(s));
    }
  }
  return k;
}

}  // namespace

KktReport kkt_check(const GroupLassoProblem& problem, const Matrix& B_hat, const IndexSet& support,
                    double row_tol) {
  problem.validate();
  if (B_hat.rows() != problem.A.cols() || B_hat.cols() != problem.Y.cols())
    throw Error(Errc::DimensionMismatch, "B_hat is not p x n");
  support.check_bounds(B_hat.rows());
  const Vector bn = row_norms(B_hat);
  for (std::size_t i = 0; i < bn.size(); ++i)
    if (!support.contains(i) && bn[i] > row_tol)
      throw Error(Errc::EmptySupportWithNonzeroRows,
                  "row " + std::to_string(i) + " is outside the support but has norm " +
                      std::to_string(bn[i]));
  const KktParts parts =
      kkt_parts(group_lasso_gradient(problem, B_hat), B_hat, support, problem.lambda);
  KktReport r;
  r.stationarity = parts.stationarity;
  r.offsupport_dual = parts.offsupport;
  r.residual = std::max({parts.stationarity, parts.offsupport - problem.lambda, 0.0});
  r.strict_dual_feasible = parts.offsupport < problem.lambda;
  return r;
}

namespace {

// Equivalent smaller problem. Identical design columns contribute identically
// to the fit, so only the first of each class keeps a row (the sparsest of the
// tied minimizers). The fit is then written in an orthonormal basis of the
// range of A and of the row space of the projected Y; both changes are exact
// up to the constant `offset`.
struct Reduced {
  GroupLassoProblem problem;
  std::vector<std::size_t> representative;  // reduced row -> original row
  std::vector<std::size_t> class_of;        // original row -> reduced row
  Matrix row_basis;                         // n × n', empty when n' = n
  double offset = 0.0;
};

Reduced reduce(const GroupLassoProblem& problem) {
  const Matrix& A = problem.A;
  const std::size_t m = A.rows(), p = A.cols();
  Reduced r;
  r.class_of.resize(p);
  for (std::size_t j = 0; j < p; ++j) {
    std::size_t c = 0;
    for (; c < r.representative.size(); ++c) {
      const std::size_t k = r.representative[c];
      std::size_t i = 0;
      while (i < m && A(i, j) == A(i, k)) ++i;
      if (i == m) break;
    }
    if (c == r.representative.size()) r.representative.push_back(j);
    r.class_of[j] = c;
  }
  Matrix a = select_cols(A, IndexSet(r.representative));
  Matrix y = problem.Y;
  // Directions of the range below the rounding floor of the certificate are
  // dropped; the final certificate is still taken on the original problem.
  const PivotedQr qr = pivoted_qr(a, 64.0 * std::numeric_limits<double>::epsilon());
  if (qr.rank < m) {
    Matrix projected = matmul_tn(qr.Q, y);
    const double rest = norm(y - qr.Q * projected, NormKind::frobenius);
    r.offset = 0.5 * rest * rest;
    a = matmul_tn(qr.Q, a);
    y = std::move(projected);
  }
  if (y.rows() < y.cols()) {
    ThinQr qr = thin_qr(y.transpose());
    r.row_basis = std::move(qr.Q);
    y = qr.R.transpose();
  }
  r.problem.A = std::move(a);
  r.problem.Y = std::move(y);
  r.problem.lambda = problem.lambda;
  return r;
}

Matrix compress(const Reduced& r, const Matrix& B) {
  Matrix merged(r.representative.size(), B.cols());
  for (std::size_t i = 0; i < B.rows(); ++i) {
    auto dst = merged.row(r.class_of[i]);
    const auto src = B.row(i);
    for (std::size_t j = 0; j < src.size(); ++j) dst[j] += src[j];
  }
  return r.row_basis.empty() ? merged : merged * r.row_basis;
}

Matrix expand(const Reduced& r, const Matrix& B, std::size_t p, std::size_t n) {
  const Matrix full = r.row_basis.empty() ? B : B * r.row_basis.transpose();
  Matrix out(p, n);
  for (std::size_t c = 0; c < r.representative.size(); ++c) {
    const auto src = full.row(c);
    std::copy(src.begin(), src.end(), out.row(r.representative[c]).begin());
  }
  return out;
}

// Damped Newton iterations on the smooth restriction of the objective to the
// rows in `rows`, all of which must be nonzero. First-order steps stall on
// badly conditioned designs; on a fixed support the restriction is smooth and
// small enough for a dense Hessian.
bool newton_on_support(const GroupLassoProblem& pr, const Matrix& G, const Matrix& C, Matrix& b,
                       const std::vector<std::size_t>& rows, double& fb, std::size_t steps) {
  const std::size_t s = rows.size(), n = b.cols(), dim = s * n;
  const double lambda = pr.lambda;
  bool improved = false;
  for (std::size_t step = 0; step < steps; ++step) {
    const Vector bn = row_norms(b);
    Matrix H(dim, dim);
    Matrix g(dim, 1);
    for (std::size_t a = 0; a < s; ++a) {
      const std::size_t i = rows[a];
      if (!(bn[i] > 0.0)) return improved;
      for (std::size_t j = 0; j < n; ++j) {
        double gij = -C(i, j) + lambda * b(i, j) / bn[i];
        for (std::size_t c = 0; c < s; ++c) gij += G(i, rows[c]) * b(rows[c], j);
        g(a * n + j, 0) = gij;
        for (std::size_t c = 0; c < s; ++c) H(a * n + j, c * n + j) += G(i, rows[c]);
        for (std::size_t l = 0; l < n; ++l)
          H(a * n + j, a * n + l) +=
              lambda / bn[i] * ((j == l ? 1.0 : 0.0) - b(i, j) * b(i, l) / (bn[i] * bn[i]));
      }
    }
    double gmax = 0.0, diag = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      gmax = std::max(gmax, std::abs(g(k, 0)));
      diag = std::max(diag, H(k, k));
    }
    if (gmax == 0.0) return improved;
    Matrix d;
    for (double ridge = 0.0; ridge <= 1e-6 * diag; ridge = ridge == 0.0 ? 1e-14 * diag : ridge * 100) {
      Matrix Hr = H;
      for (std::size_t k = 0; k < dim; ++k) Hr(k, k) += ridge;
      try {
        d = nmfsel::solve(Hr, g, 1e-15);
        break;
      } catch (const Error&) {
      }
    }
    if (d.empty()) return improved;
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls, alpha *= 0.5) {
      Matrix trial = b;
      for (std::size_t a = 0; a < s; ++a)
        for (std::size_t j = 0; j < n; ++j) trial(rows[a], j) -= alpha * d(a * n + j, 0);
      const double ft = 0.5 * std::pow(norm(sparse_residual(pr, trial, rows), NormKind::frobenius), 2) +
                        lambda * block_norm(trial, BlockNorm::l1_l2);
      if (ft < fb) {
        b = std::move(trial);
        fb = ft;
        accepted = true;
        break;
      }
    }
    if (!accepted) return improved;
    improved = true;
  }
  return improved;
}

// Log-barrier path following on the cone form
//   min ½‖AB − Y‖² + λ Σ t_i  subject to  ‖b_i‖ ≤ t_i,
// with dense Newton steps. Only used when the reduced problem is small.
std::optional<Matrix> barrier_solve(const Matrix& G, const Matrix& C, double lambda,
                                    double f_scale) {
  const std::size_t p = C.rows(), n = C.cols(), w = n + 1, dim = p * w;
  Matrix b(p, n);
  Vector t(p, 1.0);
  const auto value = [&](const Matrix& bb, const Vector& tt, double tau, bool& feasible) {
    // ½ tr(BᵀGB) − tr(BᵀC) + λ Σ t, up to the constant ½‖Y‖².
    double f = 0.0, barrier = 0.0;
    feasible = true;
    for (std::size_t i = 0; i < p; ++i) {
      double bn2 = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        bn2 += bb(i, j) * bb(i, j);
        double gb = 0.0;
        for (std::size_t k = 0; k < p; ++k) gb += G(i, k) * bb(k, j);
        f += bb(i, j) * (0.5 * gb - C(i, j));
      }
      const double slack = tt[i] * tt[i] - bn2;
      if (!(tt[i] > 0.0) || !(slack > 0.0)) {
        feasible = false;
        return 0.0;
      }
      f += lambda * tt[i];
      barrier -= std::log(slack);
    }
    return tau * f + barrier;
  };
  // At B = 0, t = 1 this weight makes the t-gradient vanish.
  double tau = 2.0 / lambda;
  const double gap_target = 1e-14 * f_scale;
  Matrix H(dim, dim), g(dim, 1);
  while (true) {
    for (std::size_t step = 0; step < 100; ++step) {
      std::fill(H.data().begin(), H.data().end(), 0.0);
      std::fill(g.data().begin(), g.data().end(), 0.0);
      for (std::size_t i = 0; i < p; ++i) {
        double bn2 = 0.0;
        for (std::size_t j = 0; j < n; ++j) bn2 += b(i, j) * b(i, j);
        const double sl = t[i] * t[i] - bn2, s2 = sl * sl;
        const std::size_t ti = i * w + n;
        for (std::size_t j = 0; j < n; ++j) {
          double gb = 0.0;
          for (std::size_t k = 0; k < p; ++k) {
            gb += G(i, k) * b(k, j);
            H(i * w + j, k * w + j) += tau * G(i, k);
          }
          g(i * w + j, 0) = tau * (gb - C(i, j)) + 2.0 * b(i, j) / sl;
          for (std::size_t l = 0; l < n; ++l)
            H(i * w + j, i * w + l) += (j == l ? 2.0 / sl : 0.0) + 4.0 * b(i, j) * b(i, l) / s2;
          H(i * w + j, ti) -= 4.0 * t[i] * b(i, j) / s2;
          H(ti, i * w + j) -= 4.0 * t[i] * b(i, j) / s2;
        }
        g(ti, 0) = tau * lambda - 2.0 * t[i] / sl;
        H(ti, ti) += -2.0 / sl + 4.0 * t[i] * t[i] / s2;
      }
      Matrix d;
      try {
        d = nmfsel::solve(H, g, 0.0);
      } catch (const Error&) {
        return std::nullopt;
      }
      double decrement = 0.0;
      for (std::size_t k = 0; k < dim; ++k) decrement += g(k, 0) * d(k, 0);
      if (!(decrement >= 0.0)) return std::nullopt;
      if (decrement <= 1e-12) break;
      bool feasible = false;
      const double current = value(b, t, tau, feasible);
      double alpha = 1.0;
      bool accepted = false;
      for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
        Matrix bt = b;
        Vector tt = t;
        for (std::size_t i = 0; i < p; ++i) {
          for (std::size_t j = 0; j < n; ++j) bt(i, j) -= alpha * d(i * w + j, 0);
          tt[i] -= alpha * d(i * w + n, 0);
        }
        const double next = value(bt, tt, tau, feasible);
        if (feasible && next <= current - 0.25 * alpha * decrement) {
          b = std::move(bt);
          t = std::move(tt);
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
    }
    // Each cone contributes 2 to the barrier parameter.
    if (2.0 * static_cast<double>(p) / tau <= gap_target) break;
    tau *= 10.0;
  }
  return b;
}

// Newton on the current support, and optionally on the barrier solution
// with its vanishing rows removed; the barrier needs a small reduced problem.
// Keeps the lowest objective.
// Returns nullopt when nothing improved.
std::optional<Matrix> active_set_polish(const GroupLassoProblem& pr, const Matrix& G,
                                        const Matrix& C, const Matrix& x, double f_start,
                                        bool use_barrier) {
  const std::size_t p = x.rows(), n = x.cols();
  const auto value = [&](const Matrix& B) {
    const auto rows = nonzero_rows(B);
    const double fit = norm(sparse_residual(pr, B, rows), NormKind::frobenius);
    return 0.5 * fit * fit + pr.lambda * block_norm(B, BlockNorm::l1_l2);
  };
  Matrix best = x;
  double fbest = f_start;
  bool improved = false;
  const auto refine = [&](Matrix b) {
    const auto rows = nonzero_rows(b);
    double fb = value(b);
    if (!rows.empty() && rows.size() * n <= 512) newton_on_support(pr, G, C, b, rows, fb, 50);
    if (fb < fbest) {
      best = std::move(b);
      fbest = fb;
      improved = true;
    }
  };
  if (use_barrier && p * (n + 1) <= 300) {
    if (auto b = barrier_solve(G, C, pr.lambda, f_start)) {
      const Vector bn = row_norms(*b);
      const double top = *std::max_element(bn.begin(), bn.end());
      for (double cut : {1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-10, 1e-12}) {
        Matrix trial = *b;
        for (std::size_t i = 0; i < p; ++i)
          if (!(bn[i] > cut * top)) std::fill(trial.row(i).begin(), trial.row(i).end(), 0.0);
        refine(std::move(trial));
      }
    }
  }
  refine(x);
  return improved ? std::optional<Matrix>(best) : std::nullopt;
}

}  // namespace

GroupLassoSolution solve(const GroupLassoProblem& problem, const SolverSettings& settings,
                         const std::optional<Matrix>& warm_start) {
  problem.validate();
  settings.validate();
  const std::size_t p = problem.A.cols(), n = problem.Y.cols();
  const double lambda = problem.lambda;
  if (warm_start && (warm_start->rows() != p || warm_start->cols() != n))
    throw Error(Errc::DimensionMismatch, "warm start is not p x n");

  const Reduced red = reduce(problem);
  const GroupLassoProblem& rp = red.problem;
  Matrix x = warm_start ? compress(red, *warm_start) : Matrix(rp.A.cols(), rp.Y.cols());

  const Matrix G = matmul_tn(rp.A, rp.A);
  const Matrix C = matmul_tn(rp.A, rp.Y);
  double L = norm(rp.A, NormKind::spectral);
  L *= L;
  if (!(L > 0.0)) L = 1.0;
  if (settings.step_rule == StepRule::backtracking) L *= 0.125;

  const double threshold = certificate_tolerance(problem, settings.kkt_tol);

  const auto smooth = [&](const Matrix& B, const std::vector<std::size_t>& rows) {
    const double fit = norm(sparse_residual(rp, B, rows), NormKind::frobenius);
    return 0.5 * fit * fit;
  };
  const auto objective = [&](const Matrix& B, const std::vector<std::size_t>& rows) {
    return smooth(B, rows) + lambda * block_norm(B, BlockNorm::l1_l2);
  };
  // Gradient through the exact residual, used for certification.
  const auto certify = [lambda](const GroupLassoProblem& pr, const Matrix& B,
                                const std::vector<std::size_t>& rows) {
    const Matrix grad = matmul_tn(pr.A, sparse_residual(pr, B, rows) * -1.0);
    const KktParts k = kkt_parts(grad, B, IndexSet(rows), lambda);
    return std::max({k.stationarity, k.offsupport - lambda, 0.0});
  };

  GroupLassoSolution sol;
  auto x_rows = nonzero_rows(x);
  double fx = objective(x, x_rows);
  sol.objective_trace.push_back(fx + red.offset);

  Matrix x_prev = x;
  double t = 1.0;
  bool momentum_free = true;
  std::size_t plateau = 0;
  std::size_t last_check = 0;
  std::size_t check_every = 10;
  std::size_t next_polish = 0, polish_gap = 500;

  std::size_t it = 0;
  for (it = 1; it <= settings.max_iters; ++it) {
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    Matrix y = x;
    if (!momentum_free) {
      const double beta = (t - 1.0) / t_next;
      if (beta != 0.0)
        for (std::size_t k = 0; k < y.data().size(); ++k)
          y.data()[k] += beta * (x.data()[k] - x_prev.data()[k]);
    }
    const auto y_rows = nonzero_rows(y);
    Matrix grad = kernels::rowsparse_product(G, y, y_rows);
    grad -= C;

    Matrix z;
    std::vector<std::size_t> z_rows;
    const double fy = settings.step_rule == StepRule::backtracking ? smooth(y, y_rows) : 0.0;
    while (true) {
      Matrix step = y;
      for (std::size_t k = 0; k < step.data().size(); ++k) step.data()[k] -= grad.data()[k] / L;
      z = prox_row_group(step, lambda / L);
      z_rows = nonzero_rows(z);
      if (settings.step_rule != StepRule::backtracking) break;
      double lin = 0.0, quad = 0.0;
      for (std::size_t k = 0; k < z.data().size(); ++k) {
        const double d = z.data()[k] - y.data()[k];
        lin += grad.data()[k] * d;
        quad += d * d;
      }
      if (smooth(z, z_rows) <= fy + lin + 0.5 * L * quad + 1e-14 * std::abs(fy)) break;
      L *= 2.0;
    }

    const double fz = objective(z, z_rows);
    const double f_old = fx;
    if (fz <= fx) {
      x_prev = std::move(x);
      x = std::move(z);
      x_rows = std::move(z_rows);
      fx = fz;
      t = t_next;
      momentum_free = false;
    } else {
      // A plain proximal step that raises the objective beyond rounding means
      // the step size is too long.
      if (momentum_free && fz > fx + 1e-12 * std::abs(fx)) L *= 2.0;
      x_prev = x;
      t = 1.0;
      momentum_free = true;
    }
    sol.objective_trace.push_back(fx + red.offset);

    const double rel = std::abs(f_old - fx) / std::max(std::abs(fx), 1e-300);
    plateau = rel < settings.rel_obj_tol ? plateau + 1 : 0;
    // Slow tails never reach the plateau test; look at them periodically too.
    const bool stalled_check = it % 500 == 0;
    if ((plateau >= 10 && (last_check == 0 || it - last_check >= check_every)) || stalled_check) {
      last_check = it;
      double reduced_residual = certify(rp, x, x_rows);
      if (reduced_residual > threshold && it >= next_polish) {
        next_polish = it + polish_gap;
        polish_gap *= 2;
        // Newton on the current support is cheap and usually enough; the
        // barrier only runs when it is not.
        for (bool barrier : {false, true}) {
          if (reduced_residual <= threshold) break;
          auto polished = active_set_polish(rp, G, C, x, fx, barrier);
          if (!polished) continue;
          x_prev = x;
          x = std::move(*polished);
          x_rows = nonzero_rows(x);
          fx = objective(x, x_rows);
          t = 1.0;
          momentum_free = true;
          sol.objective_trace.back() = std::min(sol.objective_trace.back(), fx + red.offset);
          reduced_residual = certify(rp, x, x_rows);
        }
      }
      if (reduced_residual <= threshold) {
        const Matrix full = expand(red, x, p, n);
        if (certify(problem, full, nonzero_rows(full)) <= threshold) {
          sol.converged = true;
          break;
        }
        // Rounding in the reduction can hide a small violation; look less often.
        check_every *= 2;
      }
    }
  }

  sol.B_hat = expand(red, x, p, n);
  sol.kkt_residual = certify(problem, sol.B_hat, nonzero_rows(sol.B_hat));
  sol.iterations = std::min(it, settings.max_iters);
  sol.kkt_threshold = threshold;
  sol.lipschitz = L;
  return sol;
}

RecoveryReport recovery_conditions(const GroupLassoProblem& problem, const Matrix& B_star,
                                   const IndexSet& support, double gamma) {
  problem.validate();
  if (!(gamma > 0.0 && gamma <= 1.0)) throw Error(Errc::InvalidConfig, "gamma must lie in (0, 1]");
  if (B_star.rows() != problem.A.cols() || B_star.cols() != problem.Y.cols())
    throw Error(Errc::DimensionMismatch, "B_star is not p x n");
  support.check_bounds(B_star.rows());
  if (support.empty()) throw Error(Errc::InvalidConfig, "support must be nonempty");

  const IndexSet off = support.complement(problem.A.cols());
  const Matrix A_s = select_cols(problem.A, support);
  const Matrix A_sc = select_cols(problem.A, off);
  Matrix gram = matmul_tn(A_s, A_s);
  for (std::size_t i = 0; i < gram.rows(); ++i)
    for (std::size_t j = i + 1; j < gram.cols(); ++j) gram(j, i) = gram(i, j);
  if (min_eigenvalue_sym(gram) <= 1e-12)
    throw Error(Errc::SingularGram, "A_S^T A_S is not positive definite");
  const Matrix gram_inv = inverse(gram);

  RecoveryReport r;
  r.lambda = problem.lambda;
  r.gamma = gamma;
  r.d_max = norm(gram_inv, NormKind::infinity);
  const Vector bn = row_norms(B_star);
  r.b_min = std::numeric_limits<double>::infinity();
  for (std::size_t i : support) r.b_min = std::min(r.b_min, bn[i]);
  for (std::size_t i : off)
    if (bn[i] != 0.0) throw Error(Errc::InvalidConfig, "B_star has nonzero rows off the support");
  r.noise_norm = block_norm(problem.Y - problem.A * B_star, BlockNorm::linf_l2);
  r.a_s_norm1 = norm(A_s, NormKind::one);
  r.a_sc_norm1 = off.empty() ? 0.0 : norm(A_sc, NormKind::one);
  r.irrepresentability = off.empty() ? 0.0 : norm(matmul_tn(A_sc, A_s) * gram_inv, NormKind::infinity);
  r.error_bound = r.d_max * (problem.lambda + r.a_s_norm1 * r.noise_norm);
  r.irrepresentable = r.irrepresentability <= 1.0 - gamma;
  r.bias_condition = r.error_bound <= 0.5 * r.b_min;
  r.noise_condition = r.a_sc_norm1 * r.noise_norm <= 0.5 * problem.lambda * gamma;
  return r;
}

}  // namespace nmfsel

#include "nmfsel/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nmfsel/linalg.hpp"
#include "nmfsel/moments.hpp"
#include "nmfsel/philox.hpp"

namespace nmfsel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Matrix symmetrized(Matrix m) {
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i + 1; j < m.cols(); ++j) {
      const double v = 0.5 * (m(i, j) + m(j, i));
      m(i, j) = m(j, i) = v;
    }
  return m;
}

struct GramBlocks {
  Matrix W1;
  Matrix W2;
};

// With M₂ = W D Wᵀ, W₁ = (M₂)_𝒦ᵀ(M₂)_𝒦 restricted to 𝒦 columns and
// W₂ = (M₂)_{𝒦ᶜ}ᵀ(M₂)_𝒦, where (M₂)_𝒦 are the columns of M₂ indexed by 𝒦.
GramBlocks gram_blocks(const Matrix& W, const IndexSet& k_index, const Vector& alpha) {
  Matrix dw = W;
  for (std::size_t f = 0; f < W.rows(); ++f)
    for (std::size_t k = 0; k < W.cols(); ++k) dw(f, k) *= alpha[k];
  const Matrix m2 = dw * W.transpose();
  const Matrix m2_k = select_cols(m2, k_index);
  const Matrix m2_rest = select_cols(m2, k_index.complement(W.rows()));
  return {symmetrized(matmul_tn(m2_k, m2_k)), matmul_tn(m2_rest, m2_k)};
}

double irrepresentability_from_blocks(const GramBlocks& g) {
  if (g.W2.rows() == 0) return 0.0;
  // W₂W₁⁻¹ = (W₁⁻¹W₂ᵀ)ᵀ for symmetric W₁.
  return norm(solve(g.W1, g.W2.transpose()).transpose(), NormKind::infinity);
}

void partitions(int remaining, int max_part, double product, const LatentLaw& law, double& total) {
  if (remaining == 0) {
    total += product;
    return;
  }
  for (int part = std::min(remaining, max_part); part >= 1; --part)
    partitions(remaining - part, part, product * latent_moment(law, part), law, total);
}

}  // namespace

double moment_partition_sum(const LatentLaw& law, int order) {
  if (order < 1 || order > 8) throw Error(Errc::UnsupportedOrder, "partition order");
  double total = 0.0;
  partitions(order, order, 1.0, law, total);
  return total;
}

IndexSet choose_K_index(const Matrix& W) {
  const std::size_t F = W.rows(), K = W.cols();
  if (K == 0 || K > F) throw Error(Errc::RankDeficient, "need 0 < K <= F");
  const double top = norm(W, NormKind::spectral);
  if (!(min_singular_value(W) > 1e-10 * top))
    throw Error(Errc::RankDeficient, "dictionary does not have full column rank");

  std::vector<std::size_t> chosen;
  std::vector<bool> used(F, false);
  for (std::size_t step = 0; step < K; ++step) {
    double best = -1.0;
    std::size_t best_row = F;
    for (std::size_t r = 0; r < F; ++r) {
      if (used[r]) continue;
      std::vector<std::size_t> rows = chosen;
      rows.push_back(r);
      Matrix block(rows.size(), K);
      for (std::size_t a = 0; a < rows.size(); ++a)
        for (std::size_t k = 0; k < K; ++k) block(a, k) = W(rows[a], k);
      const double score = min_singular_value(block);
      if (score > best) {
        best = score;
        best_row = r;
      }
    }
    used[best_row] = true;
    chosen.push_back(best_row);
  }
  return IndexSet::from_unsorted(std::move(chosen));
}

double irrepresentability(const Matrix& W, const IndexSet& k_index, const LatentLaw& law) {
  const auto pop = m2_population(W, law);
  return irrepresentability_from_blocks(gram_blocks(W, k_index, pop.alpha));
}

IndexSet select_K_index(const Matrix& W, const LatentLaw& law, std::uint64_t seed,
                        std::size_t candidates) {
  const IndexSet greedy = choose_K_index(W);
  const auto pop = m2_population(W, law);
  if (irrepresentability_from_blocks(gram_blocks(W, greedy, pop.alpha)) < 1.0) return greedy;

  const std::size_t F = W.rows(), K = W.cols();
  const double floor = 1e-10 * norm(W, NormKind::spectral);
  std::vector<double> score(candidates, -1.0);
  std::vector<IndexSet> subsets(candidates);
  const auto nc = static_cast<std::ptrdiff_t>(candidates);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t c = 0; c < nc; ++c) {
    PhiloxStream rng(seed, stream_id(StreamTag::subset_search, c));
    std::vector<std::size_t> perm(F);
    for (std::size_t i = 0; i < F; ++i) perm[i] = i;
    for (std::size_t i = 0; i < K; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.uniform() * static_cast<double>(F - i));
      std::swap(perm[i], perm[std::min(j, F - 1)]);
    }
    perm.resize(K);
    subsets[c] = IndexSet::from_unsorted(perm);
    const double sv = min_singular_value(select_rows(W, subsets[c]));
    if (!(sv > floor)) continue;
    try {
      if (irrepresentability_from_blocks(gram_blocks(W, subsets[c], pop.alpha)) < 1.0) score[c] = sv;
    } catch (const Error&) {
    }
  }
  const auto best = std::max_element(score.begin(), score.end());
  if (best == score.end() || *best < 0.0) return greedy;
  return subsets[static_cast<std::size_t>(best - score.begin())];
}

SupportCertificate build_x_star(const Matrix& W, const IndexSet& k_index) {
  const std::size_t F = W.rows(), K = W.cols();
  if (k_index.size() != K) throw Error(Errc::SingularBlock, "index set must have K rows");
  k_index.check_bounds(F);
  const IndexSet rest = k_index.complement(F);
  const Matrix wk = select_rows(W, k_index);
  if (!(min_singular_value(wk) > 1e-12 * std::max(1.0, norm(wk, NormKind::spectral))))
    throw Error(Errc::SingularBlock, "W_K is singular");

  SupportCertificate cert;
  cert.k_index = k_index;
  // Rᵀ = W_{𝒦ᶜ}W_𝒦⁻¹  ⇔  W_𝒦ᵀ R = W_{𝒦ᶜ}ᵀ.
  cert.R = rest.empty() ? Matrix(K, 0) : solve(wk.transpose(), select_rows(W, rest).transpose());
  cert.x_star = Matrix(F, F);
  for (std::size_t a = 0; a < K; ++a) {
    cert.x_star(k_index[a], k_index[a]) = 1.0;
    for (std::size_t b = 0; b < rest.size(); ++b) cert.x_star(k_index[a], rest[b]) = cert.R(a, b);
  }
  const Vector rn = row_norms(cert.R);
  cert.r_max = rn.empty() ? 0.0 : *std::max_element(rn.begin(), rn.end());
  cert.r_min = rn.empty() ? 0.0 : *std::min_element(rn.begin(), rn.end());
  return cert;
}

TheoryReport theorem_constants(const Matrix& W, const IndexSet& k_index, const LatentLaw& law,
                               double sigma, double delta, std::optional<double> n_samples) {
  if (!(delta > 0.0 && delta < 1.0)) throw Error(Errc::InvalidConfig, "delta must lie in (0, 1)");
  if (!(sigma >= 0.0) || !std::isfinite(sigma))
    throw Error(Errc::InvalidConfig, "sigma must be nonnegative");
  if (n_samples && !(*n_samples > 0.0)) throw Error(Errc::InvalidConfig, "n_samples must be positive");

  const SupportCertificate cert = build_x_star(W, k_index);
  const PopulationMoment pop = m2_population(W, law);
  const GramBlocks g = gram_blocks(W, k_index, pop.alpha);

  TheoryReport r;
  r.F = W.rows();
  r.K = W.cols();
  r.k_index = k_index;
  r.alpha = pop.alpha;
  r.kappa = pop.kappa;
  r.W1 = g.W1;
  r.W2 = g.W2;
  r.C_min = min_eigenvalue_sym(g.W1);
  r.D_max = norm(inverse(g.W1, 1e-300), NormKind::infinity);
  r.D_max_w1_norm = norm(g.W1, NormKind::infinity);
  r.irrepresentability = irrepresentability_from_blocks(g);
  r.gamma = 1.0 - r.irrepresentability;
  r.m2_norm1 = norm(pop.m2, NormKind::one);
  r.r_max = cert.r_max;
  r.r_min = cert.r_min;
  r.sigma = sigma;
  r.delta = delta;
  r.Delta = std::max(sigma, 1.0);
  r.W_max = *std::max_element(W.data().begin(), W.data().end());
  r.M4m = moment_partition_sum(law, 4);
  r.M8m = moment_partition_sum(law, 8);
  r.Mm = std::max(r.M8m, r.M4m * r.M4m);

  const double F = static_cast<double>(r.F);
  const double K = static_cast<double>(r.K);
  const double D = r.D_max;
  const double m1 = r.m2_norm1;
  const double gam = r.gamma;
  const double spread = 1.0 + std::sqrt(F * (1.0 + r.r_max * r.r_max));
  const double inflated = D + 6.0 * m1 * m1 * D * D;

  r.zeta1 = gam / (6.0 * std::sqrt(F) * m1 * D * (1.0 + 8.0 * m1 * m1 * D));
  r.zeta2 = gam * std::sqrt(1.0 + r.r_min * r.r_min) / (4.0 * (4.0 + gam) * m1 * spread * inflated);
  r.zeta = std::min({r.C_min > 0.0 ? std::sqrt(r.C_min) / 2.0 : 0.0, m1 / std::sqrt(F), r.zeta1,
                     r.zeta2});
  r.u_lambda = 2.0 * std::sqrt(1.0 + r.r_min * r.r_min) / ((4.0 + gam) * inflated);
  r.N_bound = r.zeta > 0.0 ? 958230.0 * r.Mm * std::pow(r.W_max, 2) * std::pow(K, 8) *
                                 std::pow(r.Delta, 8) * std::pow(F, 6) / (delta * r.zeta * r.zeta)
                           : kInf;
  r.n_for_l_lambda = n_samples.value_or(r.N_bound);
  r.l_lambda = 936.0 * std::sqrt(70.0 * r.Mm) * std::pow(r.W_max, 4) * std::pow(K, 4) *
               std::pow(r.Delta, 4) * std::pow(F, 3) / std::sqrt(delta * r.n_for_l_lambda) * m1 *
               spread / gam;
  return r;
}

void require_feasible(const TheoryReport& report) {
  if (!report.gamma_feasible())
    throw Error(Errc::InfeasibleGamma,
                "||W2 W1^-1||_inf = " + std::to_string(report.irrepresentability) + " >= 1");
}

PerturbationReport perturbation_report(const Matrix& Y_bar, const Matrix& L, const IndexSet& S,
                                       double gamma) {
  if (Y_bar.rows() != L.rows() || Y_bar.cols() != L.cols())
    throw Error(Errc::DimensionMismatch, "Y_bar and L must have the same shape");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw Error(Errc::InvalidConfig, "gamma must lie in (0, 1]");
  if (S.empty()) throw Error(Errc::InvalidConfig, "S must be nonempty");
  S.check_bounds(Y_bar.cols());
  const IndexSet Sc = S.complement(Y_bar.cols());
  const Matrix Y = Y_bar + L;

  const Matrix yb_s = select_cols(Y_bar, S);
  const Matrix gram_bar = symmetrized(matmul_tn(yb_s, yb_s));
  PerturbationReport r;
  r.gamma = gamma;
  r.C_min = min_eigenvalue_sym(gram_bar);
  if (!(r.C_min > 1e-12 * std::max(1.0, norm(gram_bar, NormKind::infinity))))
    throw Error(Errc::SingularGram, "Y_bar_S^T Y_bar_S is singular");
  const Matrix gram_bar_inv = inverse(gram_bar, 1e-300);
  r.D_max = norm(gram_bar_inv, NormKind::infinity);
  r.baseline_irrepresentability =
      Sc.empty() ? 0.0
                 : norm(matmul_tn(select_cols(Y_bar, Sc), yb_s) * gram_bar_inv, NormKind::infinity);
  r.baseline_ok = r.baseline_irrepresentability <= 1.0 - gamma;

  r.U_L = std::max(norm(L, NormKind::one), norm(L, NormKind::infinity));
  r.U_Ybar = std::max(norm(Y_bar, NormKind::one), norm(Y_bar, NormKind::infinity));
  const Matrix l_s = select_cols(L, S);
  r.L_s_spectral = norm(l_s, NormKind::spectral);

  const Matrix y_s = select_cols(Y, S);
  const Matrix gram = symmetrized(matmul_tn(y_s, y_s));
  r.eta = norm(gram_bar_inv * (gram - gram_bar), NormKind::infinity);

  const double growth = r.U_L * (2.0 * r.U_Ybar + r.U_L);
  r.conditions_met[0] = r.L_s_spectral <= std::sqrt(r.C_min) / 2.0;
  r.conditions_met[1] = r.eta < 1.0;
  if (r.eta < 1.0) {
    r.bias_term = r.D_max * growth *
                  (1.0 + (r.U_Ybar + r.U_L) * (r.U_Ybar + r.U_L) * r.D_max / (1.0 - r.eta));
    r.D_max_star = r.D_max + growth * r.D_max * r.D_max / (1.0 - r.eta);
  } else {
    r.bias_term = kInf;
    r.D_max_star = kInf;
  }
  r.conditions_met[2] = r.bias_term <= gamma / 2.0;

  r.min_eig_perturbed = min_eigenvalue_sym(gram);
  r.conclusions_hold[0] = r.min_eig_perturbed > 0.0;
  if (r.conclusions_hold[0]) {
    const Matrix gram_inv = inverse(gram, 1e-300);
    r.inverse_norm_perturbed = norm(gram_inv, NormKind::infinity);
    r.irrepresentability_perturbed =
        Sc.empty() ? 0.0 : norm(matmul_tn(select_cols(Y, Sc), y_s) * gram_inv, NormKind::infinity);
    r.conclusions_hold[1] = r.irrepresentability_perturbed <= 1.0 - gamma / 2.0;
    r.conclusions_hold[2] = r.inverse_norm_perturbed <= r.D_max_star;
  } else {
    r.inverse_norm_perturbed = kInf;
    r.irrepresentability_perturbed = kInf;
  }
  return r;
}

InversePerturbation inverse_perturbation(const Matrix& A, const Matrix& L) {
  if (A.rows() != A.cols()) throw Error(Errc::NotSquare, "A must be square");
  if (L.rows() != A.rows() || L.cols() != A.cols())
    throw Error(Errc::DimensionMismatch, "L must match A");
  const Matrix a_inv = inverse(A);
  InversePerturbation p;
  p.r = norm(a_inv * L, NormKind::infinity);
  if (!(p.r < 1.0)) throw Error(Errc::InvalidConfig, "||A^-1 L||_inf must be below 1");
  const double ainv_norm = norm(a_inv, NormKind::infinity);
  p.measured = norm(inverse(A + L) - a_inv, NormKind::infinity);
  p.bound = norm(L, NormKind::infinity) * ainv_norm * ainv_norm / (1.0 - p.r);
  return p;
}

}  // namespace nmfsel

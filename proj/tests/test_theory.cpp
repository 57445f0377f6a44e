#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "nmfsel/linalg.hpp"
#include "nmfsel/moments.hpp"
#include "nmfsel/theory.hpp"
#include "test_support.hpp"

using namespace nmfsel;
using namespace testing_support;

namespace {

const LatentLaw kExp1 = LatentLaw::exponential(1.0);

Matrix identity_top(std::size_t F, std::size_t K, double tau, std::uint64_t seed) {
  GenerativeConfig c;
  c.F = F;
  c.K = K;
  c.N = 1;
  c.dictionary = IdentityTopDictionary{tau, seed};
  return build_dictionary(c);
}

// All size-k subsets of {0..n-1} is too many; sample k distinct indices.
std::vector<std::size_t> random_subset(PhiloxStream& g, std::size_t n, std::size_t k) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[uniform_int(g, i, n - 1)]);
  idx.resize(k);
  return idx;
}

}  // namespace

TEST(KIndex, IdentityTopPicksIdentityRows) {
  const Matrix W = identity_top(15, 5, 0.2, 3);
  EXPECT_EQ(choose_K_index(W), IndexSet::range(0, 5));
}

TEST(KIndex, DuplicateRowsAreSkipped) {
  // Rows: e2, e0, e2, e1, e0 → pivots {0 (e2), 1 (e0), 3 (e1)}.
  const Matrix W{{0, 0, 1}, {1, 0, 0}, {0, 0, 1}, {0, 1, 0}, {1, 0, 0}};
  EXPECT_EQ(choose_K_index(W), IndexSet({0, 1, 3}));
}

TEST(KIndex, GreedyBeatsMedianRandomSubset) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    auto g = rng(20 + s);
    const Matrix W = random_matrix(12, 5, g, 0.0, 1.0);
    const double greedy = min_singular_value(select_rows(W, choose_K_index(W)));
    std::vector<double> scores;
    for (int t = 0; t < 1000; ++t)
      scores.push_back(
          min_singular_value(select_rows(W, IndexSet::from_unsorted(random_subset(g, 12, 5)))));
    std::nth_element(scores.begin(), scores.begin() + 500, scores.end());
    EXPECT_GE(greedy, scores[500]);
  }
}

TEST(KIndex, RankDeficient) {
  try {
    choose_K_index(Matrix{{1, 2}, {2, 4}, {3, 6}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::RankDeficient);
  }
  EXPECT_THROW(choose_K_index(Matrix(2, 3, 1.0)), Error);
}

TEST(KIndex, SelectFallsBackToFeasibleSubset) {
  const Matrix W = identity_top(20, 5, 0.15, 4);
  const IndexSet k = select_K_index(W, kExp1, 1);
  EXPECT_EQ(k.size(), 5u);
  EXPECT_LT(irrepresentability(W, k, kExp1), 1.0);
  // Deterministic in the seed.
  EXPECT_EQ(select_K_index(W, kExp1, 1), k);
}

TEST(XStar, SquareDictionaryGivesIdentity) {
  auto g = rng(1);
  const Matrix W = random_matrix(4, 4, g, 0.1, 1.0);
  const auto cert = build_x_star(W, IndexSet::range(0, 4));
  EXPECT_EQ(cert.x_star, Matrix::identity(4));
  EXPECT_EQ(cert.r_max, 0.0);
  EXPECT_EQ(cert.r_min, 0.0);
}

TEST(XStar, HandExample) {
  const Matrix W{{1, 0}, {0, 1}, {1, 1}};
  const auto cert = build_x_star(W, IndexSet({0, 1}));
  const Matrix expect{{1, 0, 1}, {0, 1, 1}, {0, 0, 0}};
  EXPECT_LT(max_abs_diff(cert.x_star, expect), 1e-15);
  EXPECT_NEAR(row_norms(cert.x_star)[0], std::sqrt(2.0), 1e-15);
  const Matrix m2 = m2_population(W, kExp1).m2;
  EXPECT_LT(max_abs_diff(m2 * cert.x_star, m2), 1e-12);
}

TEST(XStar, IdentityAndNormsOnRandomDictionaries) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    auto g = rng(100 + s);
    const std::size_t K = uniform_int(g, 1, 8), F = uniform_int(g, K, 25);
    const Matrix W = random_matrix(F, K, g, 0.0, 1.0);
    const IndexSet k = choose_K_index(W);
    const auto cert = build_x_star(W, k);
    const Matrix m2 = m2_population(W, kExp1).m2;
    EXPECT_LE(norm(m2 - m2 * cert.x_star, NormKind::frobenius),
              1e-10 * norm(m2, NormKind::frobenius));
    EXPECT_EQ(row_support(cert.x_star), k);
    const Vector xn = row_norms(cert.x_star);
    double lo = 1e300, hi = 0;
    for (std::size_t i : k) {
      lo = std::min(lo, xn[i]);
      hi = std::max(hi, xn[i]);
    }
    EXPECT_NEAR(hi, std::sqrt(1 + cert.r_max * cert.r_max), 1e-12 * hi);
    EXPECT_NEAR(lo, std::sqrt(1 + cert.r_min * cert.r_min), 1e-12 * hi);
    EXPECT_NEAR(block_norm(cert.x_star, BlockNorm::linf_l2),
                std::sqrt(1 + cert.r_max * cert.r_max), 1e-12 * hi);
  }
}

TEST(XStar, SingularBlock) {
  try {
    build_x_star(Matrix{{1, 1}, {1, 1}, {1, 0}}, IndexSet({0, 1}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::SingularBlock);
  }
}

TEST(Irrepresentability, IndependentOfLatentLaw) {
  // W₂W₁⁻¹ reduces to W_𝒦ᶜW_𝒦⁻¹, so any admissible law gives the same value.
  auto g = rng(2);
  const Matrix W = random_matrix(9, 3, g, 0.0, 1.0);
  const IndexSet k = choose_K_index(W);
  const double a = irrepresentability(W, k, kExp1);
  const double b = irrepresentability(W, k, LatentLaw::uniform(2.0));
  EXPECT_NEAR(a, b, 1e-10 * a);
  const auto cert = build_x_star(W, k);
  EXPECT_NEAR(a, norm(cert.R.transpose(), NormKind::infinity), 1e-10 * a);
}

TEST(PartitionSums, KnownValues) {
  // Partitions of 4: 4, 3+1, 2+2, 2+1+1, 1+1+1+1 → m4 + m3 m1 + m2² + m2 m1² + m1⁴.
  EXPECT_NEAR(moment_partition_sum(kExp1, 4), 9 + 0 + 1 + 0 + 0, 1e-12);
  // Gaussian(1): only even parts survive; partitions of 4 into even parts: 4, 2+2.
  EXPECT_NEAR(moment_partition_sum(LatentLaw::gaussian(1.0), 4), 3 + 1, 1e-12);
  // Partitions of 8 into even parts: 8, 6+2, 4+4, 4+2+2, 2+2+2+2 → 105 + 15 + 9 + 3 + 1.
  EXPECT_NEAR(moment_partition_sum(LatentLaw::gaussian(1.0), 8), 133, 1e-12);
  EXPECT_THROW(moment_partition_sum(kExp1, 9), Error);
}

TEST(TheoremConstants, IdentityDictionary) {
  const auto r = theorem_constants(Matrix::identity(3), IndexSet::range(0, 3), kExp1, 0.0, 0.1);
  EXPECT_EQ(r.W2.rows(), 0u);
  EXPECT_EQ(r.gamma, 1.0);
  EXPECT_LT(max_abs_diff(r.W1, Matrix::identity(3) * 36.0), 1e-12);
  EXPECT_NEAR(r.C_min, 36.0, 1e-12);
  EXPECT_NEAR(r.D_max, 1.0 / 36.0, 1e-15);
  EXPECT_NEAR(r.D_max_w1_norm, 36.0, 1e-12);
  EXPECT_EQ(r.Delta, 1.0);
  EXPECT_EQ(r.W_max, 1.0);
  EXPECT_TRUE(r.feasible());
  EXPECT_GT(r.zeta, 0.0);
  EXPECT_LE(r.zeta, std::sqrt(r.C_min) / 2);
  EXPECT_LE(r.zeta, std::min(r.zeta1, r.zeta2));
  EXPECT_GT(r.N_bound, 0.0);
}

TEST(TheoremConstants, FormulasEvaluatedIndependently) {
  const Matrix W = identity_top(12, 4, 0.1, 5);
  const IndexSet k = IndexSet::range(0, 4);
  const double sigma = 0.3, delta = 0.05, n = 1e5;
  const auto r = theorem_constants(W, k, kExp1, sigma, delta, n);

  // Recompute the Gram blocks with Eigen straight from their definition.
  const auto pop = m2_population(W, kExp1);
  const Eigen::MatrixXd w = to_eigen(W);
  Eigen::VectorXd alpha(4);
  for (int i = 0; i < 4; ++i) alpha(i) = pop.alpha[i];
  const Eigen::MatrixXd D = alpha.asDiagonal();
  const Eigen::MatrixXd wk = w.topRows(4), wr = w.bottomRows(8);
  const Eigen::MatrixXd W1 = wk * D * w.transpose() * w * D * wk.transpose();
  const Eigen::MatrixXd W2 = wr * D * w.transpose() * w * D * wk.transpose();
  EXPECT_LT(max_abs_diff(r.W1, from_eigen(W1)), 1e-10 * W1.norm());
  EXPECT_LT(max_abs_diff(r.W2, from_eigen(W2)), 1e-10 * W1.norm());
  const Eigen::MatrixXd W1inv = W1.inverse();
  const double D_max = W1inv.cwiseAbs().rowwise().sum().maxCoeff();
  const double irrep = (W2 * W1inv).cwiseAbs().rowwise().sum().maxCoeff();
  EXPECT_NEAR(r.D_max, D_max, 1e-10 * D_max);
  EXPECT_NEAR(r.gamma, 1.0 - irrep, 1e-10);
  EXPECT_NEAR(r.C_min, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(W1).eigenvalues()(0),
              1e-9 * r.C_min);

  const double F = 12, K = 4, g = r.gamma, m1 = r.m2_norm1;
  const double M = std::max(r.M8m, r.M4m * r.M4m);
  const double spread = 1 + std::sqrt(F * (1 + r.r_max * r.r_max));
  const double infl = D_max + 6 * m1 * m1 * D_max * D_max;
  const double z1 = g / (6 * std::sqrt(F) * m1 * D_max * (1 + 8 * m1 * m1 * D_max));
  const double z2 = g * std::sqrt(1 + r.r_min * r.r_min) / (4 * (4 + g) * m1 * spread * infl);
  const double z = std::min({std::sqrt(r.C_min) / 2, m1 / std::sqrt(F), z1, z2});
  EXPECT_NEAR(r.zeta1, z1, 1e-10 * z1);
  EXPECT_NEAR(r.zeta2, z2, 1e-10 * z2);
  EXPECT_NEAR(r.zeta, z, 1e-10 * z);
  EXPECT_NEAR(r.u_lambda, 2 * std::sqrt(1 + r.r_min * r.r_min) / ((4 + g) * infl),
              1e-10 * r.u_lambda);
  const double nb = 958230 * M * r.W_max * r.W_max * std::pow(K * r.Delta, 8) * std::pow(F, 6) /
                    (delta * z * z);
  EXPECT_NEAR(r.N_bound, nb, 1e-10 * nb);
  const double ll = 936 * std::sqrt(70 * M) * std::pow(r.W_max, 4) * std::pow(K * r.Delta, 4) *
                    std::pow(F, 3) / std::sqrt(delta * n) * m1 * spread / g;
  EXPECT_NEAR(r.l_lambda, ll, 1e-10 * ll);
  EXPECT_EQ(r.n_for_l_lambda, n);
  EXPECT_EQ(r.Delta, 1.0);
}

TEST(TheoremConstants, LowerLimitAtBoundDefaultsToNBound) {
  const Matrix W = identity_top(10, 3, 0.1, 6);
  const auto r = theorem_constants(W, IndexSet::range(0, 3), kExp1, 2.0, 0.1);
  EXPECT_EQ(r.n_for_l_lambda, r.N_bound);
  EXPECT_EQ(r.Delta, 2.0);
}

TEST(TheoremConstants, CalibratedSyntheticConfig) {
  const double tau = calibrate_tau(50, 10, 7, 0.1);
  const Matrix W = identity_top(50, 10, tau, 7);
  const auto r = theorem_constants(W, IndexSet::range(0, 10), kExp1, 0.01, 0.1);
  EXPECT_GT(r.gamma, 0.0);
  EXPECT_TRUE(r.feasible());
  EXPECT_TRUE(std::isfinite(r.l_lambda) && std::isfinite(r.u_lambda));
}

TEST(TheoremConstants, Errors) {
  const Matrix W = Matrix::identity(2);
  for (double delta : {0.0, 1.0, -0.5}) {
    try {
      theorem_constants(W, IndexSet::range(0, 2), kExp1, 0.0, delta);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::InvalidConfig);
    }
  }
  try {
    theorem_constants(W, IndexSet::range(0, 2), LatentLaw::gaussian(1.0), 0.0, 0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DegenerateKurtosis);
  }
  // Dictionary whose off-block rows dominate: reported, then rejected on demand.
  const Matrix bad{{1, 0}, {0, 1}, {3, 3}};
  const auto r = theorem_constants(bad, IndexSet({0, 1}), kExp1, 0.0, 0.1);
  EXPECT_FALSE(r.gamma_feasible());
  try {
    require_feasible(r);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InfeasibleGamma);
  }
}

TEST(Perturbation, ZeroPerturbation) {
  auto g = rng(3);
  const Matrix Y = random_gaussian(10, 6, g);
  const IndexSet S({0, 2});
  const auto base = perturbation_report(Y, Matrix(10, 6), S, 0.01);
  EXPECT_EQ(base.eta, 0.0);
  EXPECT_EQ(base.U_L, 0.0);
  EXPECT_NEAR(base.D_max_star, base.D_max, 1e-15);
  EXPECT_TRUE(base.conditions_met[0] && base.conditions_met[1] && base.conditions_met[2]);
  if (base.baseline_ok) {
    EXPECT_TRUE(base.conclusions_hold[0] && base.conclusions_hold[1] && base.conclusions_hold[2]);
  }
}

TEST(Perturbation, ConclusionsHoldWheneverHypothesesDo) {
  int covered = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    auto g = rng(1000 + s);
    const std::size_t m = uniform_int(g, 8, 14), p = uniform_int(g, 3, 6);
    Matrix Ybar = random_gaussian(m, p, g);
    const IndexSet S({0});
    const auto probe = perturbation_report(Ybar, Matrix(m, p), S, 0.5);
    const double gamma = std::clamp(1.0 - probe.baseline_irrepresentability, 1e-3, 1.0);
    const double scale = std::pow(10.0, -2.0 - 4.0 * g.uniform());
    const Matrix L = random_gaussian(m, p, g) * scale;
    const auto r = perturbation_report(Ybar, L, S, gamma);
    if (!r.all_conditions()) continue;
    ++covered;
    EXPECT_TRUE(r.conclusions_hold[0]) << s;
    EXPECT_TRUE(r.conclusions_hold[1]) << s;
    EXPECT_TRUE(r.conclusions_hold[2]) << s;
  }
  EXPECT_GT(covered, 20);
}

TEST(Perturbation, TightSpectralHypothesisKeepsGramInvertible) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    auto g = rng(3000 + s);
    const Matrix Ybar = random_gaussian(9, 4, g);
    const IndexSet S({1, 3});
    Matrix L = random_gaussian(9, 4, g);
    const auto probe = perturbation_report(Ybar, L, S, 0.5);
    L *= (std::sqrt(probe.C_min) / 2) / probe.L_s_spectral;
    const auto r = perturbation_report(Ybar, L, S, 0.5);
    EXPECT_NEAR(r.L_s_spectral, std::sqrt(r.C_min) / 2, 1e-9 * r.L_s_spectral);
    EXPECT_TRUE(r.conclusions_hold[0]);
    // Weyl: the smallest singular value drops by at most ‖L_S‖₂.
    EXPECT_GE(std::sqrt(r.min_eig_perturbed), std::sqrt(r.C_min) / 2 * (1 - 1e-9));
  }
}

TEST(Perturbation, EtaInfinityMakesBoundInfinite) {
  const Matrix Y{{1, 0}, {0, 1}};
  const Matrix L{{-1, 0}, {0, 0}};  // wipes out the support column
  const auto r = perturbation_report(Y, L, IndexSet({0}), 0.5);
  EXPECT_GE(r.eta, 1.0);
  EXPECT_FALSE(r.conditions_met[1]);
  EXPECT_TRUE(std::isinf(r.D_max_star));
}

TEST(Perturbation, SingularGram) {
  try {
    perturbation_report(Matrix(3, 2), Matrix(3, 2), IndexSet({0}), 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::SingularGram);
  }
}

TEST(InversePerturbation, BoundHoldsOnRandomProbes) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    auto g = rng(2000 + s);
    const std::size_t n = uniform_int(g, 2, 7);
    const Matrix A = random_gaussian(n, n, g) + Matrix::identity(n) * 3.0;
    Matrix L = random_gaussian(n, n, g);
    const double r0 = norm(inverse(A) * L, NormKind::infinity);
    L *= (0.05 + 0.9 * g.uniform()) / r0;
    const auto p = inverse_perturbation(A, L);
    EXPECT_LT(p.r, 1.0);
    EXPECT_LE(p.measured, p.bound);
  }
  EXPECT_THROW(inverse_perturbation(Matrix::identity(2), Matrix::identity(2) * -1.0), Error);
}

#pragma once

#include <cstdint>
#include <optional>

#include "nmfsel/matrix.hpp"
#include "nmfsel/synth.hpp"

namespace nmfsel {

/// Index set 𝒦 with W_𝒦 invertible plus the matrix X* = Π[I R; 0 0]Π that
/// reproduces M₂ = M₂X*.
struct SupportCertificate {
  IndexSet k_index;
  Matrix R;       // K × (F − K), Rᵀ = W_{𝒦ᶜ} W_𝒦⁻¹
  Matrix x_star;  // F × F, nonzero rows exactly 𝒦
  double r_max = 0.0;
  double r_min = 0.0;
};

/// Greedy row selection: each step adds the row that maximizes the smallest
/// singular value of the selected block (ties to the lowest index).
/// Throws RankDeficient if σ_K(W) ≤ 1e-10·σ_1(W).
IndexSet choose_K_index(const Matrix& W);

/// Greedy choice, then, when it leaves ‖W₂W₁⁻¹‖_∞ ≥ 1, the best of
/// `candidates` random K-subsets (by smallest singular value among those with
/// a positive slack). Falls back to the greedy set when none qualifies.
IndexSet select_K_index(const Matrix& W, const LatentLaw& law, std::uint64_t seed = 0,
                        std::size_t candidates = 200);

/// Throws SingularBlock when W_𝒦 is not invertible.
SupportCertificate build_x_star(const Matrix& W, const IndexSet& k_index);

/// ‖W₂W₁⁻¹‖_∞ for the Gram blocks W₁ = W_𝒦DWᵀWDW_𝒦ᵀ, W₂ = W_{𝒦ᶜ}DWᵀWDW_𝒦ᵀ,
/// D = Diag(α). Zero when 𝒦ᶜ is empty.
double irrepresentability(const Matrix& W, const IndexSet& k_index, const LatentLaw& law);

/// Sum over the integer partitions of `order` of the products of raw moments
/// (the aggregates M₄ and M₈).
double moment_partition_sum(const LatentLaw& law, int order);

struct TheoryReport {
  std::size_t F = 0;
  std::size_t K = 0;
  IndexSet k_index;
  Vector alpha;
  double kappa = 0.0;
  Matrix W1;
  Matrix W2;
  double C_min = 0.0;
  double D_max = 0.0;          // ‖W₁⁻¹‖_∞, used in every derived constant
  double D_max_w1_norm = 0.0;  // ‖W₁‖_∞, the literal alternative reading
  double irrepresentability = 0.0;  // ‖W₂W₁⁻¹‖_∞
  double gamma = 0.0;               // 1 − irrepresentability (unclamped)
  double m2_norm1 = 0.0;
  double r_max = 0.0;
  double r_min = 0.0;
  double zeta = 0.0, zeta1 = 0.0, zeta2 = 0.0;
  double l_lambda = 0.0;
  double u_lambda = 0.0;
  double N_bound = 0.0;
  double n_for_l_lambda = 0.0;
  double W_max = 0.0;
  double Delta = 0.0;
  double M4m = 0.0, M8m = 0.0, Mm = 0.0;
  double sigma = 0.0;
  double delta = 0.0;

  bool gamma_feasible() const { return gamma > 0.0 && gamma <= 1.0; }
  bool c_min_positive() const { return C_min > 0.0; }
  bool lambda_window_nonempty() const { return l_lambda <= u_lambda; }
  bool feasible() const { return gamma_feasible() && c_min_positive(); }
};

/// Every constant of the sample-complexity guarantee for a known dictionary.
/// l_λ is evaluated at `n_samples` when given, else at N_bound. The report is
/// returned even when γ ≤ 0; require_feasible turns that into InfeasibleGamma.
/// Throws InvalidConfig for δ ∉ (0, 1) or σ < 0, DegenerateKurtosis for κ = 0.
TheoryReport theorem_constants(const Matrix& W, const IndexSet& k_index, const LatentLaw& law,
                               double sigma, double delta,
                               std::optional<double> n_samples = std::nullopt);

void require_feasible(const TheoryReport& report);

struct PerturbationReport {
  double C_min = 0.0;
  double D_max = 0.0;
  double gamma = 0.0;
  double baseline_irrepresentability = 0.0;
  double eta = 0.0;
  double U_L = 0.0;
  double U_Ybar = 0.0;
  double L_s_spectral = 0.0;
  double bias_term = 0.0;  // D U_L (2U_Ȳ + U_L)[1 + (U_Ȳ + U_L)² D/(1 − η)]
  /// +inf when η ≥ 1.
  double D_max_star = 0.0;
  /// ‖L_S‖₂ ≤ √C_min/2, η < 1, bias_term ≤ γ/2.
  bool conditions_met[3] = {false, false, false};
  bool baseline_ok = false;  // baseline_irrepresentability ≤ 1 − γ

  // Measured on Y = Ȳ + L.
  double min_eig_perturbed = 0.0;
  double irrepresentability_perturbed = 0.0;
  double inverse_norm_perturbed = 0.0;
  /// Invertible, ≤ 1 − γ/2, ≤ D*_max; only meaningful when all hypotheses hold.
  bool conclusions_hold[3] = {false, false, false};

  bool all_conditions() const {
    return conditions_met[0] && conditions_met[1] && conditions_met[2] && baseline_ok;
  }
};

/// Checks how a column-block Gram structure survives the perturbation
/// Y = Ȳ + L on the column set S. η is measured with the exact Gram change
/// Y_SᵀY_S − Ȳ_SᵀȲ_S. Throws SingularGram if Ȳ_SᵀȲ_S is singular.
PerturbationReport perturbation_report(const Matrix& Y_bar, const Matrix& L, const IndexSet& S,
                                       double gamma);

struct InversePerturbation {
  double r = 0.0;         // ‖A⁻¹L‖_∞
  double measured = 0.0;  // ‖(A + L)⁻¹ − A⁻¹‖_∞
  double bound = 0.0;     // ‖L‖_∞‖A⁻¹‖²_∞ / (1 − r)
};

/// Requires r < 1 (InvalidConfig otherwise).
InversePerturbation inverse_perturbation(const Matrix& A, const Matrix& L);

}  // namespace nmfsel

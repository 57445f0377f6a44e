#pragma once

#include <optional>
#include <vector>

#include "nmfsel/matrix.hpp"

namespace nmfsel {

/// min_B ½‖Y − A·B‖²_F + λ‖B‖_{ℓ₁/ℓ₂}
struct GroupLassoProblem {
  Matrix Y;  // m × n
  Matrix A;  // m × p
  double lambda = 1.0;

  /// Throws InvalidConfig for λ ≤ 0, DimensionMismatch for non-conformable shapes.
  void validate() const;
};

enum class StepRule { fixed_lipschitz, backtracking };

struct SolverSettings {
  std::size_t max_iters = 50000;
  double rel_obj_tol = 1e-10;
  double kkt_tol = 1e-6;
  StepRule step_rule = StepRule::fixed_lipschitz;

  void validate() const;
};

struct GroupLassoSolution {
  Matrix B_hat;
  std::size_t iterations = 0;
  std::vector<double> objective_trace;
  bool converged = false;
  double kkt_residual = 0.0;
  /// Tolerance the residual was held to (see certificate_tolerance).
  double kkt_threshold = 0.0;
  double lipschitz = 0.0;

  double objective() const { return objective_trace.empty() ? 0.0 : objective_trace.back(); }
};

/// Row-wise group soft threshold: b ↦ max(0, 1 − t/‖b‖₂)·b, the proximal map
/// of t·‖·‖_{ℓ₁/ℓ₂}. Rows with ‖b‖₂ ≤ t become exactly zero.
Matrix prox_row_group(const Matrix& B, double threshold);

double group_lasso_objective(const GroupLassoProblem& problem, const Matrix& B);

/// Gradient Aᵀ(AB − Y) of the smooth part.
Matrix group_lasso_gradient(const GroupLassoProblem& problem, const Matrix& B);

/// Accelerated proximal gradient with function-value restart (the objective
/// trace never increases). Stops once the relative objective change stays
/// below rel_obj_tol for 10 consecutive iterations and the KKT residual is
/// within certificate_tolerance; otherwise returns the best iterate with
/// converged = false after max_iters.
GroupLassoSolution solve(const GroupLassoProblem& problem, const SolverSettings& settings,
                         const std::optional<Matrix>& warm_start = std::nullopt);

/// kkt_tol·max(1, λ) plus a rounding floor proportional to ‖AᵀY‖_{ℓ∞/ℓ₂}:
/// gradients of badly scaled problems cannot be resolved below it.
double certificate_tolerance(const GroupLassoProblem& problem, double kkt_tol);

struct KktReport {
  /// ‖λẐ_S + A_Sᵀ(AB̂ − Y)‖_{ℓ∞/ℓ₂} with Ẑ_S the row-normalized B̂_S.
  double stationarity = 0.0;
  /// ‖A_{Sᶜ}ᵀ(AB̂ − Y)‖_{ℓ∞/ℓ₂}, which must stay below λ.
  double offsupport_dual = 0.0;
  /// max(stationarity, offsupport_dual − λ, 0).
  double residual = 0.0;
  bool strict_dual_feasible = false;
};

/// Primal-dual optimality certificate for B̂ with the given support. Throws
/// EmptySupportWithNonzeroRows when a row outside `support` has norm above
/// row_tol.
KktReport kkt_check(const GroupLassoProblem& problem, const Matrix& B_hat, const IndexSet& support,
                    double row_tol = 1e-6);

/// Indices of rows whose Euclidean norm exceeds eps.
IndexSet row_support(const Matrix& B, double eps = 0.0);

struct RecoveryReport {
  double lambda = 0.0;
  double gamma = 0.0;
  double d_max = 0.0;          // ‖(A_SᵀA_S)⁻¹‖_∞
  double b_min = 0.0;          // min_{i∈S} ‖b*_i‖₂
  double noise_norm = 0.0;     // ‖Y − A·B*‖_{ℓ∞/ℓ₂}
  double a_s_norm1 = 0.0;      // ‖A_S‖₁
  double a_sc_norm1 = 0.0;     // ‖A_{Sᶜ}‖₁
  double irrepresentability = 0.0;  // ‖A_{Sᶜ}ᵀA_S(A_SᵀA_S)⁻¹‖_∞
  double error_bound = 0.0;    // D_max(λ + ‖A_S‖₁‖L‖_{ℓ∞/ℓ₂})
  bool irrepresentable = false;  // irrepresentability ≤ 1 − γ
  bool bias_condition = false;   // error_bound ≤ b_min / 2
  bool noise_condition = false;  // ‖A_{Sᶜ}‖₁‖L‖ ≤ λγ/2

  bool all_hold() const { return irrepresentable && bias_condition && noise_condition; }
};

/// Evaluates the sufficient conditions for exact support recovery with the
/// error bound. Throws InvalidConfig for γ ∉ (0, 1], SingularGram when A_SᵀA_S
/// has minimum eigenvalue ≤ 1e-12.
RecoveryReport recovery_conditions(const GroupLassoProblem& problem, const Matrix& B_star,
                                   const IndexSet& support, double gamma);

}  // namespace nmfsel

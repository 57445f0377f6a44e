#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nmfsel/grouplasso.hpp"
#include "nmfsel/matrix.hpp"
#include "nmfsel/synth.hpp"

namespace nmfsel {

struct EstimateResult {
  std::size_t K_hat = 0;
  Vector row_norms;
  double lambda = 0.0;
  double epsilon = 0.0;
  /// ‖M̂₂ − M̂₂X̂‖_F / ‖M̂₂‖_F, zero when M̂₂ = 0.
  double relative_error = 0.0;
  GroupLassoSolution solution;
  /// Solver converged with a KKT certificate.
  bool certified = false;
};

/// Self-representation of a given moment matrix: X̂ solves the group lasso
/// with Y = A = m2, and K̂ counts the rows of X̂ with norm above epsilon.
EstimateResult estimate_from_moment(const Matrix& m2, double lambda, double epsilon = 1e-6,
                                    const SolverSettings& settings = {},
                                    const std::optional<Matrix>& warm_start = std::nullopt);

/// Full pipeline on a data matrix (F × N): M̂₂ by the fast path, then
/// estimate_from_moment. Throws InvalidConfig for λ ≤ 0 or ε < 0.
EstimateResult estimate_k(const Matrix& V, double lambda, double epsilon = 1e-6,
                          const SolverSettings& settings = {});

struct SweepConfig {
  GenerativeConfig base;
  std::vector<std::size_t> N_grid;
  std::size_t trials = 20;
  double lambda = 10.0;
  double epsilon = 1e-6;
  std::uint64_t seed_base = 0;

  void validate() const;
};

struct SweepRow {
  std::size_t F = 0;
  std::size_t N = 0;
  double mean_khat = 0.0;  // NaN when every trial failed
  double std_khat = 0.0;
  std::size_t trials = 0;
  std::size_t failures = 0;     // trials that raised an error
  std::size_t uncertified = 0;  // trials whose solve did not certify
};

/// Trial t at grid point N regenerates the data with seed seed_base + t while
/// the dictionary stays fixed. Trials run in parallel.
std::vector<SweepRow> sweep(const SweepConfig& config, const SolverSettings& settings = {});

struct PathRow {
  double lambda = 0.0;
  std::size_t K_hat = 0;
  double relative_error = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
  double kkt_residual = 0.0;
  std::string error;  // empty on success
};

/// One row per λ (input must be strictly ascending and positive). Solves run
/// from the largest λ down, each warm-started from the previous solution, and
/// rows are returned in ascending λ.
std::vector<PathRow> lambda_path(const Matrix& V, const std::vector<double>& lambdas,
                                 double epsilon = 1e-6, const SolverSettings& settings = {});
std::vector<PathRow> lambda_path_from_moment(const Matrix& m2, const std::vector<double>& lambdas,
                                             double epsilon = 1e-6,
                                             const SolverSettings& settings = {});

/// Indices i of certified rows where K̂ grows from the previous certified row
/// to row i, i.e. breaks of the non-increasing-in-λ pattern.
std::vector<std::size_t> path_monotonicity_violations(const std::vector<PathRow>& rows);

/// n log-spaced values from a to b inclusive. Throws InvalidConfig unless
/// 0 < a < b and n ≥ 2 (a single point a = b, n = 1 is also accepted).
std::vector<double> log_grid(double a, double b, std::size_t n);

std::string format_sweep_csv(const std::vector<SweepRow>& rows);
std::string format_path_csv(const std::vector<PathRow>& rows);

struct SvgSeries {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> err;  // optional error bars, same length as y or empty
};

/// Minimal self-contained line plot with optional error bars.
std::string render_svg(const SvgSeries& series, const std::string& x_label,
                       const std::string& y_label, bool log_x);

}  // namespace nmfsel

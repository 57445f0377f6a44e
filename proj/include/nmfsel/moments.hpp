#pragma once

#include <vector>

#include "nmfsel/matrix.hpp"
#include "nmfsel/synth.hpp"

namespace nmfsel {

/// Empirical contracted cumulant M̂₂ and how it was obtained.
struct MomentEstimate {
  enum class Path { fast, oracle };

  Matrix m2_hat;
  Vector contraction_s;
  Vector contraction_t;
  std::size_t n_samples = 0;
  Path path = Path::fast;
};

/// Dense fourth-order array indexed (i, j, l, m), all indices < F.
class CumulantTensor4 {
 public:
  explicit CumulantTensor4(std::size_t F) : F_(F), data_(F * F * F * F, 0.0) {}

  std::size_t dim() const noexcept { return F_; }
  double& operator()(std::size_t i, std::size_t j, std::size_t l, std::size_t m) noexcept {
    return data_[((i * F_ + j) * F_ + l) * F_ + m];
  }
  double operator()(std::size_t i, std::size_t j, std::size_t l, std::size_t m) const noexcept {
    return data_[((i * F_ + j) * F_ + l) * F_ + m];
  }

 private:
  std::size_t F_;
  std::vector<double> data_;
};

/// M̂₂ = V Diag(q) Vᵀ/N - ((Σq)/N² V Vᵀ + 2 V p pᵀ Vᵀ/N²) with p the column
/// sums of V and q = p², i.e. the empirical cumulant contracted twice with
/// the all-ones vector, in O(F²N). Exactly symmetric.
/// Throws TooFewSamples (N < 2) or NonFinite.
MomentEstimate m2_hat_fast(const Matrix& V);

/// Same formula over moment_sums_serial; reference for the parallel kernel.
Matrix m2_hat_fast_serial(const Matrix& V);

/// Dense empirical cumulant: fourth moment minus the three pairings of
/// empirical second moments. O(F⁴N); F is capped at 32.
CumulantTensor4 m4_hat_oracle(const Matrix& V);

/// [result]_ij = Σ_{l,m} t_ijlm s_l u_m.
Matrix m2_from_tensor(const CumulantTensor4& t, std::span<const double> s,
                      std::span<const double> u);

struct PopulationMoment {
  Matrix m2;
  Vector alpha;
  double kappa = 0.0;
};

/// M₂ = W Diag(α) Wᵀ with α_k = κ (eᵀw_k)². Throws DegenerateKurtosis when
/// the law has zero fourth cumulant and ZeroColumn for an all-zero column.
PopulationMoment m2_population(const Matrix& W, const LatentLaw& law);

struct ConcentrationRow {
  std::size_t N = 0;
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t trials = 0;
};

/// For each N, mean and sample standard deviation over trials of
/// ||m2_hat_fast(V_N) - M₂||_F. Trial t uses seed config.seed + t.
std::vector<ConcentrationRow> concentration_probe(const GenerativeConfig& config,
                                                  const std::vector<std::size_t>& n_grid,
                                                  std::size_t trials);

/// Least-squares slope of log(mean) against log(N).
double loglog_slope(const std::vector<ConcentrationRow>& rows);

}  // namespace nmfsel

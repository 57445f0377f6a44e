#include "nmfsel/moments.hpp"

#include <cmath>
#include <numeric>

#include "nmfsel/kernels.hpp"
#include "nmfsel/linalg.hpp"

namespace nmfsel {

namespace {

void check_samples(const Matrix& V) {
  if (V.rows() == 0) throw Error(Errc::DimensionMismatch, "V has no rows");
  if (V.cols() < 2) throw Error(Errc::TooFewSamples, "need at least 2 samples");
  if (!V.all_finite()) throw Error(Errc::NonFinite, "V has non-finite entries");
}

Matrix assemble(const kernels::MomentSums& s, std::size_t N) {
  const std::size_t F = s.gram.rows();
  const double n = static_cast<double>(N);
  const double q_scale = s.q_total / (n * n);
  Matrix m(F, F);
  for (std::size_t i = 0; i < F; ++i)
    for (std::size_t j = i; j < F; ++j) {
      const double v = s.weighted(i, j) / n - q_scale * s.gram(i, j) -
                       2.0 * s.pv[i] * s.pv[j] / (n * n);
      m(i, j) = m(j, i) = v;
    }
  return m;
}

}  // namespace

MomentEstimate m2_hat_fast(const Matrix& V) {
  check_samples(V);
  MomentEstimate est;
  est.m2_hat = assemble(kernels::moment_sums(V), V.cols());
  est.contraction_s.assign(V.rows(), 1.0);
  est.contraction_t.assign(V.rows(), 1.0);
  est.n_samples = V.cols();
  est.path = MomentEstimate::Path::fast;
  return est;
}

Matrix m2_hat_fast_serial(const Matrix& V) {
  check_samples(V);
  return assemble(kernels::moment_sums_serial(V), V.cols());
}

CumulantTensor4 m4_hat_oracle(const Matrix& V) {
  check_samples(V);
  const std::size_t F = V.rows(), N = V.cols();
  if (F > 32) throw Error(Errc::DimensionTooLarge, "dense tensor oracle is limited to F <= 32");
  const double n = static_cast<double>(N);

  Matrix second(F, F);
  for (std::size_t i = 0; i < F; ++i)
    for (std::size_t j = 0; j < F; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < N; ++k) s += V(i, k) * V(j, k);
      second(i, j) = s / n;
    }

  CumulantTensor4 t(F);
  for (std::size_t i = 0; i < F; ++i)
    for (std::size_t j = 0; j < F; ++j)
      for (std::size_t l = 0; l < F; ++l)
        for (std::size_t m = 0; m < F; ++m) {
          double s = 0.0;
          for (std::size_t k = 0; k < N; ++k) s += V(i, k) * V(j, k) * V(l, k) * V(m, k);
          const double pairing = second(i, j) * second(l, m) + second(i, l) * second(j, m) +
                                 second(i, m) * second(j, l);
          t(i, j, l, m) = s / n - pairing;
        }
  return t;
}

Matrix m2_from_tensor(const CumulantTensor4& t, std::span<const double> s,
                      std::span<const double> u) {
  const std::size_t F = t.dim();
  if (s.size() != F || u.size() != F)
    throw Error(Errc::DimensionMismatch, "contraction vectors must have length F");
  Matrix out(F, F);
  for (std::size_t i = 0; i < F; ++i)
    for (std::size_t j = 0; j < F; ++j) {
      double acc = 0.0;
      for (std::size_t l = 0; l < F; ++l)
        for (std::size_t m = 0; m < F; ++m) acc += t(i, j, l, m) * s[l] * u[m];
      out(i, j) = acc;
    }
  return out;
}

PopulationMoment m2_population(const Matrix& W, const LatentLaw& law) {
  const double m4 = latent_moment(law, 4);
  const double kappa = excess_kurtosis(law);
  if (std::abs(kappa) <= 1e-12 * std::abs(m4))
    throw Error(Errc::DegenerateKurtosis, "latent law " + law.to_string() + " has m4 = 3 m2^2");
  PopulationMoment pop;
  pop.kappa = kappa;
  pop.alpha.resize(W.cols());
  for (std::size_t k = 0; k < W.cols(); ++k) {
    double colsum = 0.0;
    for (std::size_t f = 0; f < W.rows(); ++f) {
      if (W(f, k) < 0.0) throw Error(Errc::InvalidConfig, "dictionary must be nonnegative");
      colsum += W(f, k);
    }
    if (colsum == 0.0) throw Error(Errc::ZeroColumn, "column " + std::to_string(k) + " is zero");
    pop.alpha[k] = kappa * colsum * colsum;
  }
  Matrix scaled = W;
  for (std::size_t f = 0; f < W.rows(); ++f)
    for (std::size_t k = 0; k < W.cols(); ++k) scaled(f, k) *= pop.alpha[k];
  pop.m2 = scaled * W.transpose();
  for (std::size_t i = 0; i < pop.m2.rows(); ++i)
    for (std::size_t j = i + 1; j < pop.m2.cols(); ++j) pop.m2(j, i) = pop.m2(i, j);
  return pop;
}

std::vector<ConcentrationRow> concentration_probe(const GenerativeConfig& config,
                                                  const std::vector<std::size_t>& n_grid,
                                                  std::size_t trials) {
  if (trials == 0) throw Error(Errc::InvalidConfig, "trials must be positive");
  GenerativeConfig base = config;
  base.N = 1;
  const Matrix W = build_dictionary(base);
  const Matrix m2 = m2_population(W, config.latent).m2;

  std::vector<ConcentrationRow> rows;
  for (std::size_t N : n_grid) {
    if (N < 2) throw Error(Errc::TooFewSamples, "grid point below 2 samples");
    std::vector<double> err(trials);
    const auto nt = static_cast<std::ptrdiff_t>(trials);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t t = 0; t < nt; ++t) {
      GenerativeConfig cfg = config;
      cfg.N = N;
      cfg.seed = config.seed + static_cast<std::uint64_t>(t);
      const Dataset d = generate(cfg);
      err[t] = norm(m2_hat_fast(d.V).m2_hat - m2, NormKind::frobenius);
    }
    ConcentrationRow row{N, 0.0, 0.0, trials};
    row.mean = std::accumulate(err.begin(), err.end(), 0.0) / static_cast<double>(trials);
    if (trials > 1) {
      double ss = 0.0;
      for (double e : err) ss += (e - row.mean) * (e - row.mean);
      row.stddev = std::sqrt(ss / static_cast<double>(trials - 1));
    }
    rows.push_back(row);
  }
  return rows;
}

double loglog_slope(const std::vector<ConcentrationRow>& rows) {
  if (rows.size() < 2) throw Error(Errc::InvalidConfig, "slope needs at least two grid points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(rows.size());
  for (const auto& r : rows) {
    const double x = std::log(static_cast<double>(r.N));
    const double y = std::log(r.mean);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace nmfsel

#include "nmfsel/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "nmfsel/csv.hpp"
#include "nmfsel/linalg.hpp"
#include "nmfsel/moments.hpp"

namespace nmfsel {

namespace {

void check_lambda_epsilon(double lambda, double epsilon) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw Error(Errc::InvalidConfig, "lambda must be a positive finite number");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
    throw Error(Errc::InvalidConfig, "epsilon must be a nonnegative finite number");
}

}  // namespace

EstimateResult estimate_from_moment(const Matrix& m2, double lambda, double epsilon,
                                    const SolverSettings& settings,
                                    const std::optional<Matrix>& warm_start) {
  check_lambda_epsilon(lambda, epsilon);
  if (m2.rows() != m2.cols()) throw Error(Errc::NotSquare, "moment matrix must be square");
  EstimateResult r;
  r.lambda = lambda;
  r.epsilon = epsilon;

  const double scale = norm(m2, NormKind::frobenius);
  if (scale == 0.0) {
    // Zero data: the zero matrix is the exact minimizer.
    r.solution.B_hat = Matrix(m2.rows(), m2.cols());
    r.solution.objective_trace = {0.0};
    r.solution.converged = true;
    r.row_norms.assign(m2.rows(), 0.0);
    r.certified = true;
    return r;
  }

  r.solution = solve(GroupLassoProblem{m2, m2, lambda}, settings, warm_start);
  r.certified = r.solution.converged;
  r.row_norms = row_norms(r.solution.B_hat);
  r.K_hat = static_cast<std::size_t>(
      std::count_if(r.row_norms.begin(), r.row_norms.end(), [&](double v) { return v > epsilon; }));
  r.relative_error = norm(m2 - m2 * r.solution.B_hat, NormKind::frobenius) / scale;
  return r;
}

EstimateResult estimate_k(const Matrix& V, double lambda, double epsilon,
                          const SolverSettings& settings) {
  check_lambda_epsilon(lambda, epsilon);
  return estimate_from_moment(m2_hat_fast(V).m2_hat, lambda, epsilon, settings);
}

void SweepConfig::validate() const {
  base.validate();
  if (trials < 1) throw Error(Errc::InvalidConfig, "trials must be at least 1");
  if (N_grid.empty()) throw Error(Errc::InvalidConfig, "N_grid must not be empty");
  for (std::size_t i = 1; i < N_grid.size(); ++i)
    if (N_grid[i] <= N_grid[i - 1]) throw Error(Errc::InvalidConfig, "N_grid must be increasing");
  if (N_grid.front() < 2) throw Error(Errc::TooFewSamples, "N_grid entries must be at least 2");
  check_lambda_epsilon(lambda, epsilon);
}

std::vector<SweepRow> sweep(const SweepConfig& config, const SolverSettings& settings) {
  config.validate();
  settings.validate();
  std::vector<SweepRow> rows;
  for (std::size_t N : config.N_grid) {
    std::vector<double> khat(config.trials, 0.0);
    std::vector<int> status(config.trials, 0);  // 0 ok, 1 uncertified, 2 failed
    const auto nt = static_cast<std::ptrdiff_t>(config.trials);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t t = 0; t < nt; ++t) {
      GenerativeConfig cfg = config.base;
      cfg.N = N;
      cfg.seed = config.seed_base + static_cast<std::uint64_t>(t);
      try {
        const EstimateResult r =
            estimate_k(generate(cfg).V, config.lambda, config.epsilon, settings);
        khat[t] = static_cast<double>(r.K_hat);
        status[t] = r.certified ? 0 : 1;
      } catch (const Error&) {
        status[t] = 2;
      }
    }

    SweepRow row;
    row.F = config.base.F;
    row.N = N;
    row.trials = config.trials;
    std::vector<double> ok;
    for (std::size_t t = 0; t < config.trials; ++t) {
      if (status[t] == 2) {
        ++row.failures;
        continue;
      }
      if (status[t] == 1) ++row.uncertified;
      ok.push_back(khat[t]);
    }
    if (ok.empty()) {
      row.mean_khat = std::numeric_limits<double>::quiet_NaN();
      row.std_khat = std::numeric_limits<double>::quiet_NaN();
    } else {
      row.mean_khat = std::accumulate(ok.begin(), ok.end(), 0.0) / static_cast<double>(ok.size());
      if (ok.size() > 1) {
        double ss = 0.0;
        for (double v : ok) ss += (v - row.mean_khat) * (v - row.mean_khat);
        row.std_khat = std::sqrt(ss / static_cast<double>(ok.size() - 1));
      }
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<PathRow> lambda_path_from_moment(const Matrix& m2, const std::vector<double>& lambdas,
                                             double epsilon, const SolverSettings& settings) {
  if (lambdas.empty()) throw Error(Errc::InvalidConfig, "lambda grid is empty");
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    check_lambda_epsilon(lambdas[i], epsilon);
    if (i > 0 && !(lambdas[i] > lambdas[i - 1]))
      throw Error(Errc::InvalidConfig, "lambda grid must be strictly increasing");
  }
  settings.validate();

  std::vector<PathRow> rows(lambdas.size());
  std::optional<Matrix> warm;
  for (std::size_t k = lambdas.size(); k-- > 0;) {
    PathRow& row = rows[k];
    row.lambda = lambdas[k];
    try {
      EstimateResult r = estimate_from_moment(m2, lambdas[k], epsilon, settings, warm);
      row.K_hat = r.K_hat;
      row.relative_error = r.relative_error;
      row.converged = r.certified;
      row.iterations = r.solution.iterations;
      row.kkt_residual = r.solution.kkt_residual;
      warm = std::move(r.solution.B_hat);
    } catch (const Error& e) {
      row.error = std::string(to_string(e.code()));
    }
  }
  return rows;
}

std::vector<PathRow> lambda_path(const Matrix& V, const std::vector<double>& lambdas,
                                 double epsilon, const SolverSettings& settings) {
  return lambda_path_from_moment(m2_hat_fast(V).m2_hat, lambdas, epsilon, settings);
}

std::vector<std::size_t> path_monotonicity_violations(const std::vector<PathRow>& rows) {
  std::vector<std::size_t> out;
  std::optional<std::size_t> prev;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].converged || !rows[i].error.empty()) continue;
    if (prev && rows[i].K_hat > rows[*prev].K_hat) out.push_back(i);
    prev = i;
  }
  return out;
}

std::vector<double> log_grid(double a, double b, std::size_t n) {
  if (!(a > 0.0) || !std::isfinite(a) || !std::isfinite(b))
    throw Error(Errc::InvalidConfig, "grid bounds must be positive and finite");
  if (n == 1 && a == b) return {a};
  if (n < 2 || !(b > a)) throw Error(Errc::InvalidConfig, "grid needs a < b and at least 2 points");
  const double la = std::log10(a), lb = std::log10(b);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double e = la + (lb - la) * static_cast<double>(i) / static_cast<double>(n - 1);
    out[i] = std::pow(10.0, e);
  }
  out.front() = a;
  out.back() = b;
  return out;
}

std::string format_sweep_csv(const std::vector<SweepRow>& rows) {
  std::string s = "F,N,mean_khat,std_khat,trials,failures,uncertified\n";
  for (const auto& r : rows)
    s += std::to_string(r.F) + ',' + std::to_string(r.N) + ',' + format_double(r.mean_khat) + ',' +
         format_double(r.std_khat) + ',' + std::to_string(r.trials) + ',' +
         std::to_string(r.failures) + ',' + std::to_string(r.uncertified) + '\n';
  return s;
}

std::string format_path_csv(const std::vector<PathRow>& rows) {
  std::string s = "lambda,K_hat,relative_error,converged,iterations,kkt_residual,error\n";
  for (const auto& r : rows)
    s += format_double(r.lambda) + ',' + std::to_string(r.K_hat) + ',' +
         format_double(r.relative_error) + ',' + (r.converged ? "1" : "0") + ',' +
         std::to_string(r.iterations) + ',' + format_double(r.kkt_residual) + ',' + r.error + '\n';
  return s;
}

std::string render_svg(const SvgSeries& series, const std::string& x_label,
                       const std::string& y_label, bool log_x) {
  if (series.x.size() != series.y.size() ||
      (!series.err.empty() && series.err.size() != series.y.size()))
    throw Error(Errc::DimensionMismatch, "series lengths differ");
  constexpr double width = 640, height = 400, margin = 60;
  const auto tx = [&](double v) { return log_x ? std::log10(v) : v; };

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (std::size_t i = 0; i < series.x.size(); ++i) {
    if (!std::isfinite(series.y[i])) continue;
    const double e = series.err.empty() ? 0.0 : series.err[i];
    x0 = std::min(x0, tx(series.x[i]));
    x1 = std::max(x1, tx(series.x[i]));
    y0 = std::min(y0, series.y[i] - e);
    y1 = std::max(y1, series.y[i] + e);
  }
  if (!(x1 > x0)) x1 = x0 + 1.0;
  if (!(y1 > y0)) y1 = y0 + 1.0;
  const auto px = [&](double v) { return margin + (tx(v) - x0) / (x1 - x0) * (width - 2 * margin); };
  const auto py = [&](double v) {
    return height - margin - (v - y0) / (y1 - y0) * (height - 2 * margin);
  };
  const auto num = [](double v) {
    std::ostringstream o;
    o.precision(6);
    o << v;
    return o.str();
  };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin
      << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
      << height - margin << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"" << height - 15 << "\" text-anchor=\"middle\">"
      << x_label << (log_x ? " (log10)" : "") << "</text>\n";
  out << "<text x=\"15\" y=\"" << height / 2 << "\" transform=\"rotate(-90 15 " << height / 2
      << ")\" text-anchor=\"middle\">" << y_label << "</text>\n";
  out << "<text x=\"" << margin << "\" y=\"" << height - margin + 15 << "\">" << num(x0)
      << "</text>\n<text x=\"" << width - margin << "\" y=\"" << height - margin + 15
      << "\" text-anchor=\"end\">" << num(x1) << "</text>\n";
  out << "<text x=\"" << margin - 5 << "\" y=\"" << height - margin << "\" text-anchor=\"end\">"
      << num(y0) << "</text>\n<text x=\"" << margin - 5 << "\" y=\"" << margin
      << "\" text-anchor=\"end\">" << num(y1) << "</text>\n";

  out << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < series.x.size(); ++i)
    if (std::isfinite(series.y[i])) out << num(px(series.x[i])) << ',' << num(py(series.y[i])) << ' ';
  out << "\"/>\n";
  for (std::size_t i = 0; i < series.x.size(); ++i) {
    if (!std::isfinite(series.y[i])) continue;
    const double cx = px(series.x[i]);
    out << "<circle cx=\"" << num(cx) << "\" cy=\"" << num(py(series.y[i]))
        << "\" r=\"3\" fill=\"steelblue\"/>\n";
    if (!series.err.empty() && series.err[i] > 0.0)
      out << "<line x1=\"" << num(cx) << "\" y1=\"" << num(py(series.y[i] - series.err[i]))
          << "\" x2=\"" << num(cx) << "\" y2=\"" << num(py(series.y[i] + series.err[i]))
          << "\" stroke=\"steelblue\"/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace nmfsel

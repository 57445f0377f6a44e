// Command-line front end. Exit codes: 0 success, 1 usage error, 2 numeric
// or data failure (the error kind is printed on stderr).

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nmfsel/csv.hpp"
#include "nmfsel/moments.hpp"
#include "nmfsel/pipeline.hpp"
#include "nmfsel/serialize.hpp"
#include "nmfsel/synth.hpp"
#include "nmfsel/theory.hpp"

namespace fs = std::filesystem;
using namespace nmfsel;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_grid(const std::string& text) {
  // a:b:n, log-spaced
  const auto c1 = text.find(':');
  const auto c2 = c1 == std::string::npos ? c1 : text.find(':', c1 + 1);
  if (c2 == std::string::npos) throw UsageError("--grid: expected a:b:n, got '" + text + "'");
  try {
    std::size_t used = 0;
    const double a = std::stod(text.substr(0, c1));
    const double b = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
    const std::string ns = text.substr(c2 + 1);
    const long n = std::stol(ns, &used);
    if (used != ns.size() || n < 1) throw std::invalid_argument("count");
    return log_grid(a, b, static_cast<std::size_t>(n));
  } catch (const std::logic_error&) {
    throw UsageError("--grid: expected a:b:n, got '" + text + "'");
  } catch (const Error& e) {
    throw UsageError(std::string("--grid: ") + e.what());
  }
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size() || !(v >= 1.0) || v != std::floor(v)) throw std::invalid_argument("n");
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::logic_error&) {
      throw UsageError("--grid: '" + item + "' is not a positive integer");
    }
  }
  if (out.empty()) throw UsageError("--grid: empty list");
  return out;
}

std::vector<std::size_t> parse_indices(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const unsigned long v = std::stoul(item, &used);
      if (used != item.size() || item.front() == '-') throw std::invalid_argument("index");
      out.push_back(v);
    } catch (const std::logic_error&) {
      throw UsageError("--k-index: '" + item + "' is not a row index");
    }
  }
  if (out.empty()) throw UsageError("--k-index: empty list");
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::Io, "cannot create " + dir.string() + ": " + ec.message());
}

SolverSettings settings_from(std::size_t max_iters) {
  SolverSettings s;
  s.max_iters = max_iters;
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latent dimensionality estimation for noisy nonnegative factor models"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  std::size_t max_iters = SolverSettings{}.max_iters;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "Seed for every random draw");
    sub->add_option("--max-iters", max_iters, "Solver iteration cap")->check(CLI::PositiveNumber);
  };

  // generate
  std::string gen_config, gen_out;
  auto* gen = app.add_subcommand("generate", "Draw a synthetic data set");
  gen->add_option("--config", gen_config, "Generative config JSON")->required();
  gen->add_option("--out", gen_out, "Output directory")->required();
  add_common(gen);

  // estimate
  std::string est_data, est_out;
  double est_lambda = 0.0, est_epsilon = 1e-6;
  auto* est = app.add_subcommand("estimate", "Estimate K from a data matrix");
  est->add_option("--data", est_data, "F x N data matrix CSV")->required();
  est->add_option("--lambda", est_lambda, "Regularization weight")->required();
  est->add_option("--epsilon", est_epsilon, "Row-norm threshold");
  est->add_option("--out", est_out, "Result JSON")->required();
  add_common(est);

  // sweep
  std::string sw_config, sw_out, sw_svg;
  auto* sw = app.add_subcommand("sweep", "Repeat generation and estimation over a grid of N");
  sw->add_option("--config", sw_config, "Sweep config JSON")->required();
  sw->add_option("--out", sw_out, "Output CSV")->required();
  sw->add_option("--svg", sw_svg, "Optional SVG plot of mean K_hat vs N");
  add_common(sw);

  // swimmer
  std::string swim_out;
  bool swim_pgm = false;
  auto* swim = app.add_subcommand("swimmer", "Render the swimmer image set");
  swim->add_option("--out", swim_out, "Output directory")->required();
  swim->add_flag("--pgm", swim_pgm, "Also write one PGM image per column");
  add_common(swim);

  // lambda-path
  std::string lp_data, lp_grid, lp_out, lp_svg;
  double lp_epsilon = 1e-6;
  auto* lp = app.add_subcommand("lambda-path", "K_hat and relative error along a lambda grid");
  lp->add_option("--data", lp_data, "F x N data matrix CSV")->required();
  lp->add_option("--grid", lp_grid, "Log grid a:b:n")->required();
  lp->add_option("--epsilon", lp_epsilon, "Row-norm threshold");
  lp->add_option("--out", lp_out, "Output CSV")->required();
  lp->add_option("--svg", lp_svg, "Optional SVG plot of K_hat vs lambda");
  add_common(lp);

  // theory-check
  std::string tc_dict, tc_law = "exponential:1", tc_out, tc_index;
  double tc_sigma = 0.0, tc_delta = 0.1;
  std::optional<double> tc_n;
  auto* tc = app.add_subcommand("theory-check", "Evaluate the guarantee constants for a dictionary");
  tc->add_option("--dict", tc_dict, "F x K dictionary CSV")->required();
  tc->add_option("--law", tc_law, "Latent law, e.g. exponential:1");
  tc->add_option("--sigma", tc_sigma, "Noise standard deviation");
  tc->add_option("--delta", tc_delta, "Failure probability");
  tc->add_option("--n", tc_n, "Sample size at which to evaluate the lower lambda limit");
  tc->add_option("--k-index", tc_index, "Comma-separated row indices (default: automatic)");
  tc->add_option("--out", tc_out, "Report JSON")->required();
  add_common(tc);

  // concentration
  std::string cc_config, cc_grid, cc_out;
  std::size_t cc_trials = 10;
  auto* cc = app.add_subcommand("concentration", "Moment estimation error against N");
  cc->add_option("--config", cc_config, "Generative config JSON")->required();
  cc->add_option("--grid", cc_grid, "Comma-separated sample sizes")->required();
  cc->add_option("--trials", cc_trials, "Trials per grid point")->check(CLI::PositiveNumber);
  cc->add_option("--out", cc_out, "Output CSV")->required();
  add_common(cc);

  // calibrate-tau
  std::size_t ct_F = 0, ct_K = 0;
  double ct_gamma = 0.1;
  auto* ct = app.add_subcommand("calibrate-tau", "Largest tau meeting a target slack");
  ct->add_option("--F", ct_F, "Rows")->required();
  ct->add_option("--K", ct_K, "Columns")->required();
  ct->add_option("--gamma", ct_gamma, "Target slack");
  add_common(ct);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    std::cerr << (subs.empty() ? app.help() : subs.front()->help());
    return 1;
  }

  const SolverSettings settings = settings_from(max_iters);
  try {
    if (*gen) {
      GenerativeConfig cfg = generative_config_from_json(read_json(gen_config));
      if (seed) cfg.seed = *seed;
      const Dataset d = generate(cfg);
      ensure_dir(gen_out);
      write_matrix_csv(d.V, fs::path(gen_out) / "V.csv");
      if (d.W_true) write_matrix_csv(*d.W_true, fs::path(gen_out) / "W.csv");
      if (d.H_true) write_matrix_csv(*d.H_true, fs::path(gen_out) / "H.csv");
      write_json(dataset_sidecar(d), fs::path(gen_out) / "dataset.json");
    } else if (*est) {
      const Matrix V = read_matrix_csv(est_data);
      const MomentEstimate m = m2_hat_fast(V);
      const EstimateResult r = estimate_from_moment(m.m2_hat, est_lambda, est_epsilon, settings);
      Json out = to_json(r);
      out["moments"] = to_json(m);
      write_json(out, est_out);
      std::cout << "K_hat=" << r.K_hat << " relative_error=" << format_double(r.relative_error)
                << (r.certified ? "" : " (not certified)") << '\n';
    } else if (*sw) {
      SweepConfig cfg = sweep_config_from_json(read_json(sw_config));
      if (seed) cfg.seed_base = *seed;
      const auto rows = sweep(cfg, settings);
      write_text(format_sweep_csv(rows), sw_out);
      if (!sw_svg.empty()) {
        SvgSeries s;
        for (const auto& r : rows) {
          s.x.push_back(static_cast<double>(r.N));
          s.y.push_back(r.mean_khat);
          s.err.push_back(r.std_khat);
        }
        write_text(render_svg(s, "N", "mean K_hat", true), sw_svg);
      }
    } else if (*swim) {
      const Dataset d = swimmer();
      ensure_dir(swim_out);
      write_matrix_csv(d.V, fs::path(swim_out) / "V.csv");
      write_json(dataset_sidecar(d), fs::path(swim_out) / "dataset.json");
      if (swim_pgm) {
        ensure_dir(fs::path(swim_out) / "pgm");
        export_pgm(d.V, SwimmerGeometry::height, SwimmerGeometry::width,
                   fs::path(swim_out) / "pgm");
      }
    } else if (*lp) {
      const std::vector<double> grid = parse_grid(lp_grid);
      const Matrix V = read_matrix_csv(lp_data);
      const auto rows = lambda_path(V, grid, lp_epsilon, settings);
      write_text(format_path_csv(rows), lp_out);
      for (std::size_t i : path_monotonicity_violations(rows))
        std::cerr << "warning: K_hat increases at lambda=" << format_double(rows[i].lambda) << '\n';
      if (!lp_svg.empty()) {
        SvgSeries s;
        for (const auto& r : rows) {
          s.x.push_back(r.lambda);
          s.y.push_back(static_cast<double>(r.K_hat));
        }
        write_text(render_svg(s, "lambda", "K_hat", true), lp_svg);
      }
    } else if (*tc) {
      const Matrix W = read_matrix_csv(tc_dict);
      LatentLaw law;
      try {
        law = LatentLaw::parse(tc_law);
      } catch (const Error& e) {
        throw UsageError(std::string("--law: ") + e.what());
      }
      IndexSet k_index;
      if (tc_index.empty()) {
        k_index = select_K_index(W, law, seed.value_or(0));
      } else {
        k_index = IndexSet::from_unsorted(parse_indices(tc_index));
      }
      const TheoryReport report = theorem_constants(W, k_index, law, tc_sigma, tc_delta, tc_n);
      write_json(to_json(report), tc_out);
      require_feasible(report);
    } else if (*cc) {
      GenerativeConfig cfg = generative_config_from_json(read_json(cc_config));
      if (seed) cfg.seed = *seed;
      const auto rows = concentration_probe(cfg, parse_sizes(cc_grid), cc_trials);
      std::string csv = "N,mean_error,std_error,trials\n";
      for (const auto& r : rows)
        csv += std::to_string(r.N) + ',' + format_double(r.mean) + ',' + format_double(r.stddev) +
               ',' + std::to_string(r.trials) + '\n';
      write_text(csv, cc_out);
      if (rows.size() >= 2) std::cout << "loglog_slope=" << format_double(loglog_slope(rows)) << '\n';
    } else if (*ct) {
      std::cout << format_double(calibrate_tau(ct_F, ct_K, seed.value_or(0), ct_gamma)) << '\n';
    }
  } catch (const UsageError& e) {
    std::cerr << e.what() << '\n' << app.help();
    return 1;
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

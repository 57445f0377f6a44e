#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nmfsel/csv.hpp"
#include "nmfsel/linalg.hpp"
#include "nmfsel/moments.hpp"
#include "nmfsel/pipeline.hpp"
#include "nmfsel/serialize.hpp"
#include "test_support.hpp"

#ifndef NMFSEL_CLI_PATH
#error "NMFSEL_CLI_PATH must point at the command-line binary"
#endif

using namespace nmfsel;
using namespace testing_support;
namespace fs = std::filesystem;

namespace {

GenerativeConfig synthetic(std::size_t F, std::size_t N, double tau, std::uint64_t seed) {
  GenerativeConfig c;
  c.F = F;
  c.K = 10;
  c.N = N;
  c.sigma = 0.01;
  c.latent = LatentLaw::exponential(1.0);
  c.dictionary = IdentityTopDictionary{tau, 7};
  c.seed = seed;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Run {
  int code;
  std::string err;
};

Run run_cli(const std::string& args, const fs::path& dir) {
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string(NMFSEL_CLI_PATH) + " " + args + " >" +
                          (dir / "stdout.txt").string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(err)};
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("nmfsel_pipeline_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST(Estimate, SyntheticLargeSampleRecoversK) {
  const double tau = calibrate_tau(50, 10, 7, 0.1);
  const Dataset d = generate(synthetic(50, 10000, tau, 1));
  const auto r = estimate_k(d.V, 10.0);
  EXPECT_TRUE(r.certified);
  EXPECT_EQ(r.K_hat, 10u);
  EXPECT_EQ(r.row_norms.size(), 50u);
  std::size_t count = 0;
  for (double v : r.row_norms) count += v > r.epsilon;
  EXPECT_EQ(count, r.K_hat);
}

TEST(Estimate, ZeroSolutionAboveThreshold) {
  const Dataset d = generate(synthetic(20, 2000, 0.1, 2));
  const Matrix m2 = m2_hat_fast(d.V).m2_hat;
  const double threshold = block_norm(matmul_tn(m2, m2), BlockNorm::linf_l2);
  const auto r = estimate_k(d.V, threshold * 1.001);
  EXPECT_EQ(r.K_hat, 0u);
  EXPECT_NEAR(r.relative_error, 1.0, 1e-12);
}

TEST(Estimate, ZeroData) {
  const auto r = estimate_k(Matrix(6, 10), 1.0);
  EXPECT_EQ(r.K_hat, 0u);
  EXPECT_EQ(r.relative_error, 0.0);
  EXPECT_TRUE(r.certified);
}

TEST(Estimate, SwimmerSelectsOneRowPerPart) {
  const auto r = estimate_k(swimmer().V, 1.0);
  EXPECT_TRUE(r.certified);
  EXPECT_EQ(r.K_hat, 17u);  // sixteen limb parts and the torso
  EXPECT_LT(r.relative_error, 1e-3);
}

TEST(Estimate, InvalidArguments) {
  EXPECT_THROW(estimate_k(Matrix(3, 4, 1.0), 0.0), Error);
  EXPECT_THROW(estimate_k(Matrix(3, 4, 1.0), 1.0, -1.0), Error);
  EXPECT_THROW(estimate_k(Matrix(3, 1, 1.0), 1.0), Error);
}

TEST(Estimate, EpsilonInsensitiveOnCertifiedSolves) {
  for (std::uint64_t s = 0; s < 3; ++s) {
    const Dataset d = generate(synthetic(20, 5000, 0.1, 10 + s));
    const Matrix m2 = m2_hat_fast(d.V).m2_hat;
    const auto base = estimate_from_moment(m2, 10.0, 1e-9);
    ASSERT_TRUE(base.certified);
    for (double eps : {1e-8, 1e-6, 1e-4, 1e-3}) {
      std::size_t k = 0;
      for (double v : base.row_norms) k += v > eps;
      EXPECT_EQ(k, base.K_hat) << "eps " << eps;
    }
  }
}

TEST(Estimate, ColumnPermutationInvariance) {
  const Dataset d = generate(synthetic(20, 3000, 0.1, 3));
  Matrix P(d.V.rows(), d.V.cols());
  for (std::size_t n = 0; n < d.V.cols(); ++n) {
    const std::size_t src = (n * 7919) % d.V.cols();  // 7919 is coprime with 3000
    for (std::size_t f = 0; f < d.V.rows(); ++f) P(f, n) = d.V(f, src);
  }
  const Matrix a = m2_hat_fast(d.V).m2_hat, b = m2_hat_fast(P).m2_hat;
  EXPECT_LE(norm(a - b, NormKind::frobenius), 1e-12 * norm(a, NormKind::frobenius));
  const auto ra = estimate_k(d.V, 10.0), rb = estimate_k(P, 10.0);
  EXPECT_EQ(ra.K_hat, rb.K_hat);
  EXPECT_NEAR(ra.relative_error, rb.relative_error, 1e-6);
}

TEST(Sweep, SingleTrialHasZeroStd) {
  SweepConfig cfg;
  cfg.base = synthetic(20, 2, 0.1, 0);
  cfg.N_grid = {500, 1000};
  cfg.trials = 1;
  const auto rows = sweep(cfg);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.std_khat, 0.0);
    EXPECT_EQ(r.trials, 1u);
    EXPECT_EQ(r.F, 20u);
  }
  EXPECT_EQ(rows[1].N, 1000u);
}

TEST(Sweep, LargeSampleMeanNearTrueK) {
  SweepConfig cfg;
  cfg.base = synthetic(20, 2, calibrate_tau(20, 10, 7, 0.1), 0);
  cfg.N_grid = {8000};
  cfg.trials = 4;
  const auto rows = sweep(cfg);
  EXPECT_NEAR(rows[0].mean_khat, 10.0, 1.0);
  EXPECT_EQ(rows[0].failures, 0u);
}

TEST(Sweep, ConfigValidation) {
  SweepConfig cfg;
  cfg.base = synthetic(20, 2, 0.1, 0);
  cfg.N_grid = {1000, 500};
  EXPECT_THROW(cfg.validate(), Error);
  cfg.N_grid = {500};
  cfg.trials = 0;
  EXPECT_THROW(cfg.validate(), Error);
  const std::string csv = format_sweep_csv({SweepRow{20, 500, 10, 0.5, 3, 0, 1}});
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "F,N,mean_khat,std_khat,trials,failures,uncertified");
  EXPECT_NE(csv.find("20,500,10,0.5,3,0,1"), std::string::npos);
}

TEST(LambdaPath, GridAndMonotonicity) {
  const auto grid = log_grid(1e-5, 1e9, 29);
  ASSERT_EQ(grid.size(), 29u);
  EXPECT_EQ(grid.front(), 1e-5);
  EXPECT_EQ(grid.back(), 1e9);
  EXPECT_NEAR(grid[10], 1.0, 1e-12);
  EXPECT_THROW(log_grid(1.0, 0.5, 3), Error);
  EXPECT_THROW(log_grid(0.0, 1.0, 3), Error);

  for (std::uint64_t s = 0; s < 3; ++s) {
    const Dataset d = generate(synthetic(20, 5000, 0.1, 20 + s));
    const auto rows = lambda_path(d.V, log_grid(1e-2, 1e6, 17));
    ASSERT_EQ(rows.size(), 17u);
    for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_GT(rows[i].lambda, rows[i - 1].lambda);
    EXPECT_TRUE(path_monotonicity_violations(rows).empty());
    EXPECT_EQ(rows.back().K_hat, 0u);
    for (const auto& r : rows) EXPECT_TRUE(r.error.empty());
  }
  EXPECT_THROW(lambda_path(Matrix(3, 5, 1.0), {1.0, 0.5}), Error);
}

TEST(LambdaPath, ViolationDetector) {
  std::vector<PathRow> rows(4);
  const std::size_t k[] = {5, 4, 6, 3};
  for (std::size_t i = 0; i < 4; ++i) {
    rows[i].lambda = static_cast<double>(i + 1);
    rows[i].K_hat = k[i];
    rows[i].converged = true;
  }
  EXPECT_EQ(path_monotonicity_violations(rows), std::vector<std::size_t>{2});
  rows[2].converged = false;
  EXPECT_TRUE(path_monotonicity_violations(rows).empty());
}

TEST(Serialize, GenerativeConfigRoundTrip) {
  const auto c = synthetic(30, 123, 0.123456789, 99);
  const auto back = generative_config_from_json(Json::parse(to_json(c).dump()));
  EXPECT_EQ(to_json(back), to_json(c));
  auto explicit_cfg = c;
  explicit_cfg.F = 2;
  explicit_cfg.K = 2;
  explicit_cfg.dictionary = ExplicitDictionary{Matrix{{1, 0.5}, {0, 1}}};
  const auto back2 = generative_config_from_json(to_json(explicit_cfg));
  EXPECT_EQ(std::get<ExplicitDictionary>(back2.dictionary).W, (Matrix{{1, 0.5}, {0, 1}}));

  Json bad = to_json(c);
  bad["typo"] = 1;
  EXPECT_THROW(generative_config_from_json(bad), Error);
  bad = to_json(c);
  bad["F"] = "twenty";
  EXPECT_THROW(generative_config_from_json(bad), Error);
}

TEST(Serialize, SweepConfigRoundTrip) {
  SweepConfig c;
  c.base = synthetic(20, 2, 0.1, 0);
  c.N_grid = {100, 1000};
  c.trials = 3;
  c.seed_base = 18446744073709551615ull;
  EXPECT_EQ(to_json(sweep_config_from_json(to_json(c))), to_json(c));
}

TEST(Serialize, ReportsCarryEveryConstant) {
  const auto r = theorem_constants(Matrix{{1, 0}, {0, 1}, {0.1, 0.2}}, IndexSet({0, 1}),
                                   LatentLaw::exponential(1.0), 0.0, 0.1);
  const Json j = to_json(r);
  for (const char* key : {"C_min", "D_max", "D_max_w1_norm", "gamma", "W1", "W2", "zeta", "zeta1",
                          "zeta2", "l_lambda", "u_lambda", "N_bound", "W_max", "Delta", "M4", "M8",
                          "M", "delta"})
    EXPECT_TRUE(j.contains(key)) << key;
  PerturbationReport p;
  p.D_max_star = std::numeric_limits<double>::infinity();
  EXPECT_TRUE(to_json(p)["D_max_star"].is_null());
}

TEST(Cli, UsageAndNumericExitCodes) {
  const fs::path dir = scratch("exit");
  write_matrix_csv(Matrix{{1, 0}, {0, 1}, {0.5, 0.5}}, dir / "W.csv");
  write_matrix_csv(Matrix{{1, 2, 3}, {2, 1, 0}}, dir / "V.csv");

  auto r = run_cli("estimate --data " + (dir / "V.csv").string() + " --out " +
                       (dir / "r.json").string(),
                   dir);
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("--lambda"), std::string::npos);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);

  r = run_cli("theory-check --dict " + (dir / "W.csv").string() +
                  " --law gaussian:1 --sigma 0.01 --delta 0.1 --out " + (dir / "t.json").string(),
              dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("DegenerateKurtosis"), std::string::npos);

  r = run_cli("lambda-path --data " + (dir / "V.csv").string() + " --grid 1:2 --out " +
                  (dir / "p.csv").string(),
              dir);
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("--grid"), std::string::npos);

  r = run_cli("estimate --data " + (dir / "missing.csv").string() + " --lambda 1 --out " +
                  (dir / "r.json").string(),
              dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("Io"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Cli, GenerateThenEstimateRoundTripsK) {
  const fs::path dir = scratch("roundtrip");
  const double tau = calibrate_tau(20, 10, 7, 0.1);
  write_json(to_json(synthetic(20, 10000, tau, 5)), dir / "cfg.json");
  ASSERT_EQ(run_cli("generate --config " + (dir / "cfg.json").string() + " --out " +
                        (dir / "data").string(),
                    dir)
                .code,
            0);
  const Json side = read_json(dir / "data" / "dataset.json");
  EXPECT_EQ(side["K_true"], 10);
  EXPECT_EQ(side["prng"], "philox4x32-10");
  ASSERT_EQ(run_cli("estimate --data " + (dir / "data" / "V.csv").string() +
                        " --lambda 10 --out " + (dir / "r.json").string(),
                    dir)
                .code,
            0);
  EXPECT_EQ(read_json(dir / "r.json")["K_hat"], 10);
  fs::remove_all(dir);
}

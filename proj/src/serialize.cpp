#include "nmfsel/serialize.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "nmfsel/philox.hpp"

namespace nmfsel {

namespace {

Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json vec(const Vector& v) {
  Json out = Json::array();
  for (double x : v) out.push_back(num(x));
  return out;
}

Json indices(const IndexSet& s) { return Json(s.indices()); }

void only_keys(const Json& j, std::initializer_list<const char*> allowed, const char* what) {
  if (!j.is_object()) throw Error(Errc::InvalidConfig, std::string(what) + " must be an object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : allowed) known = known || item.key() == k;
    if (!known) throw Error(Errc::InvalidConfig, std::string("unknown field '") + item.key() +
                                                     "' in " + what);
  }
}

template <class T>
T field(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw Error(Errc::InvalidConfig, std::string("field '") + key + "' has the wrong type");
  }
}

template <class T>
T required(const Json& j, const char* key) {
  if (!j.contains(key)) throw Error(Errc::InvalidConfig, std::string("missing field '") + key + "'");
  return field<T>(j, key, T{});
}

}  // namespace

Json to_json(const Matrix& m) {
  Json out = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (double v : m.row(i)) row.push_back(num(v));
    out.push_back(std::move(row));
  }
  return out;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw Error(Errc::InvalidConfig, "matrix must be a nonempty array");
  const std::size_t rows = j.size();
  const std::size_t cols = j.front().is_array() ? j.front().size() : 0;
  if (cols == 0) throw Error(Errc::InvalidConfig, "matrix rows must be nonempty arrays");
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols) throw Error(Errc::RaggedRows, "ragged matrix row");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[i][c].is_number()) throw Error(Errc::InvalidConfig, "matrix entries must be numbers");
      m(i, c) = j[i][c].get<double>();
    }
  }
  return m;
}

Json to_json(const GenerativeConfig& c) {
  Json dict;
  if (const auto* id = std::get_if<IdentityTopDictionary>(&c.dictionary))
    dict = {{"kind", "identity_top"}, {"tau", id->tau}, {"seed", id->seed}};
  else
    dict = {{"kind", "explicit"}, {"W", to_json(std::get<ExplicitDictionary>(c.dictionary).W)}};
  return {{"F", c.F},           {"K", c.K},
          {"N", c.N},           {"sigma", c.sigma},
          {"latent", c.latent.to_string()}, {"dictionary", dict},
          {"seed", c.seed}};
}

GenerativeConfig generative_config_from_json(const Json& j) {
  only_keys(j, {"F", "K", "N", "sigma", "latent", "dictionary", "seed"}, "generative config");
  GenerativeConfig c;
  c.F = required<std::size_t>(j, "F");
  c.K = required<std::size_t>(j, "K");
  c.N = required<std::size_t>(j, "N");
  c.sigma = field<double>(j, "sigma", 0.0);
  c.latent = LatentLaw::parse(field<std::string>(j, "latent", "exponential:1"));
  c.seed = field<std::uint64_t>(j, "seed", 0);
  if (j.contains("dictionary")) {
    const Json& d = j.at("dictionary");
    only_keys(d, {"kind", "tau", "seed", "W"}, "dictionary");
    const auto kind = field<std::string>(d, "kind", "identity_top");
    if (kind == "identity_top") {
      c.dictionary = IdentityTopDictionary{field<double>(d, "tau", 0.1),
                                           field<std::uint64_t>(d, "seed", 0)};
    } else if (kind == "explicit") {
      if (!d.contains("W")) throw Error(Errc::InvalidConfig, "explicit dictionary needs 'W'");
      c.dictionary = ExplicitDictionary{matrix_from_json(d.at("W"))};
    } else {
      throw Error(Errc::InvalidConfig, "unknown dictionary kind '" + kind + "'");
    }
  }
  c.validate();
  return c;
}

Json to_json(const SweepConfig& c) {
  return {{"base", to_json(c.base)},   {"N_grid", c.N_grid},   {"trials", c.trials},
          {"lambda", c.lambda},        {"epsilon", c.epsilon}, {"seed_base", c.seed_base}};
}

SweepConfig sweep_config_from_json(const Json& j) {
  only_keys(j, {"base", "N_grid", "trials", "lambda", "epsilon", "seed_base"}, "sweep config");
  SweepConfig c;
  if (!j.contains("base")) throw Error(Errc::InvalidConfig, "missing field 'base'");
  Json base = j.at("base");
  // N is replaced by each grid point; accept a template without it.
  if (base.is_object() && !base.contains("N")) base["N"] = 2;
  c.base = generative_config_from_json(base);
  c.N_grid = required<std::vector<std::size_t>>(j, "N_grid");
  c.trials = field<std::size_t>(j, "trials", 20);
  c.lambda = field<double>(j, "lambda", 10.0);
  c.epsilon = field<double>(j, "epsilon", 1e-6);
  c.seed_base = field<std::uint64_t>(j, "seed_base", 0);
  c.validate();
  return c;
}

Json to_json(const TheoryReport& r) {
  return {
      {"F", r.F},
      {"K", r.K},
      {"k_index", indices(r.k_index)},
      {"alpha", vec(r.alpha)},
      {"kappa", num(r.kappa)},
      {"W1", to_json(r.W1)},
      {"W2", to_json(r.W2)},
      {"C_min", num(r.C_min)},
      {"D_max", num(r.D_max)},
      {"D_max_w1_norm", num(r.D_max_w1_norm)},
      {"irrepresentability", num(r.irrepresentability)},
      {"gamma", num(r.gamma)},
      {"m2_norm1", num(r.m2_norm1)},
      {"r_max", num(r.r_max)},
      {"r_min", num(r.r_min)},
      {"zeta", num(r.zeta)},
      {"zeta1", num(r.zeta1)},
      {"zeta2", num(r.zeta2)},
      {"l_lambda", num(r.l_lambda)},
      {"u_lambda", num(r.u_lambda)},
      {"N_bound", num(r.N_bound)},
      {"n_for_l_lambda", num(r.n_for_l_lambda)},
      {"W_max", num(r.W_max)},
      {"Delta", num(r.Delta)},
      {"M4", num(r.M4m)},
      {"M8", num(r.M8m)},
      {"M", num(r.Mm)},
      {"sigma", num(r.sigma)},
      {"delta", num(r.delta)},
      {"gamma_feasible", r.gamma_feasible()},
      {"c_min_positive", r.c_min_positive()},
      {"lambda_window_nonempty", r.lambda_window_nonempty()},
  };
}

Json to_json(const PerturbationReport& r) {
  return {
      {"C_min", num(r.C_min)},
      {"D_max", num(r.D_max)},
      {"gamma", num(r.gamma)},
      {"baseline_irrepresentability", num(r.baseline_irrepresentability)},
      {"eta", num(r.eta)},
      {"U_L", num(r.U_L)},
      {"U_Ybar", num(r.U_Ybar)},
      {"L_s_spectral", num(r.L_s_spectral)},
      {"bias_term", num(r.bias_term)},
      {"D_max_star", num(r.D_max_star)},
      {"conditions_met", {r.conditions_met[0], r.conditions_met[1], r.conditions_met[2]}},
      {"baseline_ok", r.baseline_ok},
      {"min_eig_perturbed", num(r.min_eig_perturbed)},
      {"irrepresentability_perturbed", num(r.irrepresentability_perturbed)},
      {"inverse_norm_perturbed", num(r.inverse_norm_perturbed)},
      {"conclusions_hold", {r.conclusions_hold[0], r.conclusions_hold[1], r.conclusions_hold[2]}},
  };
}

Json to_json(const EstimateResult& r) {
  return {
      {"K_hat", r.K_hat},
      {"row_norms", vec(r.row_norms)},
      {"lambda", num(r.lambda)},
      {"epsilon", num(r.epsilon)},
      {"relative_error", num(r.relative_error)},
      {"certified", r.certified},
      {"solver",
       {{"iterations", r.solution.iterations},
        {"converged", r.solution.converged},
        {"objective", num(r.solution.objective())},
        {"kkt_residual", num(r.solution.kkt_residual)},
        {"kkt_threshold", num(r.solution.kkt_threshold)},
        {"lipschitz", num(r.solution.lipschitz)}}},
  };
}

Json to_json(const MomentEstimate& m, bool include_matrix) {
  Json out = {
      {"F", m.m2_hat.rows()},
      {"n_samples", m.n_samples},
      {"path", m.path == MomentEstimate::Path::fast ? "fast" : "oracle"},
      {"contraction_s", vec(m.contraction_s)},
      {"contraction_t", vec(m.contraction_t)},
  };
  if (include_matrix) out["m2_hat"] = to_json(m.m2_hat);
  return out;
}

Json dataset_sidecar(const Dataset& d) {
  Json out = {{"F", d.V.rows()}, {"N", d.V.cols()}, {"prng", Philox4x32::algorithm}};
  out["K_true"] = d.K_true ? Json(*d.K_true) : Json(nullptr);
  out["config"] = d.config ? to_json(*d.config) : Json(nullptr);
  return out;
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(Errc::Parse, path.string() + ": " + e.what());
  }
}

void write_text(const std::string& text, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(Errc::Io, "write failed for " + path.string());
}

void write_json(const Json& j, const std::filesystem::path& path) {
  write_text(j.dump(2) + "\n", path);
}

}  // namespace nmfsel

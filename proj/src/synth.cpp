#include "nmfsel/synth.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "nmfsel/theory.hpp"

namespace nmfsel {

LatentLaw LatentLaw::parse(const std::string& text) {
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  double param = 1.0;
  if (colon != std::string::npos) {
    try {
      std::size_t used = 0;
      param = std::stod(text.substr(colon + 1), &used);
      if (used != text.size() - colon - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(Errc::InvalidConfig, "bad law parameter in '" + text + "'");
    }
  }
  if (!(param > 0.0) || !std::isfinite(param))
    throw Error(Errc::InvalidConfig, "law parameter must be positive in '" + text + "'");
  if (name == "exponential" || name == "exponential_centered") return exponential(param);
  if (name == "uniform" || name == "uniform_centered") return uniform(param);
  if (name == "gaussian") return gaussian(param);
  throw Error(Errc::InvalidConfig, "unknown latent law '" + name + "'");
}

std::string LatentLaw::to_string() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::exponential_centered: os << "exponential"; break;
    case Kind::uniform_centered: os << "uniform"; break;
    case Kind::gaussian: os << "gaussian"; break;
  }
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), param);
  os << ':' << std::string_view(buf.data(), static_cast<std::size_t>(res.ptr - buf.data()));
  return os.str();
}

double latent_moment(const LatentLaw& law, int p) {
  if (p < 1 || p > 8) throw Error(Errc::UnsupportedOrder, "moment order " + std::to_string(p));
  switch (law.kind) {
    case LatentLaw::Kind::exponential_centered: {
      // E[(X - 1/u)^p] for X ~ Exp(u) is !p / u^p (derangement numbers).
      constexpr std::array<double, 9> derangements{1, 0, 1, 2, 9, 44, 265, 1854, 14833};
      return derangements[p] / std::pow(law.param, p);
    }
    case LatentLaw::Kind::uniform_centered:
      return p % 2 ? 0.0 : std::pow(law.param, p) / (p + 1);
    case LatentLaw::Kind::gaussian: {
      if (p % 2) return 0.0;
      double dfact = 1.0;
      for (int k = p - 1; k > 1; k -= 2) dfact *= k;
      return dfact * std::pow(law.param, p);
    }
  }
  return 0.0;
}

double excess_kurtosis(const LatentLaw& law) {
  const double m2 = latent_moment(law, 2);
  return latent_moment(law, 4) - 3.0 * m2 * m2;
}

double sample_latent(const LatentLaw& law, PhiloxStream& rng) {
  switch (law.kind) {
    case LatentLaw::Kind::exponential_centered:
      return rng.exponential(law.param) - 1.0 / law.param;
    case LatentLaw::Kind::uniform_centered:
      return law.param * (2.0 * rng.uniform() - 1.0);
    case LatentLaw::Kind::gaussian:
      return law.param * rng.normal();
  }
  return 0.0;
}

void GenerativeConfig::validate() const {
  if (F == 0 || K == 0 || N == 0) throw Error(Errc::InvalidConfig, "F, K and N must be positive");
  if (K > F) throw Error(Errc::InvalidConfig, "K must not exceed F");
  if (!(sigma >= 0.0) || !std::isfinite(sigma))
    throw Error(Errc::InvalidConfig, "sigma must be a finite nonnegative number");
  if (!(latent.param > 0.0) || !std::isfinite(latent.param))
    throw Error(Errc::InvalidConfig, "latent law parameter must be positive");
  if (const auto* id = std::get_if<IdentityTopDictionary>(&dictionary)) {
    if (!(id->tau > 0.0) || !std::isfinite(id->tau))
      throw Error(Errc::InvalidConfig, "tau must be positive");
  } else {
    const Matrix& W = std::get<ExplicitDictionary>(dictionary).W;
    if (W.rows() != F || W.cols() != K)
      throw Error(Errc::InvalidConfig, "explicit dictionary must be F x K");
    for (std::size_t k = 0; k < K; ++k) {
      double colsum = 0.0;
      for (std::size_t f = 0; f < F; ++f) {
        if (!(W(f, k) >= 0.0) || !std::isfinite(W(f, k)))
          throw Error(Errc::InvalidConfig, "explicit dictionary must be entrywise nonnegative");
        colsum += W(f, k);
      }
      if (colsum == 0.0) throw Error(Errc::InvalidConfig, "explicit dictionary has a zero column");
    }
  }
}

Matrix build_dictionary(const GenerativeConfig& config) {
  config.validate();
  if (const auto* ex = std::get_if<ExplicitDictionary>(&config.dictionary)) return ex->W;
  const auto& id = std::get<IdentityTopDictionary>(config.dictionary);
  Matrix W(config.F, config.K);
  for (std::size_t k = 0; k < config.K; ++k) W(k, k) = 1.0;
  PhiloxStream rng(id.seed, stream_id(StreamTag::dictionary, 0));
  for (std::size_t f = config.K; f < config.F; ++f)
    for (std::size_t k = 0; k < config.K; ++k) W(f, k) = id.tau * rng.uniform();
  return W;
}

Dataset generate(const GenerativeConfig& config) {
  Matrix W = build_dictionary(config);
  const std::size_t F = config.F, K = config.K, N = config.N;
  Matrix H(K, N);
  Matrix V(F, N);
  const auto cols = static_cast<std::ptrdiff_t>(N);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t n = 0; n < cols; ++n) {
    PhiloxStream latent(config.seed, stream_id(StreamTag::latent, n));
    for (std::size_t k = 0; k < K; ++k) H(k, n) = sample_latent(config.latent, latent);
    PhiloxStream noise(config.seed, stream_id(StreamTag::noise, n));
    for (std::size_t f = 0; f < F; ++f) {
      double v = 0.0;
      for (std::size_t k = 0; k < K; ++k) v += W(f, k) * H(k, n);
      if (config.sigma > 0.0) v += config.sigma * noise.normal();
      V(f, n) = v;
    }
  }
  Dataset d;
  d.V = std::move(V);
  d.W_true = std::move(W);
  d.H_true = std::move(H);
  d.K_true = K;
  d.config = config;
  return d;
}

double calibrate_tau(std::size_t F, std::size_t K, std::uint64_t seed, double gamma_target) {
  if (!(gamma_target > 0.0 && gamma_target <= 1.0))
    throw Error(Errc::InvalidConfig, "gamma_target must lie in (0, 1]");
  if (K == 0 || K > F) throw Error(Errc::InvalidConfig, "need 0 < K <= F");
  if (K == F) return 1.0;

  const IndexSet k_index = IndexSet::range(0, K);
  const auto feasible = [&](int grid) {
    GenerativeConfig cfg;
    cfg.F = F;
    cfg.K = K;
    cfg.N = 1;
    cfg.dictionary = IdentityTopDictionary{grid * 1e-3, seed};
    const Matrix W = build_dictionary(cfg);
    return irrepresentability(W, k_index, LatentLaw::exponential(1.0)) <= 1.0 - gamma_target;
  };

  // The constraint is monotone in tau for this construction, so bisect the grid.
  if (feasible(1000)) return 1.0;
  if (!feasible(1)) throw Error(Errc::NoFeasibleTau, "no tau >= 1e-3 meets the target");
  int lo = 1, hi = 1000;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    (feasible(mid) ? lo : hi) = mid;
  }
  return lo * 1e-3;
}

namespace {

// A straight limb: start pixel, unit step and length. Lengths depend on the
// angle as they would for rasterized segments, so image totals vary with the
// pose.
struct Segment {
  int r0, c0, dr, dc;
  std::size_t length;
};

// Left-side limbs; the right side mirrors the column index.
constexpr std::array<Segment, 4> kArm{{
    {5, 4, -1, -1, 4},
    {6, 4, 0, -1, 5},
    {7, 4, 1, -1, 4},
    {3, 4, -1, 0, 3},
}};
constexpr std::array<Segment, 4> kLeg{{
    {14, 4, 1, 0, 5},
    {14, 3, 1, -1, 4},
    {13, 4, 0, -1, 3},
    {15, 3, 1, -1, 4},
}};
constexpr std::size_t kTorsoCol = 5;
constexpr std::size_t kTorsoTop = 4;
constexpr std::size_t kTorsoBottom = 13;

}  // namespace

std::vector<std::size_t> swimmer_torso() {
  std::vector<std::size_t> px;
  for (std::size_t r = kTorsoTop; r <= kTorsoBottom; ++r) px.push_back(swimmer_pixel(r, kTorsoCol));
  return px;
}

std::vector<std::size_t> swimmer_limb(std::size_t limb, std::size_t pos) {
  if (limb >= SwimmerGeometry::limbs || pos >= SwimmerGeometry::positions)
    throw Error(Errc::InvalidConfig, "limb/position out of range");
  const Segment& seg = (limb < 2 ? kArm : kLeg)[pos];
  const bool mirror = limb % 2 == 1;
  std::vector<std::size_t> px;
  for (std::size_t k = 0; k < seg.length; ++k) {
    const auto r = static_cast<std::size_t>(seg.r0 + seg.dr * static_cast<int>(k));
    const auto c = static_cast<std::size_t>(seg.c0 + seg.dc * static_cast<int>(k));
    px.push_back(swimmer_pixel(r, mirror ? SwimmerGeometry::width - 1 - c : c));
  }
  return px;
}

Dataset swimmer() {
  constexpr std::size_t F = SwimmerGeometry::height * SwimmerGeometry::width;
  constexpr std::size_t N = 256;
  Matrix V(F, N);
  const auto torso = swimmer_torso();
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t p : torso) V(p, n) = 1.0;
    for (std::size_t limb = 0; limb < SwimmerGeometry::limbs; ++limb) {
      const std::size_t pos = (n >> (2 * (SwimmerGeometry::limbs - 1 - limb))) & 3u;
      for (std::size_t p : swimmer_limb(limb, pos)) V(p, n) = 1.0;
    }
  }
  Dataset d;
  d.V = std::move(V);
  d.K_true = SwimmerGeometry::limbs * SwimmerGeometry::positions;
  return d;
}

void export_pgm(const Matrix& V, std::size_t height, std::size_t width,
                const std::filesystem::path& dir) {
  if (V.rows() != height * width)
    throw Error(Errc::ShapeMismatch, "column length " + std::to_string(V.rows()) +
                                         " is not " + std::to_string(height) + "x" +
                                         std::to_string(width));
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::Io, "cannot create " + dir.string());
  for (std::size_t n = 0; n < V.cols(); ++n) {
    char name[32];
    std::snprintf(name, sizeof(name), "img_%04zu.pgm", n);
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error(Errc::Io, "cannot write " + (dir / name).string());
    out << "P5\n" << width << ' ' << height << "\n255\n";
    std::string bytes(height * width, '\0');
    for (std::size_t r = 0; r < height; ++r)
      for (std::size_t c = 0; c < width; ++c) {
        const double v = std::clamp(V(c * height + r, n), 0.0, 1.0);
        bytes[r * width + c] = static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * v)));
      }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(Errc::Io, "write failed for " + (dir / name).string());
  }
}

PgmHeader read_pgm_header(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + file.string());
  std::string magic;
  PgmHeader h;
  in >> magic >> h.width >> h.height >> h.maxval;
  if (!in || magic != "P5") throw Error(Errc::Parse, "not a binary PGM: " + file.string());
  return h;
}

}  // namespace nmfsel

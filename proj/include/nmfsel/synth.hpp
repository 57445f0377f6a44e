#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>

#include "nmfsel/matrix.hpp"
#include "nmfsel/philox.hpp"

namespace nmfsel {

/// Centered law of each latent coordinate h_k.
struct LatentLaw {
  enum class Kind { exponential_centered, uniform_centered, gaussian };
  Kind kind = Kind::exponential_centered;
  /// Rate u for exponential_centered, half-width a for uniform_centered,
  /// standard deviation s for gaussian.
  double param = 1.0;

  static LatentLaw exponential(double rate) { return {Kind::exponential_centered, rate}; }
  static LatentLaw uniform(double half_width) { return {Kind::uniform_centered, half_width}; }
  static LatentLaw gaussian(double stddev) { return {Kind::gaussian, stddev}; }

  /// "exponential:1", "uniform:1.5", "gaussian:1".
  static LatentLaw parse(const std::string& text);
  std::string to_string() const;
};

/// Closed-form raw moment E[h^p], p in 1..8. Throws UnsupportedOrder otherwise.
double latent_moment(const LatentLaw& law, int p);

/// Fourth cumulant m4 - 3 m2^2 of the law.
double excess_kurtosis(const LatentLaw& law);

/// Draws one centered latent value.
double sample_latent(const LatentLaw& law, PhiloxStream& rng);

struct IdentityTopDictionary {
  double tau = 0.1;
  std::uint64_t seed = 0;
};

struct ExplicitDictionary {
  Matrix W;
};

using DictionarySpec = std::variant<IdentityTopDictionary, ExplicitDictionary>;

struct GenerativeConfig {
  std::size_t F = 0;
  std::size_t K = 0;
  std::size_t N = 0;
  double sigma = 0.0;
  LatentLaw latent;
  DictionarySpec dictionary = IdentityTopDictionary{};
  std::uint64_t seed = 0;

  /// Throws InvalidConfig on any violated invariant.
  void validate() const;
};

struct Dataset {
  Matrix V;
  std::optional<Matrix> W_true;
  std::optional<Matrix> H_true;
  std::optional<std::size_t> K_true;
  std::optional<GenerativeConfig> config;
};

/// W = [I_K; tau * W_c] with W_c uniform on [0, 1), drawn from the dictionary
/// stream of `seed`, or the explicit matrix after validation.
Matrix build_dictionary(const GenerativeConfig& config);

/// V = W H + Z with per-column Philox streams, so column n depends only on
/// (seed, n) and growing N keeps earlier columns unchanged.
Dataset generate(const GenerativeConfig& config);

/// Largest tau on a 1e-3 grid in (0, 1] with ||W2 W1^{-1}||_inf <= 1 - gamma_target
/// for the identity-top dictionary of (F, K, seed) and index set {0..K-1}.
double calibrate_tau(std::size_t F, std::size_t K, std::uint64_t seed, double gamma_target);

struct SwimmerGeometry {
  static constexpr std::size_t height = 20;
  static constexpr std::size_t width = 11;
  static constexpr std::size_t limbs = 4;
  static constexpr std::size_t positions = 4;
};

/// Linear pixel index of (row, col) in a column-major flattened image.
constexpr std::size_t swimmer_pixel(std::size_t r, std::size_t c) {
  return c * SwimmerGeometry::height + r;
}

/// Pixel indices of the torso and of limb `limb` in position `pos`.
std::vector<std::size_t> swimmer_torso();
std::vector<std::size_t> swimmer_limb(std::size_t limb, std::size_t pos);

/// 256 binary 20x11 images, column n = sum over limbs of the limb mask for
/// position digit (n base 4, limb 0 most significant) plus the torso.
Dataset swimmer();

/// One binary P5 PGM per column; 0 -> 0, anything positive -> 255.
void export_pgm(const Matrix& V, std::size_t height, std::size_t width,
                const std::filesystem::path& dir);

struct PgmHeader {
  std::size_t width = 0;
  std::size_t height = 0;
  int maxval = 0;
};
PgmHeader read_pgm_header(const std::filesystem::path& file);

}  // namespace nmfsel

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace nmfsel {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11). A 64-bit key
/// and a 128-bit counter map to four 32-bit outputs; streams are addressed by
/// counter words, so any entry of a generated matrix is reproducible on its own.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr const char* algorithm = "philox4x32-10";

  static constexpr Counter block(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += 0x9E3779B9u;
        key[1] += 0xBB67AE85u;
      }
      const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }
};

/// Sequential view of one Philox stream: key = seed, counter = (stream_lo,
/// stream_hi, block_lo, block_hi). Each block yields two 53-bit uniforms.
class PhiloxStream {
 public:
  PhiloxStream(std::uint64_t seed, std::uint64_t stream) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  /// Uniform on [0, 1).
  double uniform() noexcept {
    if (pos_ == 2) refill();
    return buf_[pos_++];
  }

  double exponential(double rate) noexcept { return -std::log1p(-uniform()) / rate; }

  /// Standard normal by Box-Muller; both variates of a pair are used.
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log1p(-u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  void refill() noexcept {
    const auto out = Philox4x32::block(
        {static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32),
         static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32)},
        key_);
    ++counter_;
    constexpr double scale = 1.0 / 9007199254740992.0;  // 2^-53
    const auto u53 = [](std::uint32_t hi, std::uint32_t lo) {
      return ((std::uint64_t{hi} << 32 | lo) >> 11);
    };
    buf_[0] = static_cast<double>(u53(out[0], out[1])) * scale;
    buf_[1] = static_cast<double>(u53(out[2], out[3])) * scale;
    pos_ = 0;
  }

  Philox4x32::Key key_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<double, 2> buf_{};
  int pos_ = 2;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Stream identifiers: the top byte tags what is being drawn, the rest is an
/// index (a column of H, a column of Z, ...).
enum class StreamTag : std::uint64_t {
  dictionary = 1,
  latent = 2,
  noise = 3,
  subset_search = 4,
  test = 0xFF,
};

constexpr std::uint64_t stream_id(StreamTag tag, std::uint64_t index) noexcept {
  return (static_cast<std::uint64_t>(tag) << 56) | (index & 0x00FF'FFFF'FFFF'FFFFull);
}

}  // namespace nmfsel

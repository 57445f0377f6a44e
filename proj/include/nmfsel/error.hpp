#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nmfsel {

enum class Errc {
  Io,
  Parse,
  RaggedRows,
  NotSquare,
  NotSymmetric,
  DimensionMismatch,
  UnsupportedOrder,
  InvalidConfig,
  NoFeasibleTau,
  ShapeMismatch,
  TooFewSamples,
  NonFinite,
  DimensionTooLarge,
  DegenerateKurtosis,
  ZeroColumn,
  NotConverged,
  EmptySupportWithNonzeroRows,
  SingularGram,
  RankDeficient,
  SingularBlock,
  InfeasibleGamma,
};

std::string_view to_string(Errc code) noexcept;

/// Every failure raised by the library carries one of the Errc kinds; the CLI
/// prints the kind name and maps it to exit code 2.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace nmfsel

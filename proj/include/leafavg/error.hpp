#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace leafavg {

enum class ErrorKind {
  DimensionMismatch,
  NotHomogeneous,
  ParseError,
  NonOrthogonalGenerator,
  GroupTooLarge,
  NotCartanMunzner,
  OffSphere,
  NearSingularLeaf,
  EffectiveSampleTooSmall,
  IllConditionedFit,
  BasisDeficient,
  IdentityViolation,
  RankUnstable,
  GenerationGap,
  InsufficientDistinctPairs,
  RequiresRationalMode,
  ConfigError,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NotHomogeneous: return "NotHomogeneous";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::NonOrthogonalGenerator: return "NonOrthogonalGenerator";
    case ErrorKind::GroupTooLarge: return "GroupTooLarge";
    case ErrorKind::NotCartanMunzner: return "NotCartanMunzner";
    case ErrorKind::OffSphere: return "OffSphere";
    case ErrorKind::NearSingularLeaf: return "NearSingularLeaf";
    case ErrorKind::EffectiveSampleTooSmall: return "EffectiveSampleTooSmall";
    case ErrorKind::IllConditionedFit: return "IllConditionedFit";
    case ErrorKind::BasisDeficient: return "BasisDeficient";
    case ErrorKind::IdentityViolation: return "IdentityViolation";
    case ErrorKind::RankUnstable: return "RankUnstable";
    case ErrorKind::GenerationGap: return "GenerationGap";
    case ErrorKind::InsufficientDistinctPairs: return "InsufficientDistinctPairs";
    case ErrorKind::RequiresRationalMode: return "RequiresRationalMode";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the ErrorKind tags so
/// callers (and the CLI exit-code mapping) can dispatch without string
/// matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) throw Error(kind, what);
}

}  // namespace leafavg

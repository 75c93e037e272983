#ifndef AFFCALC_ERROR_HPP
#define AFFCALC_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace affcalc {

enum class ErrorKind {
  NotAProbability,
  BadParameter,
  EmptySample,
  DomainMismatch,
  ParseError,
  EvaluationFailure,
  NonFiniteDerivative,
  NoBracket,
  NotViable,
  ZeroMarginal,
  NoConvergence,
  DegenerateVariance,
};

constexpr std::string_view error_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotAProbability: return "NotAProbability";
    case ErrorKind::BadParameter: return "BadParameter";
    case ErrorKind::EmptySample: return "EmptySample";
    case ErrorKind::DomainMismatch: return "DomainMismatch";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::EvaluationFailure: return "EvaluationFailure";
    case ErrorKind::NonFiniteDerivative: return "NonFiniteDerivative";
    case ErrorKind::NoBracket: return "NoBracket";
    case ErrorKind::NotViable: return "NotViable";
    case ErrorKind::ZeroMarginal: return "ZeroMarginal";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::DegenerateVariance: return "DegenerateVariance";
  }
  return "Unknown";
}

// Input problems (bad data or parameters) as opposed to numerical failures.
constexpr bool is_validation_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotAProbability:
    case ErrorKind::BadParameter:
    case ErrorKind::EmptySample:
    case ErrorKind::DomainMismatch:
    case ErrorKind::ParseError:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::string_view name() const noexcept { return error_name(kind_); }

 private:
  ErrorKind kind_;
};

}  // namespace affcalc

#endif  // AFFCALC_ERROR_HPP

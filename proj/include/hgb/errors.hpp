#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hgb {

enum class ErrorKind {
  DivisionByZero,
  NotAMultiple,
  ConductorMismatch,
  InvalidExponent,
  NotIrreducible,
  NotRegular,
  NotConfluent,
  PreconditionViolated,
  NoIsomorphism,
  Reducible,
  Obstructed,
  NotInvertible,
  EpsilonTooLarge,
  ResonantExponents,
  PrecisionUnreachable,
  MatchIllConditioned,
  ShapeViolation,
  ParseError,
};

constexpr std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::DivisionByZero: return "DivisionByZero";
    case ErrorKind::NotAMultiple: return "NotAMultiple";
    case ErrorKind::ConductorMismatch: return "ConductorMismatch";
    case ErrorKind::InvalidExponent: return "InvalidExponent";
    case ErrorKind::NotIrreducible: return "NotIrreducible";
    case ErrorKind::NotRegular: return "NotRegular";
    case ErrorKind::NotConfluent: return "NotConfluent";
    case ErrorKind::PreconditionViolated: return "PreconditionViolated";
    case ErrorKind::NoIsomorphism: return "NoIsomorphism";
    case ErrorKind::Reducible: return "Reducible";
    case ErrorKind::Obstructed: return "Obstructed";
    case ErrorKind::NotInvertible: return "NotInvertible";
    case ErrorKind::EpsilonTooLarge: return "EpsilonTooLarge";
    case ErrorKind::ResonantExponents: return "ResonantExponents";
    case ErrorKind::PrecisionUnreachable: return "PrecisionUnreachable";
    case ErrorKind::MatchIllConditioned: return "MatchIllConditioned";
    case ErrorKind::ShapeViolation: return "ShapeViolation";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Numeric failures map to CLI exit code 3, everything else structural.
constexpr bool is_numeric(ErrorKind k) {
  return k == ErrorKind::PrecisionUnreachable || k == ErrorKind::MatchIllConditioned ||
         k == ErrorKind::ShapeViolation || k == ErrorKind::ResonantExponents;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace hgb

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace polya {

enum class ErrorCode {
  DisconnectedGraph,
  NegativeWeight,
  IsolatedVertex,
  DuplicateEdge,
  InvalidIndex,
  NonPositiveGamma,
  NoConvergence,
  DomainError,
  DimensionMismatch,
  EmptyHistory,
  TooEarly,
  InvalidRegimeParams,
  RegimeMismatch,
  InsufficientData,
  NonPositiveValue,
  EqualHypotheses,
  OutOfRange,
  ParseError,
  ValidationError,
  InsufficientReplications,
  ResourceLimit,
  AssertionFailure,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so that
/// callers (and the CLI exit-code mapping) can branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace polya

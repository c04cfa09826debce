#include "polya/error.hpp"

namespace polya {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DisconnectedGraph: return "DisconnectedGraph";
    case ErrorCode::NegativeWeight: return "NegativeWeight";
    case ErrorCode::IsolatedVertex: return "IsolatedVertex";
    case ErrorCode::DuplicateEdge: return "DuplicateEdge";
    case ErrorCode::InvalidIndex: return "InvalidIndex";
    case ErrorCode::NonPositiveGamma: return "NonPositiveGamma";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyHistory: return "EmptyHistory";
    case ErrorCode::TooEarly: return "TooEarly";
    case ErrorCode::InvalidRegimeParams: return "InvalidRegimeParams";
    case ErrorCode::RegimeMismatch: return "RegimeMismatch";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::NonPositiveValue: return "NonPositiveValue";
    case ErrorCode::EqualHypotheses: return "EqualHypotheses";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::InsufficientReplications: return "InsufficientReplications";
    case ErrorCode::ResourceLimit: return "ResourceLimit";
    case ErrorCode::AssertionFailure: return "AssertionFailure";
  }
  return "Unknown";
}

}  // namespace polya

#include "subord/error.hpp"

namespace subord {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ParameterOutOfRange: return "ParameterOutOfRange";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::NonDifferentiable: return "NonDifferentiable";
    case ErrorCode::ToleranceNotMet: return "ToleranceNotMet";
    case ErrorCode::NonIntegrableTail: return "NonIntegrableTail";
    case ErrorCode::AtomLimitUndefined: return "AtomLimitUndefined";
    case ErrorCode::NoClosedForm: return "NoClosedForm";
    case ErrorCode::NonDecayingSymbol: return "NonDecayingSymbol";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::IllConditionedEigenbasis: return "IllConditionedEigenbasis";
    case ErrorCode::NotBounded: return "NotBounded";
    case ErrorCode::NoDecay: return "NoDecay";
    case ErrorCode::Divergent: return "Divergent";
    case ErrorCode::Inapplicable: return "Inapplicable";
    case ErrorCode::NotSectorial: return "NotSectorial";
    case ErrorCode::LowerBoundFails: return "LowerBoundFails";
    case ErrorCode::UpperBoundFails: return "UpperBoundFails";
    case ErrorCode::WindowViolated: return "WindowViolated";
    case ErrorCode::BoundFails: return "BoundFails";
    case ErrorCode::Undecidable: return "Undecidable";
    case ErrorCode::ConfigParseError: return "ConfigParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace subord

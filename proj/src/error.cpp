#include "llcoach/error.hpp"

namespace llcoach {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Io: return "Io";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::EmptyDomain: return "EmptyDomain";
    case ErrorKind::MissingRole: return "MissingRole";
    case ErrorKind::UnknownWaypoint: return "UnknownWaypoint";
    case ErrorKind::UnknownSubject: return "UnknownSubject";
    case ErrorKind::DuplicateSubject: return "DuplicateSubject";
    case ErrorKind::DuplicateActionId: return "DuplicateActionId";
    case ErrorKind::UndeclaredVariable: return "UndeclaredVariable";
    case ErrorKind::DimMismatch: return "DimMismatch";
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::EmptyIndex: return "EmptyIndex";
    case ErrorKind::ProviderError: return "ProviderError";
    case ErrorKind::UnresolvedPlaceholder: return "UnresolvedPlaceholder";
    case ErrorKind::MissingScenarioBlock: return "MissingScenarioBlock";
    case ErrorKind::MissingAdviceBlock: return "MissingAdviceBlock";
    case ErrorKind::CardinalityMismatch: return "CardinalityMismatch";
    case ErrorKind::ReplayMiss: return "ReplayMiss";
    case ErrorKind::NetworkForbidden: return "NetworkForbidden";
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::UnknownAction: return "UnknownAction";
    case ErrorKind::UnknownAgent: return "UnknownAgent";
    case ErrorKind::ArgMismatch: return "ArgMismatch";
    case ErrorKind::DisallowedAction: return "DisallowedAction";
    case ErrorKind::SelfJoin: return "SelfJoin";
    case ErrorKind::EmptyPlan: return "EmptyPlan";
    case ErrorKind::InvalidInputPlan: return "InvalidInputPlan";
    case ErrorKind::InvalidPlan: return "InvalidPlan";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::DuplicateFrameId: return "DuplicateFrameId";
    case ErrorKind::EmptyLibrary: return "EmptyLibrary";
    case ErrorKind::KTooLarge: return "KTooLarge";
    case ErrorKind::EmptyScenarios: return "EmptyScenarios";
  }
  return "Unknown";
}

}  // namespace llcoach

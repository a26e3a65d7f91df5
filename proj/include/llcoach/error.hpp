#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace llcoach {

enum class ErrorKind {
  InvalidArgument,
  Io,
  ParseError,
  // domain
  EmptyDomain,
  MissingRole,
  UnknownWaypoint,
  UnknownSubject,
  DuplicateSubject,
  // action store
  DuplicateActionId,
  UndeclaredVariable,
  DimMismatch,
  ZeroVector,
  EmptyIndex,
  ProviderError,
  // coach
  UnresolvedPlaceholder,
  MissingScenarioBlock,
  MissingAdviceBlock,
  CardinalityMismatch,
  ReplayMiss,
  NetworkForbidden,
  // plans
  SyntaxError,
  UnknownAction,
  UnknownAgent,
  ArgMismatch,
  DisallowedAction,
  SelfJoin,
  EmptyPlan,
  InvalidInputPlan,
  InvalidPlan,
  // executor
  ConfigInvalid,
  EmptyInput,
  // library
  DuplicateFrameId,
  EmptyLibrary,
  KTooLarge,
  EmptyScenarios,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library. `kind()` is the stable, testable part;
/// the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind),
        detail_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// The message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace llcoach

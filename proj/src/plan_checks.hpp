#pragma once

// Structural plan checks shared by the parser (which throws on the first
// problem) and the validator (which reports them all).

#include <optional>
#include <string>
#include <vector>

#include "llcoach/error.hpp"
#include "llcoach/plan.hpp"

namespace llcoach::detail {

struct ActionIssue {
  ErrorKind error;
  ViolationKind violation;
  std::string subject;
  std::string message;
};

/// Unknown action / agent, role permission, and argument names and value
/// domains, in that order. An unknown action suppresses the later checks.
std::vector<ActionIssue> check_action(const GroundedAction& action, const ActionCatalog& catalog,
                                      const Domain& domain);

/// Reorders `action.args` into the schema's declaration order.
void order_args(GroundedAction& action, const ActionSchema& schema);

/// First agent appearing more than once in the step, if any.
std::optional<std::string> duplicate_agent(const PlanStep& step);

}  // namespace llcoach::detail

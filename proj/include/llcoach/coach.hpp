#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "llcoach/action_store.hpp"
#include "llcoach/chat.hpp"
#include "llcoach/domain.hpp"

namespace llcoach {

struct CoachOutput {
  Scenario scenario;
  std::string advice;
};

struct CoachPromptInputs {
  const Domain* domain = nullptr;
  std::vector<ActionSchema> retrieved_actions;
  PlanningGoal goal = default_planning_goal();
  Tactics tactics;
  /// Few-shot example of a SCENARIO block; defaults to the bundled one.
  std::optional<std::string> example_output;
  std::optional<std::string> image_ref;
  /// Template text (`[SYSTEM]` / `[USER]` sections); defaults to the bundled one.
  std::optional<std::string> template_text;
};

/// Two-task coach prompt: scenario description then high-level advice.
/// Throws InvalidArgument (no retrieved actions), UnresolvedPlaceholder.
ChatRequest build_coach_prompt(const CoachPromptInputs& inputs);

/// Bullet list of roles, each followed by the subset of its allowed actions
/// that was retrieved.
std::string describe_roles(const Domain& domain, const std::vector<ActionSchema>& actions);
/// `TOKEN: description` per waypoint.
std::string describe_waypoints(const Domain& domain);
/// The action ids on one line, then `- id: description` per action.
std::string describe_actions(const std::vector<ActionSchema>& actions);

/// Reads the lines after `SCENARIO:` up to the next blank line or section
/// header. Throws MissingScenarioBlock, UnknownWaypoint, UnknownSubject,
/// DuplicateSubject, ParseError.
Scenario parse_scenario_block(std::string_view response, const Domain& domain);

/// Everything after the first `COACH ADVICE:` header, trimmed.
/// Throws MissingAdviceBlock.
std::string parse_advice_block(std::string_view response);

CoachOutput parse_coach_response(std::string_view response, const Domain& domain);

/// Maps own-team agents to the roles of `scenario` by minimum-cost one-to-one
/// matching (cost = distance from the agent to the role's waypoint).
/// Throws CardinalityMismatch.
std::map<std::string, std::string> retrieve_roles(const WorldState& world,
                                                  const Scenario& scenario,
                                                  const Domain& domain);

/// Returns `world` with the given agent -> role mapping applied.
WorldState assign_roles(WorldState world, const std::map<std::string, std::string>& roles);

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method).
/// Returns, for each row, the assigned column.
std::vector<std::size_t> solve_assignment(const std::vector<std::vector<double>>& cost);

}  // namespace llcoach

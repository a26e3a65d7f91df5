#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "llcoach/action_store.hpp"
#include "llcoach/chat.hpp"
#include "llcoach/domain.hpp"

namespace llcoach {

struct GroundedAction {
  std::string action_id;
  std::string agent_id;  // role name
  /// Upper-cased argument names; parse_plan orders them as the schema declares.
  std::vector<std::pair<std::string, std::string>> args;

  const std::string* arg(std::string_view name) const;

  friend bool operator==(const GroundedAction&, const GroundedAction&) = default;
};

enum class StepKind { Single, Join };

struct PlanStep {
  StepKind kind = StepKind::Single;
  std::vector<GroundedAction> actions;

  static PlanStep single(GroundedAction action);
  static PlanStep join(std::vector<GroundedAction> actions);

  friend bool operator==(const PlanStep&, const PlanStep&) = default;
};

struct PlanProvenance {
  std::string frame_id;
  std::string advice_hash;

  friend bool operator==(const PlanProvenance&, const PlanProvenance&) = default;
};

struct Plan {
  std::vector<PlanStep> steps;
  PlanProvenance provenance;

  std::size_t action_count() const;

  friend bool operator==(const Plan&, const Plan&) = default;
};

struct ParseOptions {
  /// Raise SelfJoin while parsing instead of leaving it to validate_plan.
  bool strict_join = false;
};

/// Parses the plan surface syntax
///
///     plan   := line+
///     line   := join | action
///     join   := 'JOIN' '{' action (',' action)+ '}'
///     action := ACTION_ID AGENT_ID '{' (KEY ':' VALUE (',' KEY ':' VALUE)*)? '}'
///
/// Keys and values may be quoted with ' or ". Keys are upper-cased. `#` starts
/// a comment. Every step must begin on its own line; nested JOINs are
/// rejected. Names are resolved against `catalog` and `domain`.
///
/// Throws SyntaxError, UnknownAction, UnknownAgent, ArgMismatch,
/// DisallowedAction, SelfJoin (strict only), EmptyPlan.
Plan parse_plan(std::string_view text, const ActionCatalog& catalog, const Domain& domain,
                ParseOptions options = {});

/// Canonical surface syntax, one step per line.
std::string serialize_plan(const Plan& plan);
std::string serialize_action(const GroundedAction& action);

// ---- STRIPS simulation -----------------------------------------------------

/// A ground atom, e.g. `at(STRIKER, KICKING_POSITION)`.
struct Fact {
  PredicateName name = PredicateName::At;
  std::vector<std::string> args;

  std::string to_string() const;

  friend bool operator==(const Fact&, const Fact&) = default;
  friend auto operator<=>(const Fact&, const Fact&) = default;
};

/// Parses `name(arg,...)` with ground arguments. Throws ParseError.
Fact parse_fact(std::string_view text);

/// Set of ground facts. `at(agent, ·)` holds at most one location per agent
/// and the ball (ball_at / ball_held_by) has at most one fact; inserting a
/// fact replaces the previous value of its fluent.
class SimState {
 public:
  SimState() = default;
  /// Throws InvalidArgument if the facts assign a fluent twice.
  explicit SimState(const std::vector<Fact>& facts);

  bool holds(const Fact& fact) const { return facts_.contains(fact); }
  void insert(const Fact& fact);
  void erase(const Fact& fact) { facts_.erase(fact); }
  const std::set<Fact>& facts() const { return facts_; }

  friend bool operator==(const SimState&, const SimState&) = default;

 private:
  std::set<Fact> facts_;
};

/// Fact file: one ground fact per line, `#` comments.
SimState parse_state(std::string_view text, std::string_view source = "<state>");
std::string serialize_state(const SimState& state);

/// Facts implied by a scenario: at(role, waypoint) for own roles; the ball
/// is held by the first own role sharing its waypoint, else ball_at.
SimState initial_state_from_scenario(const Scenario& scenario, const Domain& domain);

/// Identifies the fluent a fact assigns; facts with equal keys cannot
/// coexist ("ball", "at:<agent>", or the fact itself).
std::string fluent_key(const Fact& fact);

struct GroundedCondition {
  Fact fact;
  bool required = true;  // false for a negated precondition

  std::string to_string() const;
};

struct GroundedEffects {
  std::vector<GroundedCondition> preconditions;  // schema order
  std::vector<Fact> adds;
  std::vector<Fact> deletes;
};

/// Substitutes ?AGENT and declared args. Throws ArgMismatch when an arg is
/// missing.
Fact ground(const Predicate& predicate, const GroundedAction& action);
GroundedEffects ground(const ActionSchema& schema, const GroundedAction& action);

/// Applies a single action: deletes, then adds.
void apply(SimState& state, const GroundedEffects& effects);

/// True when the action's effects delete ball_held_by(acting agent).
bool releases_ball(const GroundedEffects& effects, std::string_view agent);

enum class ViolationKind {
  UnknownAction,
  UnknownAgent,
  DisallowedAction,
  ArgMismatch,
  SelfJoin,
  PreconditionFailed,
  PassedBall,
  EffectConflict,
};

std::string_view to_string(ViolationKind kind);

struct Violation {
  std::size_t step = 0;    // 1-based
  std::size_t action = 0;  // 0-based index within the step
  ViolationKind kind = ViolationKind::PreconditionFailed;
  std::string subject;  // offending fact / name
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationReport {
  std::vector<Violation> violations;
  SimState final_state;

  bool ok() const { return violations.empty(); }
  /// `STEP <i>: <violation text>` per violation.
  std::string to_lines() const;
  /// Human-readable summary.
  std::string to_text() const;
};

/// Step-by-step STRIPS simulation. SINGLE: preconditions against the current
/// state, then effects. JOIN: every member's preconditions against the
/// pre-step state; effect sets must not conflict; effects applied as a union.
/// Steps with structural violations are reported and skipped. Violations are
/// collected, never thrown.
ValidationReport validate_plan(const Plan& plan, const ActionCatalog& catalog,
                               const Domain& domain, const SimState& initial);

/// Greedily merges maximal runs of consecutive SINGLE steps into JOINs when
/// agents are pairwise distinct and the actions do not interfere.
/// Throws InvalidInputPlan when `plan` does not validate cleanly.
Plan auto_parallelize(const Plan& plan, const ActionCatalog& catalog, const Domain& domain,
                      const SimState& initial);

/// True when neither action's effects touch the other's preconditions or
/// effects (compared by fluent).
bool independent(const GroundedEffects& a, std::string_view agent_a, const GroundedEffects& b,
                 std::string_view agent_b);

// ---- prompts -------------------------------------------------------------

struct GroundingPromptInputs {
  const Domain* domain = nullptr;
  std::vector<ActionSchema> retrieved_actions;
  PlanningGoal goal = default_planning_goal();
  Scenario scenario;
  std::string advice;
  std::optional<std::string> template_text;
};

/// Throws InvalidArgument (no actions / empty advice), UnresolvedPlaceholder.
ChatRequest build_grounding_prompt(const GroundingPromptInputs& inputs);

struct SyncExample {
  std::string plan;
  std::string reason;  // empty for the positive example
};

struct SyncExamples {
  SyncExample positive;
  std::vector<SyncExample> negatives;

  /// `POSITIVE:` / `NEGATIVE: <reason>` headed blocks.
  static SyncExamples parse(std::string_view text);
};

/// Throws InvalidArgument (empty plan text, fewer than two negatives),
/// UnresolvedPlaceholder.
ChatRequest build_sync_prompt(std::string_view grounded_plan_text, const SyncExamples& examples,
                              std::optional<std::string> template_text = std::nullopt);

/// Pulls the plan body out of a model reply: drops markdown fences and any
/// leading `PLAN:` label.
std::string extract_plan_text(std::string_view response);

}  // namespace llcoach

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "llcoach/domain.hpp"
#include "llcoach/plan.hpp"

namespace llcoach {

struct FsmState {
  GroundedAction action;
  std::optional<int> barrier_id;

  friend bool operator==(const FsmState&, const FsmState&) = default;
};

struct AgentFSM {
  std::string agent_id;  // role name
  std::vector<FsmState> states;
  std::size_t current = 0;

  bool finished() const { return current >= states.size(); }

  friend bool operator==(const AgentFSM&, const AgentFSM&) = default;
};

/// One FSM per acting role, holding that role's actions in plan order. Each
/// JOIN gets a barrier id (1, 2, ...) shared by its members.
/// Throws InvalidPlan on an empty plan or a JOIN with repeated agents.
std::map<std::string, AgentFSM> compile_fsm(const Plan& plan);

struct SimConfig {
  double walk_speed = 0.25;     // m/s
  double pass_speed = 2.0;      // m/s
  double kick_speed = 4.0;      // m/s
  double control_radius = 0.3;  // m
  double tick = 0.05;           // s
  double timeout = 120.0;       // s
  double goal_x = 4.5;          // goal line
  double goal_half_width = 0.75;

  /// Throws ConfigInvalid.
  void validate() const;

  /// `key = value` lines (keys as the field names above).
  static SimConfig parse(std::string_view text, std::string_view source = "<sim-config>");
  std::string serialize() const;
};

enum class OpponentPolicyKind { Static, NearestIntercept };

std::string_view to_string(OpponentPolicyKind kind);
std::optional<OpponentPolicyKind> opponent_policy_from_string(std::string_view text);

struct OpponentPolicy {
  OpponentPolicyKind kind = OpponentPolicyKind::Static;
  std::uint64_t seed = 0;
};

struct TraceEvent {
  std::int64_t tick = 0;
  std::string kind;
  std::string agent;  // "-" when not agent-specific
  std::string details;

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

struct MatchResult {
  bool success = false;
  int passes = 0;
  std::optional<double> scoring_time;
  std::string end_reason;  // GOAL, STEAL, PLAN_EXHAUSTED, TIMEOUT
  std::vector<TraceEvent> trace;
  double tick = 0.05;

  /// `t=<sec> EVENT <kind> <agent> <details>` per event.
  std::string trace_text() const;
};

/// Fixed-timestep point-mass simulation of the compiled plan. FSM agent ids
/// are role names and are resolved to own agents of `world0` by role.
/// Throws ConfigInvalid, MissingRole.
MatchResult run_match(const std::map<std::string, AgentFSM>& fsms, const WorldState& world0,
                      const Domain& domain, const SimConfig& config,
                      const OpponentPolicy& opponents);

struct AggregateMetrics {
  std::size_t runs = 0;
  double success_rate = 0.0;
  double avg_passes = 0.0;
  std::optional<double> avg_scoring_time;  // over successful runs
};

/// Throws EmptyInput.
AggregateMetrics aggregate(const std::vector<MatchResult>& results);

enum class ReportFormat { Table, Tsv, Csv };

std::optional<ReportFormat> report_format_from_string(std::string_view text);

/// Three rows labelled as in the evaluation table: "Success Rate",
/// "Avg. no. of passes", "Avg. scoring time".
std::string format_report(const AggregateMetrics& metrics, std::string_view column_label,
                          ReportFormat format = ReportFormat::Table);

}  // namespace llcoach

#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace llcoach {

/// SPL field geometry in the field frame: origin at the center, own goal at
/// x = -half_length, opponent goal at x = +half_length.
struct FieldSpec {
  double length = 9.0;
  double width = 6.0;

  double half_length() const { return length / 2.0; }
  double half_width() const { return width / 2.0; }

  friend bool operator==(const FieldSpec&, const FieldSpec&) = default;
};

/// Penalty added by scenario_distance for a subject present in only one of
/// the two scenarios (half the field width).
inline constexpr double kUnmatchedSubjectPenalty = 3.0;

inline constexpr std::string_view kBallSubject = "BALL";
inline constexpr std::string_view kOpponentPrefix = "OPPONENT_";

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

double distance(Vec2 a, Vec2 b);

/// Wraps an angle into (-pi, pi].
double normalize_angle(double theta);

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Pose() = default;
  Pose(double x_, double y_, double theta_);

  Vec2 position() const { return {x, y}; }
  friend bool operator==(const Pose&, const Pose&) = default;
};

struct Waypoint {
  std::string token;
  std::string description;
  Vec2 position;

  friend bool operator==(const Waypoint&, const Waypoint&) = default;
};

struct Role {
  std::string name;
  std::string description;
  std::set<std::string> allowed_actions;

  friend bool operator==(const Role&, const Role&) = default;
};

enum class Team { Own, Opponent };

std::string_view to_string(Team team);

struct Agent {
  std::string agent_id;
  Team team = Team::Own;
  std::optional<std::string> role;

  friend bool operator==(const Agent&, const Agent&) = default;
};

struct AgentState {
  Agent agent;
  Pose pose;

  friend bool operator==(const AgentState&, const AgentState&) = default;
};

struct WorldState {
  std::vector<AgentState> agents;
  Vec2 ball;
  double timestamp = 0.0;

  const AgentState* find(std::string_view agent_id) const;
  /// Own-team agent currently assigned `role`, if any.
  const AgentState* find_by_role(std::string_view role) const;

  friend bool operator==(const WorldState&, const WorldState&) = default;
};

struct PlanningGoal {
  std::string text;
};

/// The fixed goal used throughout the offline pipeline.
PlanningGoal default_planning_goal();

struct Tactics {
  std::string text;  // empty means "no tactic modifier"
};

struct Assignment {
  std::string subject;  // role name, OPPONENT_<n>, or BALL
  std::string waypoint;

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

struct Scenario {
  std::vector<Assignment> assignments;

  const Assignment* find(std::string_view subject) const;
  bool empty() const { return assignments.empty(); }

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Planning domain: a natural-language description plus the waypoint and
/// role tables. Role order is the "fixed role order" used when building
/// scenarios.
class Domain {
 public:
  Domain() = default;
  Domain(std::string description, std::vector<Waypoint> waypoints,
         std::vector<Role> roles, FieldSpec field = {});

  const std::string& description() const { return description_; }
  const std::vector<Waypoint>& waypoints() const { return waypoints_; }
  const std::vector<Role>& roles() const { return roles_; }
  const FieldSpec& field() const { return field_; }

  const Waypoint* find_waypoint(std::string_view token) const;
  /// Throws UnknownWaypoint.
  const Waypoint& waypoint(std::string_view token) const;
  const Role* find_role(std::string_view name) const;
  bool has_role(std::string_view name) const { return find_role(name) != nullptr; }

  /// Clamps a point into the field rectangle.
  Vec2 clamp(Vec2 p) const;

  friend bool operator==(const Domain&, const Domain&) = default;

 private:
  std::string description_;
  std::vector<Waypoint> waypoints_;
  std::vector<Role> roles_;
  FieldSpec field_;
};

/// True for OPPONENT_<n> with n >= 1.
bool is_opponent_subject(std::string_view subject);

// ---- operations ----------------------------------------------------------

/// Token of the waypoint closest to `pos`; ties go to the lexicographically
/// smallest token. Throws EmptyDomain.
const std::string& nearest_waypoint(Vec2 pos, std::span<const Waypoint> waypoints);

/// Discretizes a world state: own roles in domain role order, then opponents
/// labelled OPPONENT_1..N by field order (x, then y, then id), then BALL.
Scenario scenario_from_world(const WorldState& world, const Domain& domain);

/// Sum of waypoint distances over shared subjects plus `penalty` per subject
/// present in only one scenario.
double scenario_distance(const Scenario& a, const Scenario& b, const Domain& domain,
                         double penalty = kUnmatchedSubjectPenalty);

// ---- file formats ------------------------------------------------------

/// Line-oriented domain file:
///   DOMAIN "<text>"
///   WAYPOINT <TOKEN> <x> <y> "<description>"
///   ROLE <NAME> "<description>" ACTIONS=<id,id,...>
Domain parse_domain(std::string_view text, std::string_view source = "<domain>");
std::string serialize_domain(const Domain& domain);

/// World-state file:
///   AGENT <id> <OWN|OPPONENT> <role|-> <x> <y> <theta>
///   BALL <x> <y>
///   TIME <seconds>          (optional)
/// The ball is clamped into the field.
WorldState parse_world(std::string_view text, const FieldSpec& field = {},
                       std::string_view source = "<world>");
std::string serialize_world(const WorldState& world);

/// Several named worlds in one file, each introduced by `WORLD <name>`.
std::vector<std::pair<std::string, WorldState>> parse_world_set(
    std::string_view text, const FieldSpec& field = {},
    std::string_view source = "<worlds>");

/// `SCENARIO:` header followed by `<SUBJECT> is at <WAYPOINT>` lines.
std::string serialize_scenario(const Scenario& scenario);

}  // namespace llcoach

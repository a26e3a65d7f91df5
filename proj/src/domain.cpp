#include "llcoach/domain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <tuple>

#include "llcoach/error.hpp"
#include "llcoach/text.hpp"

namespace llcoach {

namespace {

[[noreturn]] void parse_fail(std::string_view source, std::size_t line, const std::string& what) {
  std::ostringstream msg;
  msg << source << ":" << line << ": " << what;
  throw Error(ErrorKind::ParseError, msg.str());
}

double parse_number(std::string_view source, std::size_t line, std::string_view token) {
  double value = 0.0;
  if (!text::parse_double(token, value)) {
    parse_fail(source, line, "expected a number, got '" + std::string(token) + "'");
  }
  return value;
}

std::string quote(std::string_view s) {
  std::string out = "\"";
  out.append(s);
  out.push_back('"');
  return out;
}

}  // namespace

double distance(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

double normalize_angle(double theta) {
  constexpr double kPi = std::numbers::pi;
  double wrapped = std::remainder(theta, 2.0 * kPi);  // [-pi, pi]
  if (wrapped <= -kPi) wrapped += 2.0 * kPi;
  return wrapped;
}

Pose::Pose(double x_, double y_, double theta_) : x(x_), y(y_), theta(normalize_angle(theta_)) {
  if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(theta_)) {
    throw Error(ErrorKind::InvalidArgument, "pose components must be finite");
  }
}

std::string_view to_string(Team team) { return team == Team::Own ? "OWN" : "OPPONENT"; }

const AgentState* WorldState::find(std::string_view agent_id) const {
  for (const auto& a : agents) {
    if (a.agent.agent_id == agent_id) return &a;
  }
  return nullptr;
}

const AgentState* WorldState::find_by_role(std::string_view role) const {
  for (const auto& a : agents) {
    if (a.agent.team == Team::Own && a.agent.role && *a.agent.role == role) return &a;
  }
  return nullptr;
}

PlanningGoal default_planning_goal() {
  return {"The own team should score a goal in the opponent's goal."};
}

const Assignment* Scenario::find(std::string_view subject) const {
  for (const auto& a : assignments) {
    if (a.subject == subject) return &a;
  }
  return nullptr;
}

Domain::Domain(std::string description, std::vector<Waypoint> waypoints,
               std::vector<Role> roles, FieldSpec field)
    : description_(std::move(description)),
      waypoints_(std::move(waypoints)),
      roles_(std::move(roles)),
      field_(field) {
  std::set<std::string, std::less<>> seen;
  for (const auto& w : waypoints_) {
    if (!text::is_upper_token(w.token)) {
      throw Error(ErrorKind::InvalidArgument, "waypoint token '" + w.token + "' is not upper-case");
    }
    if (w.token == kBallSubject || is_opponent_subject(w.token)) {
      throw Error(ErrorKind::InvalidArgument, "reserved waypoint token '" + w.token + "'");
    }
    if (!seen.insert(w.token).second) {
      throw Error(ErrorKind::InvalidArgument, "duplicate waypoint token '" + w.token + "'");
    }
    if (!std::isfinite(w.position.x) || !std::isfinite(w.position.y)) {
      throw Error(ErrorKind::InvalidArgument, "waypoint '" + w.token + "' is not finite");
    }
  }
  for (const auto& r : roles_) {
    if (!text::is_upper_token(r.name) || r.name == kBallSubject || is_opponent_subject(r.name)) {
      throw Error(ErrorKind::InvalidArgument, "invalid role name '" + r.name + "'");
    }
    if (!seen.insert(r.name).second) {
      throw Error(ErrorKind::InvalidArgument, "duplicate role or waypoint name '" + r.name + "'");
    }
    if (r.allowed_actions.empty()) {
      throw Error(ErrorKind::InvalidArgument, "role '" + r.name + "' allows no actions");
    }
  }
}

const Waypoint* Domain::find_waypoint(std::string_view token) const {
  for (const auto& w : waypoints_) {
    if (w.token == token) return &w;
  }
  return nullptr;
}

const Waypoint& Domain::waypoint(std::string_view token) const {
  const Waypoint* w = find_waypoint(token);
  if (w == nullptr) throw Error(ErrorKind::UnknownWaypoint, std::string(token));
  return *w;
}

const Role* Domain::find_role(std::string_view name) const {
  for (const auto& r : roles_) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

Vec2 Domain::clamp(Vec2 p) const {
  return {std::clamp(p.x, -field_.half_length(), field_.half_length()),
          std::clamp(p.y, -field_.half_width(), field_.half_width())};
}

bool is_opponent_subject(std::string_view subject) {
  if (!subject.starts_with(kOpponentPrefix)) return false;
  std::string_view digits = subject.substr(kOpponentPrefix.size());
  if (digits.empty() || digits[0] == '0') return false;
  return std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; });
}

const std::string& nearest_waypoint(Vec2 pos, std::span<const Waypoint> waypoints) {
  if (waypoints.empty()) throw Error(ErrorKind::EmptyDomain, "no waypoints to choose from");
  const Waypoint* best = nullptr;
  double best_distance = 0.0;
  for (const auto& w : waypoints) {
    const double d = distance(pos, w.position);
    if (best == nullptr || d < best_distance || (d == best_distance && w.token < best->token)) {
      best = &w;
      best_distance = d;
    }
  }
  return best->token;
}

Scenario scenario_from_world(const WorldState& world, const Domain& domain) {
  if (domain.waypoints().empty()) throw Error(ErrorKind::EmptyDomain, "domain has no waypoints");
  const auto& waypoints = domain.waypoints();

  Scenario scenario;
  std::set<std::string, std::less<>> own_roles;
  for (const auto& a : world.agents) {
    if (a.agent.team != Team::Own) continue;
    if (!a.agent.role) {
      throw Error(ErrorKind::MissingRole, "own agent '" + a.agent.agent_id + "' has no role");
    }
    if (!domain.has_role(*a.agent.role)) {
      throw Error(ErrorKind::UnknownSubject, "role '" + *a.agent.role + "' is not in the domain");
    }
    if (!own_roles.insert(*a.agent.role).second) {
      throw Error(ErrorKind::DuplicateSubject, "role '" + *a.agent.role + "' assigned twice");
    }
  }
  for (const auto& role : domain.roles()) {
    if (!own_roles.contains(role.name)) continue;
    const AgentState* a = world.find_by_role(role.name);
    scenario.assignments.push_back({role.name, nearest_waypoint(a->pose.position(), waypoints)});
  }

  std::vector<const AgentState*> opponents;
  for (const auto& a : world.agents) {
    if (a.agent.team == Team::Opponent) opponents.push_back(&a);
  }
  std::sort(opponents.begin(), opponents.end(), [](const AgentState* l, const AgentState* r) {
    return std::tie(l->pose.x, l->pose.y, l->agent.agent_id) <
           std::tie(r->pose.x, r->pose.y, r->agent.agent_id);
  });
  for (std::size_t i = 0; i < opponents.size(); ++i) {
    scenario.assignments.push_back({std::string(kOpponentPrefix) + std::to_string(i + 1),
                                    nearest_waypoint(opponents[i]->pose.position(), waypoints)});
  }

  scenario.assignments.push_back({std::string(kBallSubject), nearest_waypoint(world.ball, waypoints)});
  return scenario;
}

double scenario_distance(const Scenario& a, const Scenario& b, const Domain& domain,
                         double penalty) {
  // Validate every token first so the error does not depend on overlap.
  for (const auto* s : {&a, &b}) {
    for (const auto& asg : s->assignments) domain.waypoint(asg.waypoint);
  }
  double total = 0.0;
  for (const auto& asg : a.assignments) {
    const Assignment* other = b.find(asg.subject);
    if (other == nullptr) {
      total += penalty;
    } else {
      total += distance(domain.waypoint(asg.waypoint).position,
                        domain.waypoint(other->waypoint).position);
    }
  }
  for (const auto& asg : b.assignments) {
    if (a.find(asg.subject) == nullptr) total += penalty;
  }
  return total;
}

// ---- file formats ------------------------------------------------------

Domain parse_domain(std::string_view text_in, std::string_view source) {
  std::string description;
  std::vector<Waypoint> waypoints;
  std::vector<Role> roles;
  const auto lines = text::split_lines(text_in);
  std::vector<std::string> tokens;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    const auto line = text::trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    if (!text::tokenize_quoted(line, tokens)) parse_fail(source, line_no, "unterminated quote");
    const std::string& keyword = tokens[0];
    if (keyword == "DOMAIN") {
      if (tokens.size() != 2) parse_fail(source, line_no, "expected DOMAIN \"<text>\"");
      description = tokens[1];
    } else if (keyword == "WAYPOINT") {
      if (tokens.size() != 5) {
        parse_fail(source, line_no, "expected WAYPOINT <TOKEN> <x> <y> \"<description>\"");
      }
      if (!text::is_upper_token(tokens[1])) {
        parse_fail(source, line_no, "waypoint token '" + tokens[1] + "' must match [A-Z][A-Z0-9_]*");
      }
      waypoints.push_back({tokens[1], tokens[4],
                           {parse_number(source, line_no, tokens[2]),
                            parse_number(source, line_no, tokens[3])}});
    } else if (keyword == "ROLE") {
      if (tokens.size() != 4 || !tokens[3].starts_with("ACTIONS=")) {
        parse_fail(source, line_no, "expected ROLE <NAME> \"<description>\" ACTIONS=<id,...>");
      }
      if (!text::is_upper_token(tokens[1])) {
        parse_fail(source, line_no, "role name '" + tokens[1] + "' must match [A-Z][A-Z0-9_]*");
      }
      Role role{tokens[1], tokens[2], {}};
      for (const auto& id : text::split_top_level(std::string_view(tokens[3]).substr(8), ',')) {
        if (!text::is_identifier(id)) parse_fail(source, line_no, "bad action id '" + id + "'");
        role.allowed_actions.insert(id);
      }
      if (role.allowed_actions.empty()) parse_fail(source, line_no, "role allows no actions");
      roles.push_back(std::move(role));
    } else {
      parse_fail(source, line_no, "unknown keyword '" + keyword + "'");
    }
  }
  try {
    return Domain(std::move(description), std::move(waypoints), std::move(roles));
  } catch (const Error& e) {
    throw Error(ErrorKind::ParseError, std::string(source) + ": " + e.detail());
  }
}

std::string serialize_domain(const Domain& domain) {
  std::ostringstream out;
  if (!domain.description().empty()) out << "DOMAIN " << quote(domain.description()) << "\n";
  for (const auto& w : domain.waypoints()) {
    out << "WAYPOINT " << w.token << " " << text::format_double(w.position.x) << " "
        << text::format_double(w.position.y) << " " << quote(w.description) << "\n";
  }
  for (const auto& r : domain.roles()) {
    out << "ROLE " << r.name << " " << quote(r.description) << " ACTIONS=";
    bool first = true;
    for (const auto& id : r.allowed_actions) {
      out << (first ? "" : ",") << id;
      first = false;
    }
    out << "\n";
  }
  return out.str();
}

namespace {

WorldState parse_world_lines(const std::vector<std::string>& lines, std::size_t begin,
                             std::size_t end, const FieldSpec& field, std::string_view source) {
  WorldState world;
  bool have_ball = false;
  std::set<std::string, std::less<>> ids;
  std::vector<std::string> tokens;
  for (std::size_t i = begin; i < end; ++i) {
    const std::size_t line_no = i + 1;
    const auto line = text::trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    if (!text::tokenize_quoted(line, tokens)) parse_fail(source, line_no, "unterminated quote");
    if (tokens[0] == "AGENT") {
      if (tokens.size() != 7) {
        parse_fail(source, line_no, "expected AGENT <id> <team> <role|-> <x> <y> <theta>");
      }
      Agent agent;
      agent.agent_id = tokens[1];
      if (!text::is_identifier(agent.agent_id)) parse_fail(source, line_no, "bad agent id");
      if (!ids.insert(agent.agent_id).second) {
        parse_fail(source, line_no, "duplicate agent id '" + agent.agent_id + "'");
      }
      const std::string team = text::to_upper(tokens[2]);
      if (team == "OWN") {
        agent.team = Team::Own;
      } else if (team == "OPPONENT") {
        agent.team = Team::Opponent;
      } else {
        parse_fail(source, line_no, "team must be OWN or OPPONENT");
      }
      if (tokens[3] != "-") {
        if (agent.team == Team::Opponent) {
          parse_fail(source, line_no, "opponent agents do not carry roles");
        }
        agent.role = tokens[3];
      }
      const Pose pose(parse_number(source, line_no, tokens[4]),
                      parse_number(source, line_no, tokens[5]),
                      parse_number(source, line_no, tokens[6]));
      world.agents.push_back({std::move(agent), pose});
    } else if (tokens[0] == "BALL") {
      if (tokens.size() != 3) parse_fail(source, line_no, "expected BALL <x> <y>");
      if (have_ball) parse_fail(source, line_no, "ball given twice");
      have_ball = true;
      world.ball = {parse_number(source, line_no, tokens[1]), parse_number(source, line_no, tokens[2])};
    } else if (tokens[0] == "TIME") {
      if (tokens.size() != 2) parse_fail(source, line_no, "expected TIME <seconds>");
      world.timestamp = parse_number(source, line_no, tokens[1]);
    } else {
      parse_fail(source, line_no, "unknown keyword '" + tokens[0] + "'");
    }
  }
  if (!have_ball) parse_fail(source, end, "missing BALL line");
  world.ball = {std::clamp(world.ball.x, -field.half_length(), field.half_length()),
                std::clamp(world.ball.y, -field.half_width(), field.half_width())};
  return world;
}

}  // namespace

WorldState parse_world(std::string_view text_in, const FieldSpec& field, std::string_view source) {
  const auto lines = text::split_lines(text_in);
  return parse_world_lines(lines, 0, lines.size(), field, source);
}

std::string serialize_world(const WorldState& world) {
  std::ostringstream out;
  if (world.timestamp != 0.0) out << "TIME " << text::format_double(world.timestamp) << "\n";
  for (const auto& a : world.agents) {
    out << "AGENT " << a.agent.agent_id << " " << to_string(a.agent.team) << " "
        << a.agent.role.value_or("-") << " " << text::format_double(a.pose.x) << " "
        << text::format_double(a.pose.y) << " " << text::format_double(a.pose.theta) << "\n";
  }
  out << "BALL " << text::format_double(world.ball.x) << " " << text::format_double(world.ball.y)
      << "\n";
  return out.str();
}

std::vector<std::pair<std::string, WorldState>> parse_world_set(std::string_view text_in,
                                                                const FieldSpec& field,
                                                                std::string_view source) {
  const auto lines = text::split_lines(text_in);
  std::vector<std::pair<std::string, std::size_t>> headers;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = text::trim(lines[i]);
    if (line.starts_with("WORLD")) {
      std::vector<std::string> tokens;
      text::tokenize_quoted(line, tokens);
      if (tokens.size() != 2 || tokens[0] != "WORLD") {
        parse_fail(source, i + 1, "expected WORLD <name>");
      }
      for (const auto& h : headers) {
        if (h.first == tokens[1]) parse_fail(source, i + 1, "duplicate world '" + tokens[1] + "'");
      }
      headers.emplace_back(tokens[1], i);
    }
  }
  std::vector<std::pair<std::string, WorldState>> worlds;
  if (headers.empty()) {
    bool any = std::any_of(lines.begin(), lines.end(), [](const std::string& l) {
      auto t = text::trim(l);
      return !t.empty() && t.front() != '#';
    });
    if (any) worlds.emplace_back("world", parse_world_lines(lines, 0, lines.size(), field, source));
    return worlds;
  }
  for (std::size_t h = 0; h < headers.size(); ++h) {
    for (std::size_t i = 0; i < headers[h].second; ++i) {
      if (h > 0) break;
      auto t = text::trim(lines[i]);
      if (!t.empty() && t.front() != '#') parse_fail(source, i + 1, "content before first WORLD");
    }
    const std::size_t begin = headers[h].second + 1;
    const std::size_t end = h + 1 < headers.size() ? headers[h + 1].second : lines.size();
    worlds.emplace_back(headers[h].first, parse_world_lines(lines, begin, end, field, source));
  }
  return worlds;
}

std::string serialize_scenario(const Scenario& scenario) {
  std::string out = "SCENARIO:\n";
  for (const auto& a : scenario.assignments) {
    out += a.subject + " is at " + a.waypoint + "\n";
  }
  return out;
}

}  // namespace llcoach

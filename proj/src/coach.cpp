#include "llcoach/coach.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include "llcoach/data.hpp"
#include "llcoach/error.hpp"
#include "llcoach/prompt.hpp"
#include "llcoach/text.hpp"

namespace llcoach {

namespace {

constexpr std::string_view kScenarioSkeleton =
    "[ROLE_OWN_TEAM] is at [WAYPOINT]\n"
    "[ROLE_OPPONENT_TEAM] is at [WAYPOINT]\n"
    "...\n"
    "BALL is at [WAYPOINT]";

// Strips markdown emphasis and heading marks around a header line.
std::string_view strip_markup(std::string_view line) {
  line = text::trim(line);
  while (!line.empty() && (line.front() == '#' || line.front() == '*')) line.remove_prefix(1);
  while (!line.empty() && line.back() == '*') line.remove_suffix(1);
  return text::trim(line);
}

bool is_section_header(std::string_view line) {
  const auto s = strip_markup(line);
  if (s.size() < 2 || s.back() != ':') return false;
  return std::all_of(s.begin(), s.end() - 1, [](char c) {
    return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == ' ' || c == '-';
  });
}

std::string join_ids(const std::vector<std::string>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i > 0) out += i + 1 == ids.size() ? " and " : ", ";
    out += ids[i];
  }
  return out;
}

}  // namespace

std::string describe_roles(const Domain& domain, const std::vector<ActionSchema>& actions) {
  std::string out;
  for (const auto& role : domain.roles()) {
    std::vector<std::string> ids;
    for (const auto& a : actions) {
      if (role.allowed_actions.contains(a.action_id)) ids.push_back(a.action_id);
    }
    std::string desc(text::trim(role.description));
    if (!desc.empty() && desc.back() == '.') desc.pop_back();
    if (!out.empty()) out += "\n";
    out += "- " + role.name + ": " + desc;
    if (ids.empty()) {
      out += ", and has none of the listed actions available.";
    } else {
      out += ", and is allowed to perform the following actions: " + join_ids(ids);
    }
  }
  return out;
}

std::string describe_waypoints(const Domain& domain) {
  std::string out;
  for (const auto& w : domain.waypoints()) {
    if (!out.empty()) out += "\n";
    out += w.token + ": " + w.description;
  }
  return out;
}

std::string describe_actions(const std::vector<ActionSchema>& actions) {
  std::vector<std::string> ids;
  for (const auto& a : actions) ids.push_back(a.action_id);
  std::string out = join_ids(ids);
  for (const auto& a : actions) out += "\n- " + a.action_id + ": " + a.description;
  return out;
}

ChatRequest build_coach_prompt(const CoachPromptInputs& inputs) {
  if (inputs.domain == nullptr) throw Error(ErrorKind::InvalidArgument, "coach prompt needs a domain");
  if (inputs.retrieved_actions.empty()) {
    throw Error(ErrorKind::InvalidArgument, "coach prompt needs at least one retrieved action");
  }
  if (text::trim(inputs.goal.text).empty()) throw Error(ErrorKind::InvalidArgument, "empty planning goal");
  const Domain& domain = *inputs.domain;
  const auto tmpl = PromptTemplate::parse(
      inputs.template_text ? std::string_view(*inputs.template_text) : data::get("prompts/coach.txt"));
  const std::string example = std::string(text::trim(
      inputs.example_output ? std::string_view(*inputs.example_output)
                            : data::get("prompts/coach_example.txt")));

  const std::map<std::string, std::string, std::less<>> values = {
      {"DOMAIN", domain.description()},
      {"SCENARIO_SKELETON", std::string(kScenarioSkeleton)},
      {"EXAMPLE_OUTPUT", example},
      {"ROLES", describe_roles(domain, inputs.retrieved_actions)},
      {"WAYPOINTS", describe_waypoints(domain)},
      {"ACTIONS", describe_actions(inputs.retrieved_actions)},
      {"PLANNING_GOAL", inputs.goal.text},
      {"TACTICS", std::string(text::trim(inputs.tactics.text))},
  };
  ChatRequest request;
  request.system_text = render_template(tmpl.system, values);
  request.user_text = render_template(tmpl.user, values);
  request.image_ref = inputs.image_ref;
  return request;
}

Scenario parse_scenario_block(std::string_view response, const Domain& domain) {
  const auto lines = text::split_lines(response);
  std::size_t i = 0;
  while (i < lines.size() && strip_markup(lines[i]) != "SCENARIO:") ++i;
  if (i == lines.size()) throw Error(ErrorKind::MissingScenarioBlock, "no 'SCENARIO:' header in response");
  ++i;

  Scenario scenario;
  std::set<std::string, std::less<>> seen;
  for (; i < lines.size(); ++i) {
    std::string_view line = text::trim(lines[i]);
    if (line.empty() || is_section_header(line)) break;
    if (line.starts_with("- ") || line.starts_with("* ")) line = text::trim(line.substr(2));
    if (!line.empty() && line.back() == '.') line.remove_suffix(1);
    const auto sep = line.find(" is at ");
    if (sep == std::string_view::npos) {
      throw Error(ErrorKind::ParseError, "scenario line " + std::to_string(i + 1) +
                                             " is not '<SUBJECT> is at <WAYPOINT>': " + std::string(line));
    }
    const std::string subject(text::trim(line.substr(0, sep)));
    const std::string waypoint(text::trim(line.substr(sep + 7)));
    const bool known_subject =
        subject == kBallSubject || is_opponent_subject(subject) || domain.has_role(subject);
    if (!known_subject) throw Error(ErrorKind::UnknownSubject, subject);
    if (domain.find_waypoint(waypoint) == nullptr) throw Error(ErrorKind::UnknownWaypoint, waypoint);
    if (!seen.insert(subject).second) throw Error(ErrorKind::DuplicateSubject, subject);
    scenario.assignments.push_back({subject, waypoint});
  }
  if (scenario.empty()) throw Error(ErrorKind::MissingScenarioBlock, "empty SCENARIO block");
  return scenario;
}

std::string parse_advice_block(std::string_view response) {
  constexpr std::string_view kHeader = "COACH ADVICE:";
  const auto pos = response.find(kHeader);
  if (pos == std::string_view::npos) throw Error(ErrorKind::MissingAdviceBlock, "no 'COACH ADVICE:' header");
  std::string_view rest = response.substr(pos + kHeader.size());
  while (!rest.empty() && rest.front() == '*') rest.remove_prefix(1);
  rest = text::trim(rest);
  if (rest.empty()) throw Error(ErrorKind::MissingAdviceBlock, "empty COACH ADVICE block");
  return std::string(rest);
}

CoachOutput parse_coach_response(std::string_view response, const Domain& domain) {
  return {parse_scenario_block(response, domain), parse_advice_block(response)};
}

std::vector<std::size_t> solve_assignment(const std::vector<std::vector<double>>& cost) {
  const std::size_t n = cost.size();
  for (const auto& row : cost) {
    if (row.size() != n) throw Error(ErrorKind::InvalidArgument, "assignment cost matrix must be square");
  }
  if (n == 0) return {};
  // Shortest augmenting path with potentials; 1-based, column 0 is a sentinel.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  for (std::size_t row = 1; row <= n; ++row) {
    match[0] = row;
    std::size_t col0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<bool> used(n + 1, false);
    do {
      used[col0] = true;
      const std::size_t r = match[col0];
      double delta = kInf;
      std::size_t col1 = 0;
      for (std::size_t c = 1; c <= n; ++c) {
        if (used[c]) continue;
        const double cur = cost[r - 1][c - 1] - u[r] - v[c];
        if (cur < minv[c]) {
          minv[c] = cur;
          way[c] = col0;
        }
        if (minv[c] < delta) {
          delta = minv[c];
          col1 = c;
        }
      }
      for (std::size_t c = 0; c <= n; ++c) {
        if (used[c]) {
          u[match[c]] += delta;
          v[c] -= delta;
        } else {
          minv[c] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      const std::size_t col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0 != 0);
  }
  std::vector<std::size_t> assignment(n);
  for (std::size_t c = 1; c <= n; ++c) assignment[match[c] - 1] = c - 1;
  return assignment;
}

std::map<std::string, std::string> retrieve_roles(const WorldState& world, const Scenario& scenario,
                                                  const Domain& domain) {
  std::vector<const AgentState*> agents;
  for (const auto& a : world.agents) {
    if (a.agent.team == Team::Own) agents.push_back(&a);
  }
  std::vector<const Assignment*> roles;
  for (const auto& asg : scenario.assignments) {
    if (domain.has_role(asg.subject)) roles.push_back(&asg);
  }
  if (agents.size() != roles.size()) {
    throw Error(ErrorKind::CardinalityMismatch, std::to_string(agents.size()) + " own agents but " +
                                                    std::to_string(roles.size()) + " roles in scenario");
  }
  std::vector<std::vector<double>> cost(agents.size(), std::vector<double>(roles.size()));
  for (std::size_t i = 0; i < agents.size(); ++i) {
    for (std::size_t j = 0; j < roles.size(); ++j) {
      cost[i][j] = distance(agents[i]->pose.position(), domain.waypoint(roles[j]->waypoint).position);
    }
  }
  const auto assignment = solve_assignment(cost);
  std::map<std::string, std::string> out;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    out.emplace(agents[i]->agent.agent_id, roles[assignment[i]]->subject);
  }
  return out;
}

WorldState assign_roles(WorldState world, const std::map<std::string, std::string>& roles) {
  for (auto& a : world.agents) {
    auto it = roles.find(a.agent.agent_id);
    if (it != roles.end()) a.agent.role = it->second;
  }
  return world;
}

}  // namespace llcoach

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "llcoach/error.hpp"
#include "llcoach/plan.hpp"
#include "llcoach/text.hpp"
#include "plan_checks.hpp"

namespace llcoach {

// ---- structural checks -------------------------------------------------------

namespace detail {

std::vector<ActionIssue> check_action(const GroundedAction& action, const ActionCatalog& catalog,
                                      const Domain& domain) {
  std::vector<ActionIssue> issues;
  const ActionSchema* schema = catalog.find(action.action_id);
  if (schema == nullptr) {
    issues.push_back({ErrorKind::UnknownAction, ViolationKind::UnknownAction, action.action_id,
                      "unknown action '" + action.action_id + "'"});
    return issues;
  }
  const Role* role = domain.find_role(action.agent_id);
  if (role == nullptr) {
    const bool opponent = is_opponent_subject(action.agent_id);
    issues.push_back({ErrorKind::UnknownAgent, ViolationKind::UnknownAgent, action.agent_id,
                      opponent ? "actions for opponent player " + action.agent_id + " are not allowed"
                               : "'" + action.agent_id + "' is not a role of the own team"});
  } else if (!role->allowed_actions.contains(action.action_id)) {
    issues.push_back({ErrorKind::DisallowedAction, ViolationKind::DisallowedAction, action.action_id,
                      "role " + role->name + " may not perform " + action.action_id});
  }

  auto arg_issue = [&](const std::string& subject, const std::string& what) {
    issues.push_back({ErrorKind::ArgMismatch, ViolationKind::ArgMismatch, subject,
                      action.action_id + ": " + what});
  };
  std::set<std::string, std::less<>> seen;
  for (const auto& [key, value] : action.args) {
    if (!seen.insert(key).second) {
      arg_issue(key, "argument " + key + " given twice");
      continue;
    }
    const ActionArg* decl = schema->find_arg(key);
    if (decl == nullptr) {
      arg_issue(key, "unexpected argument " + key);
      continue;
    }
    switch (decl->domain) {
      case ValueDomain::Role:
      case ValueDomain::Agent:
        if (!domain.has_role(value)) arg_issue(key, key + " must be a role, got '" + value + "'");
        break;
      case ValueDomain::Waypoint:
        if (domain.find_waypoint(value) == nullptr) {
          arg_issue(key, key + " must be a waypoint, got '" + value + "'");
        }
        break;
      case ValueDomain::FreeText:
        break;
    }
  }
  for (const auto& decl : schema->args) {
    if (!seen.contains(decl.name)) arg_issue(decl.name, "missing argument " + decl.name);
  }
  return issues;
}

void order_args(GroundedAction& action, const ActionSchema& schema) {
  std::vector<std::pair<std::string, std::string>> ordered;
  for (const auto& decl : schema.args) {
    if (const std::string* v = action.arg(decl.name)) ordered.emplace_back(decl.name, *v);
  }
  action.args = std::move(ordered);
}

std::optional<std::string> duplicate_agent(const PlanStep& step) {
  std::set<std::string, std::less<>> agents;
  for (const auto& a : step.actions) {
    if (!agents.insert(a.agent_id).second) return a.agent_id;
  }
  return std::nullopt;
}

}  // namespace detail

// ---- facts and state -------------------------------------------------------

std::string Fact::to_string() const {
  return Predicate{name, args, false}.to_string();
}

Fact parse_fact(std::string_view input) {
  const Predicate p = parse_predicate(input);
  if (p.negated) throw Error(ErrorKind::ParseError, "a fact cannot be negated: " + std::string(input));
  for (const auto& a : p.args) {
    if (a.starts_with("?")) throw Error(ErrorKind::ParseError, "a fact cannot contain variables: " + std::string(input));
  }
  return {p.name, p.args};
}

std::string fluent_key(const Fact& fact) {
  switch (fact.name) {
    case PredicateName::BallAt:
    case PredicateName::BallHeldBy:
      return "ball";
    case PredicateName::At:
      return "at:" + fact.args.at(0);
    default:
      return fact.to_string();
  }
}

SimState::SimState(const std::vector<Fact>& facts) {
  std::map<std::string, Fact> by_key;
  for (const auto& f : facts) {
    if (f.args.size() != arity(f.name)) {
      throw Error(ErrorKind::InvalidArgument, "wrong arity in fact " + f.to_string());
    }
    auto [it, inserted] = by_key.emplace(fluent_key(f), f);
    if (!inserted && !(it->second == f)) {
      throw Error(ErrorKind::InvalidArgument,
                  "facts " + it->second.to_string() + " and " + f.to_string() + " cannot both hold");
    }
    facts_.insert(f);
  }
}

void SimState::insert(const Fact& fact) {
  const std::string key = fluent_key(fact);
  for (auto it = facts_.begin(); it != facts_.end();) {
    if (fluent_key(*it) == key) {
      it = facts_.erase(it);
    } else {
      ++it;
    }
  }
  facts_.insert(fact);
}

SimState parse_state(std::string_view input, std::string_view source) {
  std::vector<Fact> facts;
  const auto lines = text::split_lines(input);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = text::trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    try {
      facts.push_back(parse_fact(line));
    } catch (const Error& e) {
      std::ostringstream msg;
      msg << source << ":" << i + 1 << ": " << e.detail();
      throw Error(ErrorKind::ParseError, msg.str());
    }
  }
  try {
    return SimState(facts);
  } catch (const Error& e) {
    throw Error(ErrorKind::ParseError, std::string(source) + ": " + e.detail());
  }
}

std::string serialize_state(const SimState& state) {
  std::string out;
  for (const auto& f : state.facts()) out += f.to_string() + "\n";
  return out;
}

SimState initial_state_from_scenario(const Scenario& scenario, const Domain& domain) {
  std::vector<Fact> facts;
  for (const auto& a : scenario.assignments) {
    domain.waypoint(a.waypoint);
    if (domain.has_role(a.subject)) facts.push_back({PredicateName::At, {a.subject, a.waypoint}});
  }
  if (const Assignment* ball = scenario.find(kBallSubject)) {
    const Assignment* holder = nullptr;
    for (const auto& a : scenario.assignments) {
      if (domain.has_role(a.subject) && a.waypoint == ball->waypoint) {
        holder = &a;
        break;
      }
    }
    if (holder != nullptr) {
      facts.push_back({PredicateName::BallHeldBy, {holder->subject}});
    } else {
      facts.push_back({PredicateName::BallAt, {ball->waypoint}});
    }
  }
  return SimState(facts);
}

// ---- grounding -------------------------------------------------------------

std::string GroundedCondition::to_string() const {
  return (required ? "" : "!") + fact.to_string();
}

Fact ground(const Predicate& predicate, const GroundedAction& action) {
  Fact f{predicate.name, {}};
  for (const auto& term : predicate.args) {
    if (term == kAgentVariable) {
      f.args.push_back(action.agent_id);
    } else if (term.starts_with("?")) {
      const std::string* value = action.arg(std::string_view(term).substr(1));
      if (value == nullptr) {
        throw Error(ErrorKind::ArgMismatch, action.action_id + " has no argument for " + term);
      }
      f.args.push_back(*value);
    } else {
      f.args.push_back(term);
    }
  }
  return f;
}

GroundedEffects ground(const ActionSchema& schema, const GroundedAction& action) {
  GroundedEffects g;
  for (const auto& p : schema.preconditions) g.preconditions.push_back({ground(p, action), !p.negated});
  for (const auto& p : schema.effects) {
    (p.negated ? g.deletes : g.adds).push_back(ground(p, action));
  }
  return g;
}

void apply(SimState& state, const GroundedEffects& effects) {
  for (const auto& f : effects.deletes) state.erase(f);
  for (const auto& f : effects.adds) state.insert(f);
}

bool releases_ball(const GroundedEffects& effects, std::string_view agent) {
  return std::any_of(effects.deletes.begin(), effects.deletes.end(), [&](const Fact& f) {
    return f.name == PredicateName::BallHeldBy && f.args.size() == 1 && f.args[0] == agent;
  });
}

namespace {

Fact has_passed(std::string_view agent) { return {PredicateName::HasPassed, {std::string(agent)}}; }

std::set<std::string> effect_keys(const GroundedEffects& g) {
  std::set<std::string> keys;
  for (const auto& f : g.adds) keys.insert(fluent_key(f));
  for (const auto& f : g.deletes) keys.insert(fluent_key(f));
  return keys;
}

std::set<std::string> touched_keys(const GroundedEffects& g, std::string_view agent) {
  std::set<std::string> keys = effect_keys(g);
  for (const auto& c : g.preconditions) keys.insert(fluent_key(c.fact));
  if (releases_ball(g, agent)) keys.insert(fluent_key(has_passed(agent)));
  return keys;
}

bool intersects(const std::set<std::string>& a, const std::set<std::string>& b) {
  return std::any_of(a.begin(), a.end(), [&](const std::string& k) { return b.contains(k); });
}

}  // namespace

bool independent(const GroundedEffects& a, std::string_view agent_a, const GroundedEffects& b,
                 std::string_view agent_b) {
  return !intersects(effect_keys(a), touched_keys(b, agent_b)) &&
         !intersects(effect_keys(b), touched_keys(a, agent_a));
}

// ---- validation ----------------------------------------------------------

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::UnknownAction: return "UnknownAction";
    case ViolationKind::UnknownAgent: return "UnknownAgent";
    case ViolationKind::DisallowedAction: return "DisallowedAction";
    case ViolationKind::ArgMismatch: return "ArgMismatch";
    case ViolationKind::SelfJoin: return "SelfJoin";
    case ViolationKind::PreconditionFailed: return "PreconditionFailed";
    case ViolationKind::PassedBall: return "PassedBall";
    case ViolationKind::EffectConflict: return "EffectConflict";
  }
  return "?";
}

std::string ValidationReport::to_lines() const {
  std::string out;
  for (const auto& v : violations) {
    out += "STEP " + std::to_string(v.step) + ": " + std::string(to_string(v.kind)) + ": " + v.message + "\n";
  }
  return out;
}

std::string ValidationReport::to_text() const {
  if (violations.empty()) return "plan is valid: no violations\n";
  std::string out = std::to_string(violations.size()) + " violation(s):\n";
  for (const auto& v : violations) {
    out += "  step " + std::to_string(v.step) + ", action " + std::to_string(v.action + 1) + " [" +
           std::string(to_string(v.kind)) + "] " + v.message + "\n";
  }
  return out;
}

ValidationReport validate_plan(const Plan& plan, const ActionCatalog& catalog, const Domain& domain,
                               const SimState& initial) {
  ValidationReport report;
  SimState state = initial;

  for (std::size_t si = 0; si < plan.steps.size(); ++si) {
    const PlanStep& step = plan.steps[si];
    const std::size_t step_no = si + 1;
    auto report_violation = [&](std::size_t action, ViolationKind kind, std::string subject,
                                std::string message) {
      report.violations.push_back({step_no, action, kind, std::move(subject), std::move(message)});
    };

    bool structural = false;
    for (std::size_t ai = 0; ai < step.actions.size(); ++ai) {
      for (auto& issue : detail::check_action(step.actions[ai], catalog, domain)) {
        report_violation(ai, issue.violation, issue.subject, issue.message);
        structural = true;
      }
    }
    if (step.kind == StepKind::Join) {
      std::set<std::string, std::less<>> seen;
      std::set<std::string, std::less<>> reported;
      for (std::size_t ai = 0; ai < step.actions.size(); ++ai) {
        const auto& agent = step.actions[ai].agent_id;
        if (!seen.insert(agent).second && reported.insert(agent).second) {
          report_violation(ai, ViolationKind::SelfJoin, agent,
                           "agent " + agent + " appears more than once in a JOIN block");
          structural = true;
        }
      }
    }
    if (structural) continue;

    std::vector<GroundedEffects> grounded;
    for (const auto& a : step.actions) grounded.push_back(ground(*catalog.find(a.action_id), a));

    for (std::size_t ai = 0; ai < step.actions.size(); ++ai) {
      const auto& a = step.actions[ai];
      for (const auto& c : grounded[ai].preconditions) {
        if (state.holds(c.fact) != c.required) {
          report_violation(ai, ViolationKind::PreconditionFailed, c.to_string(),
                           "precondition " + c.to_string() + " of " + a.action_id + " by " + a.agent_id +
                               " does not hold");
        }
      }
      if (releases_ball(grounded[ai], a.agent_id) && state.holds(has_passed(a.agent_id))) {
        report_violation(ai, ViolationKind::PassedBall, has_passed(a.agent_id).to_string(),
                         a.agent_id + " has passed the ball before and cannot pass or kick it (" +
                             a.action_id + ") until it receives the ball again");
      }
    }

    if (step.actions.size() > 1) {
      std::set<Fact> adds;
      std::set<Fact> deletes;
      std::map<std::string, std::set<Fact>> assigned;
      for (const auto& g : grounded) {
        for (const auto& f : g.adds) {
          adds.insert(f);
          assigned[fluent_key(f)].insert(f);
        }
        deletes.insert(g.deletes.begin(), g.deletes.end());
      }
      std::set<std::string> conflicts;
      for (const auto& f : adds) {
        if (deletes.contains(f)) conflicts.insert(f.to_string());
      }
      for (const auto& [key, facts] : assigned) {
        if (facts.size() > 1) conflicts.insert(key);
      }
      for (const auto& c : conflicts) {
        report_violation(0, ViolationKind::EffectConflict, c,
                         "concurrent effects of the JOIN block conflict on " + c);
      }
      SimState next = state;
      for (const auto& f : deletes) next.erase(f);
      for (const auto& g : grounded) {
        for (const auto& f : g.adds) next.insert(f);
      }
      state = std::move(next);
    } else {
      for (const auto& g : grounded) apply(state, g);
    }
  }
  report.final_state = std::move(state);
  return report;
}

Plan auto_parallelize(const Plan& plan, const ActionCatalog& catalog, const Domain& domain,
                      const SimState& initial) {
  const auto report = validate_plan(plan, catalog, domain, initial);
  if (!report.ok()) {
    throw Error(ErrorKind::InvalidInputPlan,
                "plan has " + std::to_string(report.violations.size()) + " violation(s):\n" + report.to_lines());
  }
  Plan out;
  out.provenance = plan.provenance;
  std::vector<GroundedAction> group;
  std::vector<GroundedEffects> group_effects;
  auto flush = [&] {
    if (group.size() == 1) {
      out.steps.push_back(PlanStep::single(std::move(group.front())));
    } else if (group.size() > 1) {
      out.steps.push_back(PlanStep::join(std::move(group)));
    }
    group.clear();
    group_effects.clear();
  };
  for (const auto& step : plan.steps) {
    if (step.kind == StepKind::Join) {
      flush();
      out.steps.push_back(step);
      continue;
    }
    const GroundedAction& action = step.actions.front();
    GroundedEffects effects = ground(*catalog.find(action.action_id), action);
    bool fits = true;
    for (std::size_t i = 0; i < group.size() && fits; ++i) {
      fits = group[i].agent_id != action.agent_id &&
             independent(group_effects[i], group[i].agent_id, effects, action.agent_id);
    }
    if (!fits) flush();
    group.push_back(action);
    group_effects.push_back(std::move(effects));
  }
  flush();
  return out;
}

}  // namespace llcoach

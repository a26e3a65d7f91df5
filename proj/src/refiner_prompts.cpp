#include <map>

#include "llcoach/data.hpp"
#include "llcoach/error.hpp"
#include "llcoach/plan.hpp"
#include "llcoach/prompt.hpp"
#include "llcoach/text.hpp"

namespace llcoach {

namespace {

using Values = std::map<std::string, std::string, std::less<>>;

std::string describe_grounding_actions(const std::vector<ActionSchema>& actions) {
  std::string out;
  for (const auto& a : actions) {
    if (!out.empty()) out += "\n";
    out += "- " + a.action_id + " {";
    for (std::size_t i = 0; i < a.args.size(); ++i) {
      if (i > 0) out += ", ";
      out += "'" + a.args[i].name + "': " + std::string(to_string(a.args[i].domain));
    }
    out += "}: " + a.description;
  }
  return out;
}

std::string describe_agents(const Domain& domain) {
  std::string out;
  for (const auto& role : domain.roles()) {
    if (!out.empty()) out += "\n";
    out += "- " + role.name + ": " + std::string(text::trim(role.description));
  }
  return out;
}

std::string scenario_lines(const Scenario& scenario) {
  std::string out;
  for (const auto& a : scenario.assignments) {
    if (!out.empty()) out += "\n";
    out += a.subject + " is at " + a.waypoint;
  }
  return out;
}

}  // namespace

ChatRequest build_grounding_prompt(const GroundingPromptInputs& inputs) {
  if (inputs.domain == nullptr) throw Error(ErrorKind::InvalidArgument, "grounding prompt needs a domain");
  if (inputs.retrieved_actions.empty()) {
    throw Error(ErrorKind::InvalidArgument, "grounding prompt needs at least one action");
  }
  if (text::trim(inputs.advice).empty()) throw Error(ErrorKind::InvalidArgument, "empty coach advice");
  const auto tmpl = PromptTemplate::parse(inputs.template_text ? std::string_view(*inputs.template_text)
                                                               : data::get("prompts/grounding.txt"));
  std::string ids;
  for (const auto& a : inputs.retrieved_actions) {
    if (!ids.empty()) ids += ", ";
    ids += a.action_id;
  }
  const Values values = {
      {"DOMAIN", inputs.domain->description()},
      {"PLANNING_GOAL", inputs.goal.text},
      {"ACTIONS", describe_grounding_actions(inputs.retrieved_actions)},
      {"ACTION_IDS", ids},
      {"AGENTS", describe_agents(*inputs.domain)},
      {"SCENARIO", scenario_lines(inputs.scenario)},
      {"ADVICE", std::string(text::trim(inputs.advice))},
  };
  return {render_template(tmpl.system, values), render_template(tmpl.user, values), std::nullopt};
}

SyncExamples SyncExamples::parse(std::string_view input) {
  SyncExamples out;
  bool have_positive = false;
  SyncExample* current = nullptr;
  for (const auto& raw : text::split_lines(input)) {
    const auto line = text::trim(raw);
    if (line.starts_with("POSITIVE:")) {
      if (have_positive) throw Error(ErrorKind::ParseError, "more than one POSITIVE example");
      have_positive = true;
      current = &out.positive;
      continue;
    }
    if (line.starts_with("NEGATIVE:")) {
      out.negatives.push_back({"", std::string(text::trim(line.substr(9)))});
      current = &out.negatives.back();
      continue;
    }
    if (line.empty()) continue;
    if (current == nullptr) throw Error(ErrorKind::ParseError, "example text before any header");
    current->plan += std::string(line) + "\n";
  }
  if (!have_positive) throw Error(ErrorKind::ParseError, "no POSITIVE example");
  return out;
}

ChatRequest build_sync_prompt(std::string_view grounded_plan_text, const SyncExamples& examples,
                              std::optional<std::string> template_text) {
  if (text::trim(grounded_plan_text).empty()) throw Error(ErrorKind::InvalidArgument, "empty plan text");
  if (examples.negatives.size() < 2) {
    throw Error(ErrorKind::InvalidArgument, "the synchronizer prompt needs at least two negative examples");
  }
  const auto tmpl =
      PromptTemplate::parse(template_text ? std::string_view(*template_text) : data::get("prompts/sync.txt"));
  std::string negatives;
  for (const auto& n : examples.negatives) {
    if (!negatives.empty()) negatives += "\n";
    negatives += "Invalid because " + n.reason + "\n" + std::string(text::trim(n.plan)) + "\n";
  }
  const Values values = {
      {"POSITIVE_EXAMPLE", std::string(text::trim(examples.positive.plan))},
      {"NEGATIVE_EXAMPLES", std::string(text::trim(negatives))},
      {"PLAN", std::string(text::trim(grounded_plan_text))},
  };
  return {render_template(tmpl.system, values), render_template(tmpl.user, values), std::nullopt};
}

}  // namespace llcoach

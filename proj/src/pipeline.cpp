#include "llcoach/pipeline.hpp"

#include <json.hpp>

#include <map>

#include "llcoach/data.hpp"
#include "llcoach/text.hpp"

namespace llcoach {

std::string_view stage_name(Stage stage) {
  switch (stage) {
    case Stage::Retrieval: return "Action Retrieval";
    case Stage::Coach: return "Coach";
    case Stage::Grounding: return "Plan Grounding";
    case Stage::Synchronizer: return "Plan Synchronizer";
    case Stage::Validation: return "Validation";
  }
  return "?";
}

std::string_view stage_failure_tag(Stage stage) {
  switch (stage) {
    case Stage::Retrieval: return "RetrievalFailed";
    case Stage::Coach: return "CoachParseFailed";
    case Stage::Grounding: return "GroundingFailed";
    case Stage::Synchronizer: return "SyncFailed";
    case Stage::Validation: return "ValidationFailed";
  }
  return "?";
}

PipelineError::PipelineError(Stage stage, ErrorKind cause, const std::string& message)
    : std::runtime_error(std::string(stage_failure_tag(stage)) + " (stage " +
                         std::to_string(static_cast<int>(stage)) + ", " + std::string(stage_name(stage)) +
                         "): " + message),
      stage_(stage),
      cause_(cause) {}

void RunManifest::add(std::string_view stage, std::string key, std::string value) {
  for (auto& [name, artifacts] : stages) {
    if (name == stage) {
      artifacts.emplace_back(std::move(key), std::move(value));
      return;
    }
  }
  stages.push_back({std::string(stage), {{std::move(key), std::move(value)}}});
}

const std::string* RunManifest::find(std::string_view stage, std::string_view key) const {
  for (const auto& [name, artifacts] : stages) {
    if (name != stage) continue;
    for (const auto& [k, v] : artifacts) {
      if (k == key) return &v;
    }
  }
  return nullptr;
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json doc;
  doc["config_hash"] = config_hash;
  doc["stages"] = nlohmann::ordered_json::array();
  for (const auto& [name, artifacts] : stages) {
    nlohmann::ordered_json entry;
    entry["stage"] = name;
    entry["artifacts"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : artifacts) entry["artifacts"][k] = v;
    doc["stages"].push_back(std::move(entry));
  }
  return doc.dump(2) + "\n";
}

std::string RunManifest::hash() const { return text::sha256_hex(to_json()); }

namespace {

template <typename F>
auto in_stage(Stage stage, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const PipelineError&) {
    throw;
  } catch (const Error& e) {
    throw PipelineError(stage, e.kind(), e.what());
  }
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += sep;
    out += s;
  }
  return out;
}

void record_exchange(RunManifest& m, std::string_view stage, const ChatRequest& request,
                     const ChatResponse& response) {
  m.add(stage, "prompt_system", request.system_text);
  m.add(stage, "prompt_user", request.user_text);
  if (request.image_ref) m.add(stage, "image_ref", *request.image_ref);
  m.add(stage, "fingerprint", request.fingerprint());
  m.add(stage, "response", response.text);
}

// Each agent's actions in plan order.
std::map<std::string, std::vector<GroundedAction>> per_agent(const Plan& plan) {
  std::map<std::string, std::vector<GroundedAction>> out;
  for (const auto& step : plan.steps) {
    for (const auto& a : step.actions) out[a.agent_id].push_back(a);
  }
  return out;
}

bool has_unassigned_own_agent(const WorldState& world) {
  for (const auto& a : world.agents) {
    if (a.agent.team == Team::Own && !a.agent.role) return true;
  }
  return false;
}

}  // namespace

GenerateResult run_generate(const GenerateInputs& in, ChatProvider& chat, const EmbeddingProvider& embedder) {
  GenerateResult out;
  RunManifest& m = out.manifest;
  m.config_hash = in.config_hash;

  // 1. Action retrieval.
  const auto retrieved = in_stage(Stage::Retrieval, [&] {
    if (in.k == 0) throw Error(ErrorKind::InvalidArgument, "k must be at least 1");
    const auto index = VectorIndex::build(in.catalog.schemas(), embedder);
    const std::string query = retrieval_query(in.goal, in.domain, in.query_includes_domain);
    auto actions = retrieve_actions(query, index, in.catalog, embedder, in.k);
    if (actions.empty()) throw Error(ErrorKind::EmptyIndex, "no actions retrieved");
    std::vector<std::string> ids;
    for (const auto& a : actions) ids.push_back(a.action_id);
    m.add("retrieval", "embedder", embedder.id());
    m.add("retrieval", "k", std::to_string(in.k));
    m.add("retrieval", "query", query);
    m.add("retrieval", "action_ids", join(ids, ","));
    return actions;
  });

  // 2. Coach: scenario description and advice.
  WorldState frame = in.frame;
  const auto coach = in_stage(Stage::Coach, [&] {
    CoachPromptInputs prompt_in;
    prompt_in.domain = &in.domain;
    prompt_in.retrieved_actions = retrieved;
    prompt_in.goal = in.goal;
    prompt_in.tactics = in.tactics;
    prompt_in.image_ref = in.image_ref;
    const ChatRequest request = build_coach_prompt(prompt_in);
    const ChatResponse response = chat.complete(request);
    record_exchange(m, "coach", request, response);
    CoachOutput parsed = parse_coach_response(response.text, in.domain);
    m.add("coach", "scenario", serialize_scenario(parsed.scenario));
    m.add("coach", "advice", parsed.advice);
    if (has_unassigned_own_agent(frame)) {
      const auto roles = retrieve_roles(frame, parsed.scenario, in.domain);
      frame = assign_roles(frame, roles);
      std::string lines;
      for (const auto& [agent, role] : roles) lines += agent + " " + role + "\n";
      m.add("coach", "role_assignment", lines);
    }
    return parsed;
  });

  // The geometric scenario keys the library and seeds validation.
  const Scenario scenario = in_stage(Stage::Coach, [&] { return scenario_from_world(frame, in.domain); });
  m.add("coach", "frame_scenario", serialize_scenario(scenario));
  const SimState initial = in_stage(Stage::Coach, [&] { return initial_state_from_scenario(scenario, in.domain); });

  // 3. Plan grounding.
  const Plan grounded = in_stage(Stage::Grounding, [&] {
    GroundingPromptInputs prompt_in;
    prompt_in.domain = &in.domain;
    prompt_in.retrieved_actions = retrieved;
    prompt_in.goal = in.goal;
    prompt_in.scenario = coach.scenario;
    prompt_in.advice = coach.advice;
    const ChatRequest request = build_grounding_prompt(prompt_in);
    const ChatResponse response = chat.complete(request);
    record_exchange(m, "grounding", request, response);
    Plan plan = parse_plan(extract_plan_text(response.text), in.catalog, in.domain);
    m.add("grounding", "plan", serialize_plan(plan));
    return plan;
  });

  // 4. Plan synchronizer.
  Plan synced = in_stage(Stage::Synchronizer, [&] {
    Plan plan;
    if (in.sync == SyncMode::Auto) {
      m.add("synchronizer", "mode", "auto");
      plan = auto_parallelize(grounded, in.catalog, in.domain, initial);
    } else {
      m.add("synchronizer", "mode", "model");
      const auto examples = SyncExamples::parse(data::get("prompts/sync_examples.txt"));
      const ChatRequest request = build_sync_prompt(serialize_plan(grounded), examples);
      const ChatResponse response = chat.complete(request);
      record_exchange(m, "synchronizer", request, response);
      plan = parse_plan(extract_plan_text(response.text), in.catalog, in.domain);
    }
    if (per_agent(plan) != per_agent(grounded)) {
      throw Error(ErrorKind::InvalidPlan, "the synchronized plan does not keep each agent's actions in order");
    }
    m.add("synchronizer", "plan", serialize_plan(plan));
    return plan;
  });
  synced.provenance = {in.frame_id, text::sha256_hex(coach.advice).substr(0, 16)};

  // 5. Validation.
  out.report = validate_plan(synced, in.catalog, in.domain, initial);
  m.add("validation", "initial_state", serialize_state(initial));
  m.add("validation", "report", out.report.to_lines());
  if (!out.report.ok()) {
    throw PipelineError(Stage::Validation, ErrorKind::InvalidPlan,
                        std::to_string(out.report.violations.size()) + " violation(s)\n" + out.report.to_lines());
  }

  out.record.plan = std::move(synced);
  out.record.scenario = scenario;
  out.record.frame_id = in.frame_id;
  out.record.created_at = 0;
  return out;
}

EvaluationResult run_evaluate(const Library& library, const std::vector<std::pair<std::string, WorldState>>& worlds,
                              const Domain& domain, const SimConfig& config, OpponentPolicyKind opponents,
                              std::uint64_t seed) {
  if (library.empty()) throw Error(ErrorKind::EmptyLibrary, "plan library is empty");
  if (worlds.empty()) throw Error(ErrorKind::EmptyScenarios, "no evaluation scenarios");
  config.validate();
  EvaluationResult out;
  std::vector<MatchResult> results;
  for (std::size_t i = 0; i < worlds.size(); ++i) {
    const auto& [name, world] = worlds[i];
    const Selection sel = select_plan(library, world, domain);
    const auto fsms = compile_fsm(sel.record->plan);
    EvaluationRun run;
    run.world_name = name;
    run.frame_id = sel.record->frame_id;
    run.distance = sel.distance;
    run.result = run_match(fsms, world, domain, config, {opponents, seed + i});
    results.push_back(run.result);
    out.runs.push_back(std::move(run));
  }
  out.metrics = aggregate(results);
  return out;
}

}  // namespace llcoach

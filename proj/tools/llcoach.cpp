// llcoach: offline plan generation, validation, simulation and evaluation.
//
// Exit codes: 0 success, 1 validation violations, 2 parse or configuration
// errors, 3 provider failures.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "llcoach/action_store.hpp"
#include "llcoach/chat.hpp"
#include "llcoach/coach.hpp"
#include "llcoach/data.hpp"
#include "llcoach/domain.hpp"
#include "llcoach/error.hpp"
#include "llcoach/executor.hpp"
#include "llcoach/pipeline.hpp"
#include "llcoach/plan.hpp"
#include "llcoach/plan_library.hpp"
#include "llcoach/text.hpp"

namespace {

using namespace llcoach;

constexpr int kOk = 0;
constexpr int kViolations = 1;
constexpr int kInputError = 2;
constexpr int kProviderError = 3;

bool is_provider_kind(ErrorKind kind) {
  return kind == ErrorKind::ProviderError || kind == ErrorKind::ReplayMiss || kind == ErrorKind::NetworkForbidden;
}

struct Common {
  std::string domain_path;
  std::string actions_path;
};

std::string load_text(const std::string& path, std::string_view bundled) {
  return path.empty() ? std::string(data::get(bundled)) : text::read_file(path);
}

Domain load_domain(const Common& c) {
  return parse_domain(load_text(c.domain_path, "domain.txt"), c.domain_path.empty() ? "<bundled domain>" : c.domain_path);
}

ActionCatalog load_catalog(const Common& c) {
  return ActionCatalog(parse_action_file(load_text(c.actions_path, "actions.txt"),
                                         c.actions_path.empty() ? "<bundled actions>" : c.actions_path));
}

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--domain", c.domain_path, "Domain file (default: bundled)");
  cmd->add_option("--actions", c.actions_path, "Action library file (default: bundled)");
}

std::unique_ptr<EmbeddingProvider> make_embedder(const std::string& path) {
  if (path.empty()) return std::make_unique<HashEmbeddingProvider>();
  return std::make_unique<RecordedEmbeddingProvider>(RecordedEmbeddingProvider::parse(text::read_file(path), path));
}

SimConfig load_sim_config(const std::string& path) {
  return path.empty() ? SimConfig{} : SimConfig::parse(text::read_file(path), path);
}

OpponentPolicyKind parse_opponents(const std::string& name) {
  const auto kind = opponent_policy_from_string(name);
  if (!kind) throw Error(ErrorKind::ConfigInvalid, "unknown opponent policy '" + name + "'");
  return *kind;
}

Library load_library_or_empty(const std::string& dir, const ActionCatalog& catalog, const Domain& domain) {
  if (!std::filesystem::exists(std::filesystem::path(dir) / "manifest.txt")) return {};
  return load_library(dir, catalog, domain);
}

// ---- ingest-actions -----------------------------------------------------------

struct IngestArgs {
  Common common;
  std::string embeddings;
  std::string out;
};

int cmd_ingest(const IngestArgs& a) {
  const ActionCatalog catalog = load_catalog(a.common);
  const auto embedder = make_embedder(a.embeddings);
  const VectorIndex index = VectorIndex::build(catalog.schemas(), *embedder);
  std::cout << "ingested " << catalog.size() << " action(s), embedder " << embedder->id() << ", dim "
            << index.dim() << "\n";
  for (const auto& s : catalog.schemas()) std::cout << "  " << s.action_id << "\n";
  if (!a.out.empty()) text::write_file(a.out, index.serialize());
  return kOk;
}

// ---- generate -----------------------------------------------------------------

struct GenerateArgs {
  Common common;
  std::string frame;
  std::string frame_id;
  std::string image;
  std::string transcript;
  std::string provider;
  std::string record;
  std::size_t k = kDefaultRetrievalK;
  std::string tactics;
  std::string library;
  std::string manifest;
  std::string embeddings;
  std::string sync = "model";
  bool goal_only_query = false;
};

std::string config_hash(const GenerateArgs& a, const std::string& domain_text, const std::string& actions_text,
                        const std::string& frame_text) {
  std::string canon;
  auto field = [&](std::string_view name, std::string_view value) {
    canon += std::string(name) + " " + std::to_string(value.size()) + "\n" + std::string(value) + "\n";
  };
  field("domain", domain_text);
  field("actions", actions_text);
  field("frame", frame_text);
  field("frame_id", a.frame_id);
  field("image", a.image);
  field("k", std::to_string(a.k));
  field("tactics", a.tactics);
  field("sync", a.sync);
  field("query", a.goal_only_query ? "goal" : "goal+domain");
  field("embeddings", a.embeddings.empty() ? "hash-bow" : text::read_file(a.embeddings));
  return text::sha256_hex(canon);
}

int cmd_generate(const GenerateArgs& a) {
  if (a.k < 1) throw Error(ErrorKind::ConfigInvalid, "--k must be at least 1");
  if (!a.transcript.empty() && !a.provider.empty()) {
    throw Error(ErrorKind::ConfigInvalid, "--transcript and --provider are mutually exclusive");
  }
  if (a.transcript.empty() && a.provider.empty()) {
    throw Error(ErrorKind::ConfigInvalid, "one of --transcript or --provider is required");
  }
  const std::string domain_text = load_text(a.common.domain_path, "domain.txt");
  const std::string actions_text = load_text(a.common.actions_path, "actions.txt");
  const std::string frame_text = text::read_file(a.frame);

  GenerateInputs in;
  in.domain = parse_domain(domain_text, a.common.domain_path.empty() ? "<bundled domain>" : a.common.domain_path);
  in.catalog = ActionCatalog(parse_action_file(actions_text, a.common.actions_path.empty() ? "<bundled actions>" : a.common.actions_path));
  in.frame = parse_world(frame_text, in.domain.field(), a.frame);
  in.frame_id = a.frame_id;
  if (!a.image.empty()) in.image_ref = a.image;
  in.tactics.text = a.tactics;
  in.k = a.k;
  in.query_includes_domain = !a.goal_only_query;
  if (a.sync == "auto") {
    in.sync = SyncMode::Auto;
  } else if (a.sync != "model") {
    throw Error(ErrorKind::ConfigInvalid, "--sync must be 'model' or 'auto'");
  }
  in.config_hash = config_hash(a, domain_text, actions_text, frame_text);
  const auto embedder = make_embedder(a.embeddings);

  // Replay mode: no live provider is constructed and the network is locked.
  std::optional<NetworkGuard> guard;
  std::unique_ptr<ChatProvider> base;
  if (!a.transcript.empty()) {
    guard.emplace();
    base = std::make_unique<ReplayProvider>(Transcript::parse(text::read_file(a.transcript), a.transcript));
  } else if (a.provider.starts_with("scripted:")) {
    base = std::make_unique<ScriptedProvider>(ScriptedProvider::parse(text::read_file(a.provider.substr(9))));
  } else if (a.provider == "openai") {
    OpenAIConfig config;
    const char* key = std::getenv(kApiKeyEnv);
    if (key == nullptr || *key == '\0') {
      throw Error(ErrorKind::ProviderError, std::string(kApiKeyEnv) + " is not set");
    }
    config.api_key = key;
    base = std::make_unique<OpenAIChatProvider>(config);
  } else {
    throw Error(ErrorKind::ConfigInvalid, "unknown provider '" + a.provider + "'");
  }
  std::optional<RecordingProvider> recorder;
  ChatProvider* chat = base.get();
  if (!a.record.empty()) chat = &recorder.emplace(*base);

  auto save_recording = [&] {
    if (recorder) text::write_file(a.record, recorder->transcript().serialize());
  };
  GenerateResult result;
  try {
    result = run_generate(in, *chat, *embedder);
  } catch (const PipelineError& e) {
    save_recording();
    std::cerr << "llcoach: " << e.what() << "\n";
    if (is_provider_kind(e.cause())) return kProviderError;
    return e.stage() == Stage::Validation ? kViolations : kInputError;
  }
  save_recording();
  if (!a.manifest.empty()) text::write_file(a.manifest, result.manifest.to_json());
  if (!a.library.empty()) {
    Library lib = load_library_or_empty(a.library, in.catalog, in.domain);
    result.record.created_at = lib.next_timestamp();
    lib = add(lib, result.record, in.catalog, in.domain);
    save_library(lib, a.library);
  }
  std::cout << serialize_plan(result.record.plan);
  std::cerr << "manifest hash " << result.manifest.hash() << "\n";
  return kOk;
}

// ---- validate ----------------------------------------------------------------

struct ValidateArgs {
  Common common;
  std::string plan;
  std::string state;
  std::string scenario;
  std::string world;
  std::string format = "text";
  bool strict_join = false;
};

int cmd_validate(const ValidateArgs& a) {
  if (a.format != "text" && a.format != "lines") throw Error(ErrorKind::ConfigInvalid, "--format must be text or lines");
  const Domain domain = load_domain(a.common);
  const ActionCatalog catalog = load_catalog(a.common);
  const int given = !a.state.empty() + !a.scenario.empty() + !a.world.empty();
  if (given > 1) throw Error(ErrorKind::ConfigInvalid, "give at most one of --state, --scenario, --world");
  SimState initial;
  if (!a.state.empty()) {
    initial = parse_state(text::read_file(a.state), a.state);
  } else if (!a.scenario.empty()) {
    initial = initial_state_from_scenario(parse_scenario_block(text::read_file(a.scenario), domain), domain);
  } else if (!a.world.empty()) {
    const auto world = parse_world(text::read_file(a.world), domain.field(), a.world);
    initial = initial_state_from_scenario(scenario_from_world(world, domain), domain);
  }
  Plan plan;
  try {
    plan = parse_plan(text::read_file(a.plan), catalog, domain, {a.strict_join});
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Io) throw;
    throw Error(e.kind(), a.plan + ": " + e.detail());
  }
  const auto report = validate_plan(plan, catalog, domain, initial);
  std::cout << (a.format == "lines" ? report.to_lines() : report.to_text());
  return report.ok() ? kOk : kViolations;
}

// ---- simulate -----------------------------------------------------------------

struct SimulateArgs {
  Common common;
  std::string plan;
  std::string world;
  std::string sim_config;
  std::string opponents = "static";
  std::uint64_t seed = 0;
  std::string trace;
};

int cmd_simulate(const SimulateArgs& a) {
  const Domain domain = load_domain(a.common);
  const ActionCatalog catalog = load_catalog(a.common);
  const SimConfig config = load_sim_config(a.sim_config);
  const Plan plan = parse_plan(text::read_file(a.plan), catalog, domain);
  const auto world = parse_world(text::read_file(a.world), domain.field(), a.world);
  const auto result = run_match(compile_fsm(plan), world, domain, config, {parse_opponents(a.opponents), a.seed});
  if (a.trace.empty()) {
    std::cout << result.trace_text();
  } else {
    text::write_file(a.trace, result.trace_text());
  }
  std::cout << "success " << (result.success ? "yes" : "no") << "\n"
            << "passes " << result.passes << "\n"
            << "scoring_time " << (result.scoring_time ? text::format_fixed(*result.scoring_time, 3) : "none") << "\n"
            << "end " << result.end_reason << "\n";
  return kOk;
}

// ---- evaluate -----------------------------------------------------------------

struct EvaluateArgs {
  Common common;
  std::string library;
  std::string scenarios;
  std::string sim_config;
  std::string opponents = "static";
  std::uint64_t seed = 0;
  std::string format = "table";
  std::string label = "LLCoach";
  std::string runs_out;
};

int cmd_evaluate(const EvaluateArgs& a) {
  const auto format = report_format_from_string(a.format);
  if (!format) throw Error(ErrorKind::ConfigInvalid, "--format must be table, tsv or csv");
  const Domain domain = load_domain(a.common);
  const ActionCatalog catalog = load_catalog(a.common);
  const SimConfig config = load_sim_config(a.sim_config);
  const Library lib = load_library(a.library, catalog, domain);
  const auto worlds = parse_world_set(text::read_file(a.scenarios), domain.field(), a.scenarios);
  const auto eval = run_evaluate(lib, worlds, domain, config, parse_opponents(a.opponents), a.seed);
  if (!a.runs_out.empty()) {
    std::string runs;
    for (const auto& r : eval.runs) {
      runs += r.world_name + "\t" + r.frame_id + "\t" + text::format_fixed(r.distance, 3) + "\t" +
              (r.result.success ? "GOAL" : r.result.end_reason) + "\t" + std::to_string(r.result.passes) + "\t" +
              (r.result.scoring_time ? text::format_fixed(*r.result.scoring_time, 3) : "-") + "\n";
    }
    text::write_file(a.runs_out, runs);
  }
  std::cout << format_report(eval.metrics, a.label, *format);
  return kOk;
}

// ---- library ------------------------------------------------------------------

struct LibraryArgs {
  Common common;
  std::string dir;
  std::string plan;
  std::string scenario;
  std::string world;
  std::string frame_id;
  std::size_t clusters = 0;
};

int cmd_library_ls(const LibraryArgs& a) {
  const Domain domain = load_domain(a.common);
  const Library lib = load_library(a.dir, load_catalog(a.common), domain);
  for (const auto& r : lib.records) {
    std::cout << r.frame_id << "\t" << r.created_at << "\t" << r.plan.steps.size() << " step(s)\t"
              << r.plan.action_count() << " action(s)\n";
  }
  if (a.clusters > 0) {
    for (const auto& c : cluster_scenarios(lib, a.clusters, domain)) {
      std::cout << "cluster " << c.medoid_frame_id << ":";
      for (const auto& m : c.members) std::cout << " " << m;
      std::cout << "\n";
    }
  }
  return kOk;
}

int cmd_library_add(const LibraryArgs& a) {
  const Domain domain = load_domain(a.common);
  const ActionCatalog catalog = load_catalog(a.common);
  if (a.scenario.empty() == a.world.empty()) throw Error(ErrorKind::ConfigInvalid, "give exactly one of --scenario, --world");
  PlanRecord record;
  record.frame_id = a.frame_id;
  record.plan = parse_plan(text::read_file(a.plan), catalog, domain);
  record.plan.provenance.frame_id = a.frame_id;
  record.scenario = !a.scenario.empty()
                        ? parse_scenario_block(text::read_file(a.scenario), domain)
                        : scenario_from_world(parse_world(text::read_file(a.world), domain.field(), a.world), domain);
  Library lib = load_library_or_empty(a.dir, catalog, domain);
  record.created_at = lib.next_timestamp();
  lib = add(lib, std::move(record), catalog, domain);
  save_library(lib, a.dir);
  std::cout << "library " << a.dir << " now holds " << lib.size() << " record(s)\n";
  return kOk;
}

int cmd_library_select(const LibraryArgs& a) {
  const Domain domain = load_domain(a.common);
  const Library lib = load_library(a.dir, load_catalog(a.common), domain);
  const auto world = parse_world(text::read_file(a.world), domain.field(), a.world);
  const Selection sel = a.clusters > 0 ? select_plan_clustered(lib, world, domain, a.clusters)
                                       : select_plan(lib, world, domain);
  std::cout << "frame " << sel.record->frame_id << " distance " << text::format_fixed(sel.distance, 3) << "\n"
            << serialize_plan(sel.record->plan);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Offline multi-robot plan generation from a coach model"};
  app.require_subcommand(1);

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest-actions", "Parse an action library and build its embedding index");
  add_common(c_ingest, ingest.common);
  c_ingest->add_option("--embeddings", ingest.embeddings, "Recorded embeddings (default: hash embedder)");
  c_ingest->add_option("--out", ingest.out, "Write the index in recorded-embedding format");

  GenerateArgs gen;
  auto* c_gen = app.add_subcommand("generate", "Run retrieval, coach, grounding and synchronization on one frame");
  add_common(c_gen, gen.common);
  c_gen->add_option("--frame", gen.frame, "World state of the frame")->required();
  c_gen->add_option("--frame-id", gen.frame_id, "Identifier of the frame")->required();
  c_gen->add_option("--image", gen.image, "Image path sent to the vision model");
  c_gen->add_option("--transcript", gen.transcript, "Replay responses from a transcript (no network)");
  c_gen->add_option("--provider", gen.provider, "Live provider: openai | scripted:<file>");
  c_gen->add_option("--record", gen.record, "Write every exchange to this transcript");
  c_gen->add_option("--k", gen.k, "Number of retrieved actions");
  c_gen->add_option("--tactics", gen.tactics, "Tactic modifier appended to the coach prompt");
  c_gen->add_option("--library", gen.library, "Add the resulting plan to this library directory");
  c_gen->add_option("--manifest", gen.manifest, "Write the run manifest (JSON)");
  c_gen->add_option("--embeddings", gen.embeddings, "Recorded embeddings (default: hash embedder)");
  c_gen->add_option("--sync", gen.sync, "Synchronizer: model | auto");
  c_gen->add_flag("--goal-only-query", gen.goal_only_query, "Retrieve with the planning goal alone");

  ValidateArgs val;
  auto* c_val = app.add_subcommand("validate", "Check a plan against the action library");
  add_common(c_val, val.common);
  c_val->add_option("--plan", val.plan, "Plan file")->required();
  c_val->add_option("--state", val.state, "Initial facts, one per line");
  c_val->add_option("--scenario", val.scenario, "Initial scenario block");
  c_val->add_option("--world", val.world, "Initial world state");
  c_val->add_option("--format", val.format, "text | lines");
  c_val->add_flag("--strict-join", val.strict_join, "Reject repeated agents in a JOIN while parsing");

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Run one plan in the kinematic simulator");
  add_common(c_sim, sim.common);
  c_sim->add_option("--plan", sim.plan, "Plan file")->required();
  c_sim->add_option("--world", sim.world, "Initial world state")->required();
  c_sim->add_option("--sim-config", sim.sim_config, "Simulator configuration");
  c_sim->add_option("--opponents", sim.opponents, "static | nearest_intercept");
  c_sim->add_option("--seed", sim.seed, "Opponent policy seed");
  c_sim->add_option("--trace", sim.trace, "Write the event trace here instead of stdout");

  EvaluateArgs ev;
  auto* c_ev = app.add_subcommand("evaluate", "Select, simulate and score a plan for each scenario");
  add_common(c_ev, ev.common);
  c_ev->add_option("--library", ev.library, "Library directory")->required();
  c_ev->add_option("--scenarios", ev.scenarios, "World set file")->required();
  c_ev->add_option("--sim-config", ev.sim_config, "Simulator configuration");
  c_ev->add_option("--opponents", ev.opponents, "static | nearest_intercept");
  c_ev->add_option("--seed", ev.seed, "Base seed; run i uses seed + i");
  c_ev->add_option("--format", ev.format, "table | tsv | csv");
  c_ev->add_option("--label", ev.label, "Report column label");
  c_ev->add_option("--runs-out", ev.runs_out, "Write per-run results (TSV)");

  LibraryArgs lib;
  auto* c_lib = app.add_subcommand("library", "Inspect or edit a plan library");
  c_lib->require_subcommand(1);
  auto* c_ls = c_lib->add_subcommand("ls", "List records");
  auto* c_add = c_lib->add_subcommand("add", "Add a validated plan");
  auto* c_sel = c_lib->add_subcommand("select", "Select the plan closest to a world");
  for (auto* c : {c_ls, c_add, c_sel}) {
    add_common(c, lib.common);
    c->add_option("--library", lib.dir, "Library directory")->required();
  }
  c_ls->add_option("--clusters", lib.clusters, "Also print k-medoids clusters");
  c_add->add_option("--plan", lib.plan, "Plan file")->required();
  c_add->add_option("--scenario", lib.scenario, "Scenario block file");
  c_add->add_option("--world", lib.world, "World state file");
  c_add->add_option("--frame-id", lib.frame_id, "Record identifier")->required();
  c_sel->add_option("--world", lib.world, "World state file")->required();
  c_sel->add_option("--clusters", lib.clusters, "Cluster first with this k");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (c_ingest->parsed()) return cmd_ingest(ingest);
    if (c_gen->parsed()) return cmd_generate(gen);
    if (c_val->parsed()) return cmd_validate(val);
    if (c_sim->parsed()) return cmd_simulate(sim);
    if (c_ev->parsed()) return cmd_evaluate(ev);
    if (c_ls->parsed()) return cmd_library_ls(lib);
    if (c_add->parsed()) return cmd_library_add(lib);
    if (c_sel->parsed()) return cmd_library_select(lib);
  } catch (const Error& e) {
    std::cerr << "llcoach: " << e.what() << "\n";
    return is_provider_kind(e.kind()) ? kProviderError : kInputError;
  } catch (const std::exception& e) {
    std::cerr << "llcoach: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}

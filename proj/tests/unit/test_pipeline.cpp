#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>

#include <sys/wait.h>
#include <unistd.h>

#include "llcoach/pipeline.hpp"
#include "llcoach/text.hpp"
#include "oracles.hpp"

using namespace llcoach;
using oracle::error_kind;

namespace {

const Domain& dom() { return oracle::bundled_domain(); }
const ActionCatalog& cat() { return oracle::bundled_catalog(); }

GenerateInputs golden_inputs() {
  GenerateInputs in;
  in.domain = dom();
  in.catalog = cat();
  in.frame = parse_world(oracle::read(oracle::fixture("golden/frame.world")));
  in.frame_id = "golden-001";
  in.config_hash = "test";
  return in;
}

Transcript golden_transcript() { return Transcript::parse(oracle::read(oracle::fixture("golden/transcript.txt"))); }

std::vector<std::pair<std::string, WorldState>> golden_worlds() {
  return parse_world_set(oracle::read(oracle::fixture("golden/scenarios.worlds")));
}

struct CliRun {
  int code = -1;
  std::string out;
};

CliRun cli(const std::string& args) {
  const std::string cmd = std::string(LLCOACH_CLI) + " " + args + " 2>/dev/null";
  CliRun r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string fx(const std::string& rel) { return "'" + oracle::fixture(rel) + "'"; }

}  // namespace

TEST(Pipeline, GoldenReplayProducesValidPlan) {
  ReplayProvider replay(golden_transcript());
  NetworkGuard guard;
  const auto result = run_generate(golden_inputs(), replay, HashEmbeddingProvider{});
  EXPECT_TRUE(result.report.ok());
  EXPECT_TRUE(replay.unused().empty());
  const Library lib = load_library(oracle::fixture("golden/library"), cat(), dom());
  EXPECT_EQ(result.record.plan.steps, lib.find("golden-001")->plan.steps);
  EXPECT_EQ(result.record.plan.provenance.frame_id, "golden-001");
  EXPECT_EQ(result.record.plan.provenance.advice_hash.size(), 16u);
  ASSERT_NE(result.manifest.find("coach", "role_assignment"), nullptr);
  EXPECT_NE(result.manifest.find("coach", "role_assignment")->find("red_3 STRIKER"), std::string::npos);
}

TEST(Pipeline, ManifestIsDeterministic) {
  ReplayProvider a(golden_transcript());
  ReplayProvider b(golden_transcript());
  const auto ra = run_generate(golden_inputs(), a, HashEmbeddingProvider{});
  const auto rb = run_generate(golden_inputs(), b, HashEmbeddingProvider{});
  EXPECT_EQ(ra.manifest.to_json(), rb.manifest.to_json());
  EXPECT_EQ(ra.manifest.hash(), rb.manifest.hash());
  std::vector<std::string> stages;
  for (const auto& [name, artifacts] : ra.manifest.stages) stages.push_back(name);
  EXPECT_EQ(stages, (std::vector<std::string>{"retrieval", "coach", "grounding", "synchronizer", "validation"}));
}

TEST(Pipeline, MissingSyncResponseFailsAtStageFour) {
  const Transcript full = golden_transcript();
  ASSERT_EQ(full.entries().size(), 3u);
  Transcript partial;
  partial.add(full.entries()[0]);
  partial.add(full.entries()[1]);
  ReplayProvider replay(partial);
  try {
    run_generate(golden_inputs(), replay, HashEmbeddingProvider{});
    FAIL() << "expected a pipeline error";
  } catch (const PipelineError& e) {
    EXPECT_EQ(e.stage(), Stage::Synchronizer);
    EXPECT_EQ(e.cause(), ErrorKind::ReplayMiss);
    EXPECT_EQ(std::string(e.what()).rfind("SyncFailed (stage 4, Plan Synchronizer)", 0), 0u) << e.what();
  }
}

TEST(Pipeline, AutoSyncNeedsNoThirdResponse) {
  const Transcript full = golden_transcript();
  Transcript partial;
  partial.add(full.entries()[0]);
  partial.add(full.entries()[1]);
  ReplayProvider replay(partial);
  GenerateInputs in = golden_inputs();
  in.sync = SyncMode::Auto;
  const auto result = run_generate(in, replay, HashEmbeddingProvider{});
  EXPECT_TRUE(result.report.ok());
  EXPECT_EQ(result.record.plan.action_count(), 6u);
}

TEST(Pipeline, CoachParseFailureIsStageTwo) {
  ScriptedProvider scripted({"no scenario here"});
  try {
    run_generate(golden_inputs(), scripted, HashEmbeddingProvider{});
    FAIL() << "expected a pipeline error";
  } catch (const PipelineError& e) {
    EXPECT_EQ(e.stage(), Stage::Coach);
    EXPECT_EQ(e.cause(), ErrorKind::MissingScenarioBlock);
  }
}

TEST(Pipeline, GoldenReportMatches) {
  const Library lib = load_library(oracle::fixture("golden/library"), cat(), dom());
  const auto result = run_evaluate(lib, golden_worlds(), dom(), SimConfig{}, OpponentPolicyKind::Static, 0);
  EXPECT_EQ(result.runs.size(), 8u);
  EXPECT_EQ(format_report(result.metrics, "LLCoach"), oracle::read(oracle::fixture("golden/report.txt")));
}

TEST(Pipeline, EvaluateErrors) {
  EXPECT_EQ(error_kind([] { run_evaluate(Library{}, golden_worlds(), dom(), SimConfig{}, {}, 0); }),
            ErrorKind::EmptyLibrary);
  const Library lib = load_library(oracle::fixture("golden/library"), cat(), dom());
  EXPECT_EQ(error_kind([&] { run_evaluate(lib, {}, dom(), SimConfig{}, {}, 0); }), ErrorKind::EmptyScenarios);
}

// ---- command line ------------------------------------------------------------

TEST(Cli, GenerateReplay) {
  const CliRun r = cli("generate --frame " + fx("golden/frame.world") + " --frame-id golden-001 --transcript " +
                    fx("golden/transcript.txt"));
  EXPECT_EQ(r.code, 0);
  const Library lib = load_library(oracle::fixture("golden/library"), cat(), dom());
  EXPECT_EQ(r.out, serialize_plan(lib.find("golden-001")->plan));
}

TEST(Cli, GenerateReplayIgnoresApiKey) {
  ::setenv(kApiKeyEnv, "", 1);
  const CliRun r = cli("generate --frame " + fx("golden/frame.world") + " --frame-id g --transcript " +
                    fx("golden/transcript.txt"));
  ::unsetenv(kApiKeyEnv);
  EXPECT_EQ(r.code, 0);
}

TEST(Cli, ValidateExitCodes) {
  EXPECT_EQ(cli("validate --plan " + fx("corpus/03_pass_kick.plan") + " --state " + fx("corpus/03_pass_kick.state")).code,
            0);
  const CliRun bad = cli("validate --plan " + fx("mutations/01_self_join.plan") + " --state " +
                      fx("mutations/01_self_join.state") + " --format lines");
  EXPECT_EQ(bad.code, 1);
  EXPECT_EQ(bad.out.rfind("STEP 2: SelfJoin", 0), 0u) << bad.out;
  EXPECT_EQ(cli("validate --plan " + fx("mutations/01_self_join.plan") + " --strict-join").code, 2);
  EXPECT_EQ(cli("validate --plan " + fx("mutations/08_unknown_action.plan")).code, 2);
  EXPECT_EQ(cli("validate --plan /nonexistent.plan").code, 2);
}

TEST(Cli, ReplayMissIsProviderError) {
  EXPECT_EQ(cli("generate --frame " + fx("golden/frame.world") + " --frame-id g --tactics 'Go left.' --transcript " +
                fx("golden/transcript.txt"))
                .code,
            3);
}

TEST(Cli, EvaluateMatchesGoldenReport) {
  const CliRun r = cli("evaluate --library " + fx("golden/library") + " --scenarios " + fx("golden/scenarios.worlds"));
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, oracle::read(oracle::fixture("golden/report.txt")));
}

TEST(Cli, SimulateIsReproducible) {
  const std::string args = "simulate --plan " + fx("corpus/03_pass_kick.plan") + " --world " +
                           fx("golden/frame.world") + " --opponents nearest_intercept --seed 3";
  // The golden frame has no roles, so the simulator cannot resolve the plan.
  EXPECT_EQ(cli(args).code, 2);
  const auto worlds = oracle::read(oracle::fixture("golden/scenarios.worlds"));
  const auto dir = std::filesystem::temp_directory_path() / ("llcoach_cli_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  text::write_file((dir / "w.world").string(), serialize_world(golden_worlds().front().second));
  const std::string ok = "simulate --plan " + fx("corpus/03_pass_kick.plan") + " --world '" +
                         (dir / "w.world").string() + "' --opponents nearest_intercept --seed 3";
  const CliRun a = cli(ok);
  const CliRun b = cli(ok);
  std::filesystem::remove_all(dir);
  EXPECT_EQ(a.out, b.out);
  EXPECT_FALSE(a.out.empty());
}

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "llcoach/action_store.hpp"
#include "llcoach/chat.hpp"
#include "llcoach/coach.hpp"
#include "llcoach/domain.hpp"
#include "llcoach/error.hpp"
#include "llcoach/executor.hpp"
#include "llcoach/plan.hpp"
#include "llcoach/plan_library.hpp"

namespace llcoach {

enum class Stage { Retrieval = 1, Coach = 2, Grounding = 3, Synchronizer = 4, Validation = 5 };

std::string_view stage_name(Stage stage);
/// RetrievalFailed, CoachParseFailed, GroundingFailed, SyncFailed, ValidationFailed.
std::string_view stage_failure_tag(Stage stage);

/// A hard failure inside one pipeline stage; wraps the underlying error kind.
class PipelineError : public std::runtime_error {
 public:
  PipelineError(Stage stage, ErrorKind cause, const std::string& message);

  Stage stage() const noexcept { return stage_; }
  ErrorKind cause() const noexcept { return cause_; }

 private:
  Stage stage_;
  ErrorKind cause_;
};

enum class SyncMode { Model, Auto };

struct GenerateInputs {
  Domain domain;
  ActionCatalog catalog;
  WorldState frame;
  std::string frame_id;
  std::optional<std::string> image_ref;
  PlanningGoal goal = default_planning_goal();
  Tactics tactics;
  std::size_t k = kDefaultRetrievalK;
  bool query_includes_domain = true;
  SyncMode sync = SyncMode::Model;
  std::string config_hash;
};

/// Ordered record of every artifact a run produced, stage by stage.
struct RunManifest {
  std::string config_hash;
  std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>> stages;

  void add(std::string_view stage, std::string key, std::string value);
  const std::string* find(std::string_view stage, std::string_view key) const;
  /// Canonical JSON (stable key order, two-space indent).
  std::string to_json() const;
  /// SHA-256 of to_json().
  std::string hash() const;
};

struct GenerateResult {
  RunManifest manifest;
  PlanRecord record;
  ValidationReport report;
};

/// Action Retrieval -> Coach -> Plan Grounding -> Plan Synchronizer, then
/// validation. Throws PipelineError tagged with the failing stage. The
/// returned record carries created_at = 0; callers stamp it when adding it
/// to a library.
GenerateResult run_generate(const GenerateInputs& inputs, ChatProvider& chat,
                            const EmbeddingProvider& embedder);

struct EvaluationRun {
  std::string world_name;
  std::string frame_id;
  double distance = 0.0;
  MatchResult result;
};

struct EvaluationResult {
  std::vector<EvaluationRun> runs;
  AggregateMetrics metrics;
};

/// Selects, compiles, and simulates one plan per world. Run i uses opponent
/// seed `seed + i`. Throws EmptyLibrary, EmptyScenarios.
EvaluationResult run_evaluate(const Library& library,
                              const std::vector<std::pair<std::string, WorldState>>& worlds,
                              const Domain& domain, const SimConfig& config,
                              OpponentPolicyKind opponents, std::uint64_t seed);

}  // namespace llcoach

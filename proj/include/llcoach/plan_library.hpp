#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "llcoach/action_store.hpp"
#include "llcoach/domain.hpp"
#include "llcoach/plan.hpp"

namespace llcoach {

struct PlanRecord {
  Plan plan;
  Scenario scenario;
  std::string frame_id;
  std::int64_t created_at = 0;  // logical clock, ordered by insertion

  friend bool operator==(const PlanRecord&, const PlanRecord&) = default;
};

struct Library {
  std::vector<PlanRecord> records;

  const PlanRecord* find(std::string_view frame_id) const;
  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
  /// One past the largest created_at.
  std::int64_t next_timestamp() const;

  friend bool operator==(const Library&, const Library&) = default;
};

/// Returns a copy with `record` appended. The plan must validate cleanly from
/// the state implied by its scenario. Throws DuplicateFrameId, InvalidPlan.
Library add(const Library& library, PlanRecord record, const ActionCatalog& catalog,
            const Domain& domain);

struct Selection {
  const PlanRecord* record = nullptr;
  Scenario live_scenario;
  double distance = 0.0;
};

/// Record whose scenario is closest to scenario_from_world(world); ties go to
/// the earliest created_at, then frame_id. Throws EmptyLibrary.
Selection select_plan(const Library& library, const WorldState& world, const Domain& domain);

struct Cluster {
  Scenario centroid;
  std::string medoid_frame_id;
  std::vector<std::string> members;
};

/// Deterministic k-medoids under scenario_distance, seeded farthest-first
/// from the lexicographically smallest frame_id. Throws KTooLarge,
/// InvalidArgument (k == 0).
std::vector<Cluster> cluster_scenarios(const Library& library, std::size_t k,
                                       const Domain& domain);

/// Cluster-then-match: nearest medoid first, then nearest record inside it.
Selection select_plan_clustered(const Library& library, const WorldState& world,
                                const Domain& domain, std::size_t k);

/// Directory layout: `manifest.txt` (`FRAME <id> <created_at>` lines) plus
/// `<id>.plan` and `<id>.scenario` per record.
void save_library(const Library& library, const std::string& directory);
Library load_library(const std::string& directory, const ActionCatalog& catalog,
                     const Domain& domain);

}  // namespace llcoach

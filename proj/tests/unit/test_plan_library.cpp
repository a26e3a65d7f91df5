#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <random>

#include <unistd.h>

#include "llcoach/plan_library.hpp"
#include "oracles.hpp"

using namespace llcoach;
using oracle::error_kind;

namespace {

const Domain& dom() { return oracle::bundled_domain(); }
const ActionCatalog& cat() { return oracle::bundled_catalog(); }

const Plan& kick_plan() {
  static const Plan p = parse_plan("kick_to_goal STRIKER {}", cat(), dom());
  return p;
}

// Scenario where STRIKER holds the ball, so the kick plan validates.
Scenario striker_scenario(std::mt19937_64& rng) {
  Scenario s = oracle::random_scenario(rng, dom());
  std::string wp;
  for (auto& a : s.assignments) {
    if (a.subject == "BALL") wp = a.waypoint;
  }
  std::erase_if(s.assignments, [](const Assignment& a) { return a.subject == "STRIKER"; });
  s.assignments.insert(s.assignments.begin(), {"STRIKER", wp});
  // Keep STRIKER as the first own role at the ball's waypoint.
  std::erase_if(s.assignments, [&](const Assignment& a) {
    return a.subject != "STRIKER" && dom().has_role(a.subject) && a.waypoint == wp;
  });
  return s;
}

Library random_library(std::mt19937_64& rng, std::size_t n) {
  Library lib;
  for (std::size_t i = 0; i < n; ++i) {
    PlanRecord r{kick_plan(), striker_scenario(rng), "f" + std::to_string(1000 + (i * 37) % 1000),
                 lib.next_timestamp()};
    lib = add(lib, r, cat(), dom());
  }
  return lib;
}

}  // namespace

TEST(Library, AddChecks) {
  std::mt19937_64 rng(1);
  Library lib;
  const PlanRecord good{kick_plan(), striker_scenario(rng), "a", 1};
  lib = add(lib, good, cat(), dom());
  EXPECT_EQ(lib.size(), 1u);
  EXPECT_EQ(lib.next_timestamp(), 2);
  EXPECT_EQ(error_kind([&] { add(lib, good, cat(), dom()); }), ErrorKind::DuplicateFrameId);
  PlanRecord bad = good;
  bad.frame_id = "b";
  bad.scenario = {{{"STRIKER", "CENTER_FIELD"}, {"BALL", "OUR_GOAL"}}};
  EXPECT_EQ(error_kind([&] { add(lib, bad, cat(), dom()); }), ErrorKind::InvalidPlan);
  bad.frame_id = "../escape";
  EXPECT_EQ(error_kind([&] { add(lib, bad, cat(), dom()); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(lib.size(), 1u);
}

TEST(Library, SelectMatchesBruteForce) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const Library lib = random_library(rng, 1 + trial * 2);
    for (int q = 0; q < 5; ++q) {
      const WorldState w = oracle::random_world(rng, dom(), 5, 2, true);
      const Selection sel = select_plan(lib, w, dom());
      EXPECT_EQ(sel.record->frame_id, oracle::brute_force_select(lib, scenario_from_world(w, dom()), dom()));
    }
  }
  EXPECT_EQ(error_kind([] { select_plan(Library{}, WorldState{}, dom()); }), ErrorKind::EmptyLibrary);
}

TEST(Library, SelectTieGoesToEarliest) {
  const Scenario s{{{"STRIKER", "KICKING_POSITION"}, {"BALL", "KICKING_POSITION"}}};
  Library lib;
  lib = add(lib, {kick_plan(), s, "z-late", 5}, cat(), dom());
  lib = add(lib, {kick_plan(), s, "y-early", 2}, cat(), dom());
  lib = add(lib, {kick_plan(), s, "x-early", 2}, cat(), dom());
  const WorldState w = parse_world("AGENT r OWN STRIKER 2.8 0 0\nBALL 2.8 0\n");
  EXPECT_EQ(select_plan(lib, w, dom()).record->frame_id, "x-early");
}

TEST(Library, SingleClusterIsTheMedoid) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Library lib = random_library(rng, 3 + trial);
    const auto clusters = cluster_scenarios(lib, 1, dom());
    ASSERT_EQ(clusters.size(), 1u);
    EXPECT_EQ(clusters[0].medoid_frame_id, oracle::brute_force_medoid(lib, dom()));
    EXPECT_EQ(clusters[0].members.size(), lib.size());
  }
}

TEST(Library, TwoSeparatedClustersAreRecovered) {
  Library lib;
  const char* left[] = {"DEFENSIVE_LEFT", "OUR_PENALTY_AREA", "DEFENSIVE_RIGHT"};
  const char* right[] = {"ATTACKING_LEFT", "KICKING_POSITION", "ATTACKING_RIGHT"};
  for (int i = 0; i < 3; ++i) {
    lib = add(lib, {kick_plan(), {{{"STRIKER", left[i]}, {"BALL", left[i]}, {"GOALIE", "OUR_GOAL"}}},
                    "L" + std::to_string(i), i + 1},
              cat(), dom());
    lib = add(lib, {kick_plan(), {{{"STRIKER", right[i]}, {"BALL", right[i]}, {"GOALIE", "OPPONENT_GOAL"}}},
                    "R" + std::to_string(i), i + 10},
              cat(), dom());
  }
  auto clusters = cluster_scenarios(lib, 2, dom());
  ASSERT_EQ(clusters.size(), 2u);
  std::vector<std::vector<std::string>> members;
  for (auto& c : clusters) {
    std::sort(c.members.begin(), c.members.end());
    members.push_back(c.members);
  }
  std::sort(members.begin(), members.end());
  EXPECT_EQ(members, (std::vector<std::vector<std::string>>{{"L0", "L1", "L2"}, {"R0", "R1", "R2"}}));

  const WorldState w = parse_world("AGENT r OWN STRIKER 2.7 1.2 0\nAGENT g OWN GOALIE 4 0 0\nBALL 2.7 1.2\n");
  EXPECT_EQ(select_plan_clustered(lib, w, dom(), 2).record->frame_id, "R0");
  EXPECT_EQ(error_kind([&] { cluster_scenarios(lib, 0, dom()); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(error_kind([&] { cluster_scenarios(lib, 7, dom()); }), ErrorKind::KTooLarge);
}

TEST(Library, ClusteringIsDeterministic) {
  std::mt19937_64 rng(4);
  const Library lib = random_library(rng, 30);
  const auto a = cluster_scenarios(lib, 4, dom());
  const auto b = cluster_scenarios(lib, 4, dom());
  ASSERT_EQ(a.size(), b.size());
  std::size_t total = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].medoid_frame_id, b[i].medoid_frame_id);
    EXPECT_EQ(a[i].members, b[i].members);
    total += a[i].members.size();
  }
  EXPECT_EQ(total, lib.size());
}

TEST(Library, SaveLoadRoundTrip) {
  std::mt19937_64 rng(5);
  Library lib = random_library(rng, 6);
  lib.records[0].plan.provenance = {"f1000", "0123456789abcdef"};
  const auto dir = std::filesystem::temp_directory_path() / ("llcoach_lib_" + std::to_string(::getpid()));
  save_library(lib, dir.string());
  const Library again = load_library(dir.string(), cat(), dom());
  std::filesystem::remove_all(dir);
  EXPECT_EQ(again, lib);
}

TEST(Library, GoldenLibraryLoads) {
  const Library lib = load_library(oracle::fixture("golden/library"), cat(), dom());
  ASSERT_EQ(lib.size(), 5u);
  EXPECT_EQ(lib.records[0].frame_id, "golden-001");
  EXPECT_EQ(lib.records[4].created_at, 5);
}

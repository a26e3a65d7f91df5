#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "llcoach/domain.hpp"
#include "llcoach/error.hpp"
#include "oracles.hpp"

using namespace llcoach;

using oracle::error_kind;

namespace {

const Domain& dom() { return oracle::bundled_domain(); }

}  // namespace

TEST(Domain, BundledTablesLoad) {
  EXPECT_EQ(dom().waypoints().size(), 12u);
  ASSERT_EQ(dom().roles().size(), 5u);
  EXPECT_EQ(dom().roles().front().name, "GOALIE");
  EXPECT_EQ(dom().roles().back().name, "STRIKER");
  EXPECT_EQ(dom().waypoint("OPPONENT_GOAL").position, (Vec2{4.5, 0.0}));
  EXPECT_EQ(error_kind([] { dom().waypoint("MOON"); }), ErrorKind::UnknownWaypoint);
}

TEST(Domain, SerializeRoundTrip) {
  const Domain again = parse_domain(serialize_domain(dom()));
  EXPECT_EQ(again, dom());
}

TEST(Domain, NormalizeAngleRange) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int i = 0; i < 1000; ++i) {
    const double t = u(rng);
    const double n = normalize_angle(t);
    EXPECT_GT(n, -M_PI - 1e-12);
    EXPECT_LE(n, M_PI + 1e-12);
    EXPECT_NEAR(std::remainder(n - t, 2 * M_PI), 0.0, 1e-9);
  }
  EXPECT_DOUBLE_EQ(normalize_angle(-M_PI), M_PI);
}

TEST(Domain, NearestWaypointMatchesScan) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ux(-4.5, 4.5), uy(-3.0, 3.0);
  for (int i = 0; i < 500; ++i) {
    const Vec2 p{ux(rng), uy(rng)};
    const std::string& got = nearest_waypoint(p, dom().waypoints());
    const double dg = std::hypot(p.x - dom().waypoint(got).position.x, p.y - dom().waypoint(got).position.y);
    for (const auto& w : dom().waypoints()) {
      EXPECT_LE(dg, std::hypot(p.x - w.position.x, p.y - w.position.y));
    }
  }
}

TEST(Domain, NearestWaypointTieGoesToSmallestToken) {
  std::vector<Waypoint> wps{{"B", "", {1, 0}}, {"A", "", {-1, 0}}};
  EXPECT_EQ(nearest_waypoint({0, 0}, wps), "A");
  EXPECT_EQ(error_kind([] { nearest_waypoint({0, 0}, {}); }), ErrorKind::EmptyDomain);
}

TEST(Domain, ScenarioFromWorldOrder) {
  const auto worlds = parse_world_set(oracle::read(oracle::fixture("golden/scenarios.worlds")));
  const Scenario s = scenario_from_world(worlds.front().second, dom());
  ASSERT_EQ(s.assignments.size(), 8u);
  std::vector<std::string> subjects;
  for (const auto& a : s.assignments) subjects.push_back(a.subject);
  EXPECT_EQ(subjects, (std::vector<std::string>{"GOALIE", "DEFENDER", "SUPPORTER", "JOLLY", "STRIKER", "OPPONENT_1",
                                                "OPPONENT_2", "BALL"}));
  // blue_2 at x = 1.4 comes before blue_1 at x = 4.3.
  EXPECT_EQ(s.find("OPPONENT_1")->waypoint, "CENTER_FIELD");
  EXPECT_EQ(s.find("OPPONENT_2")->waypoint, "OPPONENT_GOAL");
  EXPECT_EQ(s.find("BALL")->waypoint, "ATTACKING_LEFT");
}

TEST(Domain, ScenarioFromWorldErrors) {
  const WorldState unassigned = parse_world(oracle::read(oracle::fixture("golden/frame.world")));
  EXPECT_EQ(error_kind([&] { scenario_from_world(unassigned, dom()); }), ErrorKind::MissingRole);
  WorldState dup = unassigned;
  for (auto& a : dup.agents) a.agent.role = "STRIKER";
  EXPECT_EQ(error_kind([&] { scenario_from_world(dup, dom()); }), ErrorKind::DuplicateSubject);
}

TEST(Domain, ScenarioDistanceProperties) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 300; ++i) {
    const Scenario a = oracle::random_scenario(rng, dom());
    const Scenario b = oracle::random_scenario(rng, dom());
    const Scenario c = oracle::random_scenario(rng, dom());
    EXPECT_DOUBLE_EQ(scenario_distance(a, a, dom()), 0.0);
    EXPECT_NEAR(scenario_distance(a, b, dom()), scenario_distance(b, a, dom()), 1e-12);
    EXPECT_LE(scenario_distance(a, c, dom()), scenario_distance(a, b, dom()) + scenario_distance(b, c, dom()) + 1e-9);
  }
}

TEST(Domain, ScenarioDistancePenalty) {
  const Scenario a{{{"STRIKER", "CENTER_FIELD"}, {"BALL", "CENTER_FIELD"}}};
  const Scenario b{{{"JOLLY", "CENTER_FIELD"}, {"BALL", "KICKING_POSITION"}}};
  EXPECT_DOUBLE_EQ(scenario_distance(a, b, dom()), 2.8 + 2 * kUnmatchedSubjectPenalty);
}

TEST(Domain, WorldRoundTripAndClamp) {
  const WorldState w = parse_world("AGENT r OWN STRIKER 1 2 0\nBALL 9 9\n");
  EXPECT_EQ(w.ball, (Vec2{4.5, 3.0}));
  EXPECT_EQ(parse_world(serialize_world(w)), w);
  EXPECT_EQ(error_kind([] { parse_world("AGENT r OWN STRIKER x 2 0\n"); }), ErrorKind::ParseError);
}

TEST(Domain, OpponentSubjects) {
  EXPECT_TRUE(is_opponent_subject("OPPONENT_1"));
  EXPECT_TRUE(is_opponent_subject("OPPONENT_12"));
  EXPECT_FALSE(is_opponent_subject("OPPONENT_0"));
  EXPECT_FALSE(is_opponent_subject("OPPONENT_"));
  EXPECT_FALSE(is_opponent_subject("STRIKER"));
}

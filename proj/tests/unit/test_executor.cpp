#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "llcoach/executor.hpp"
#include "oracles.hpp"

using namespace llcoach;
using oracle::error_kind;

namespace {

const Domain& dom() { return oracle::bundled_domain(); }

Plan parse(std::string_view text) { return parse_plan(text, oracle::bundled_catalog(), dom()); }

WorldState world(std::string_view text) { return parse_world(text); }

constexpr std::string_view kClearShotWorld = "AGENT r1 OWN STRIKER 3.5 0 0\nBALL 3.5 0\n";

constexpr std::string_view kPassKickPlan =
    "pass_the_ball STRIKER {'SENDER': STRIKER, 'RECEIVER': JOLLY}\n"
    "receive_pass JOLLY {'SENDER': STRIKER}\n"
    "kick_to_goal JOLLY {}\n";
constexpr std::string_view kPassKickWorld =
    "AGENT r1 OWN STRIKER 2.0 1.0 0\nAGENT r2 OWN JOLLY 3.0 0.0 0\nAGENT b1 OPPONENT - -3 2 0\nBALL 2.0 1.0\n";

}  // namespace

TEST(Fsm, CompileAssignsBarriers) {
  const auto fsms = compile_fsm(parse(
      "pass_the_ball STRIKER {'SENDER': STRIKER, 'RECEIVER': JOLLY}\nreceive_pass JOLLY {'SENDER': STRIKER}\n"
      "JOIN{move_to STRIKER {'TARGET': OPPONENT_PENALTY_AREA}, dribble_to JOLLY {'TARGET': KICKING_POSITION}}\n"
      "JOIN{move_to STRIKER {'TARGET': LEFT_WING}, kick_to_goal JOLLY {}}\n"));
  ASSERT_EQ(fsms.size(), 2u);
  const auto& s = fsms.at("STRIKER").states;
  ASSERT_EQ(s.size(), 3u);
  EXPECT_FALSE(s[0].barrier_id);
  EXPECT_EQ(s[1].barrier_id, 1);
  EXPECT_EQ(s[2].barrier_id, 2);
  EXPECT_EQ(fsms.at("JOLLY").states[1].barrier_id, 1);
  EXPECT_EQ(error_kind([] { compile_fsm(Plan{}); }), ErrorKind::InvalidPlan);
}

TEST(Fsm, LinearizationsEqualPlanInterleavings) {
  for (const auto& e : std::filesystem::directory_iterator(oracle::fixture("corpus"))) {
    if (e.path().extension() != ".plan") continue;
    SCOPED_TRACE(e.path().filename().string());
    const Plan p = parse(oracle::read(e.path().string()));
    EXPECT_EQ(oracle::fsm_linearizations(compile_fsm(p)), oracle::plan_interleavings(p));
  }
}

TEST(SimConfigTest, ParseValidateSerialize) {
  const SimConfig c = SimConfig::parse("# c\nwalk_speed = 0.5\ntick = 0.02\n");
  EXPECT_DOUBLE_EQ(c.walk_speed, 0.5);
  EXPECT_DOUBLE_EQ(c.tick, 0.02);
  const SimConfig again = SimConfig::parse(c.serialize());
  EXPECT_DOUBLE_EQ(again.walk_speed, 0.5);
  EXPECT_EQ(error_kind([] { SimConfig::parse("tick = 0.5\n"); }), ErrorKind::ConfigInvalid);
  EXPECT_EQ(error_kind([] { SimConfig::parse("walk_speed = -1\n"); }), ErrorKind::ConfigInvalid);
  EXPECT_EQ(error_kind([] { SimConfig::parse("warp = 9\n"); }), ErrorKind::ConfigInvalid);
  EXPECT_EQ(error_kind([] { SimConfig::parse("tick\n"); }), ErrorKind::ConfigInvalid);
}

TEST(Match, ClearShotScoresAtKickTravelTime) {
  const SimConfig cfg;
  const auto r = run_match(compile_fsm(parse("kick_to_goal STRIKER {}")), world(kClearShotWorld), dom(), cfg, {});
  ASSERT_TRUE(r.success) << r.trace_text();
  EXPECT_EQ(r.end_reason, "GOAL");
  EXPECT_EQ(r.passes, 0);
  const double expected = (cfg.goal_x - 3.5) / cfg.kick_speed;
  ASSERT_TRUE(r.scoring_time);
  EXPECT_NEAR(*r.scoring_time, expected, cfg.tick);
}

TEST(Match, ScoringTimeScalesWithDistance) {
  const SimConfig cfg;
  for (double x : {1.0, 2.0, 3.0, 4.0}) {
    const std::string w = "AGENT r1 OWN STRIKER " + std::to_string(x) + " 0 0\nBALL " + std::to_string(x) + " 0\n";
    const auto r = run_match(compile_fsm(parse("kick_to_goal STRIKER {}")), world(w), dom(), cfg, {});
    ASSERT_TRUE(r.scoring_time);
    EXPECT_NEAR(*r.scoring_time, (cfg.goal_x - x) / cfg.kick_speed, cfg.tick);
  }
}

TEST(Match, PassThenKickCountsOnePass) {
  const auto r = run_match(compile_fsm(parse(kPassKickPlan)), world(kPassKickWorld), dom(), SimConfig{}, {});
  EXPECT_TRUE(r.success) << r.trace_text();
  EXPECT_EQ(r.passes, 1);
}

TEST(Match, SameSeedSameTrace) {
  const auto fsms = compile_fsm(parse(kPassKickPlan));
  const std::string w =
      "AGENT r1 OWN STRIKER 0.0 1.0 0\nAGENT r2 OWN JOLLY 1.0 -1.0 0\nAGENT b1 OPPONENT - 3 0 0\n"
      "AGENT b2 OPPONENT - 2 2 0\nBALL 0.0 1.0\n";
  const OpponentPolicy pol{OpponentPolicyKind::NearestIntercept, 7};
  const auto a = run_match(fsms, world(w), dom(), SimConfig{}, pol);
  const auto b = run_match(fsms, world(w), dom(), SimConfig{}, pol);
  EXPECT_EQ(a.trace_text(), b.trace_text());
  EXPECT_FALSE(a.trace.empty());
}

TEST(Match, PlanExhaustedWithoutShot) {
  const auto r = run_match(compile_fsm(parse("move_to STRIKER {'TARGET': CENTER_FIELD}")),
                           world("AGENT r1 OWN STRIKER 0.5 0 0\nBALL -3 0\n"), dom(), SimConfig{}, {});
  EXPECT_FALSE(r.success);
  EXPECT_EQ(r.end_reason, "PLAN_EXHAUSTED");
}

TEST(Match, TimeoutIsHonoured) {
  SimConfig cfg;
  cfg.timeout = 1.0;
  const auto r = run_match(compile_fsm(parse("move_to STRIKER {'TARGET': OUR_GOAL}")),
                           world("AGENT r1 OWN STRIKER 4 0 0\nBALL -3 0\n"), dom(), cfg, {});
  EXPECT_EQ(r.end_reason, "TIMEOUT");
  EXPECT_FALSE(r.success);
}

TEST(Match, MissingRoleIsAnError) {
  EXPECT_EQ(error_kind([] {
              run_match(compile_fsm(parse("kick_to_goal JOLLY {}")), world(kClearShotWorld), dom(), SimConfig{}, {});
            }),
            ErrorKind::MissingRole);
}

TEST(Match, TraceLineFormat) {
  const auto r = run_match(compile_fsm(parse("kick_to_goal STRIKER {}")), world(kClearShotWorld), dom(), SimConfig{}, {});
  const std::string text = r.trace_text();
  EXPECT_EQ(text.rfind("t=0.000 EVENT ", 0), 0u) << text;
  EXPECT_NE(text.find(" EVENT GOAL "), std::string::npos);
  EXPECT_NE(text.find(" EVENT END "), std::string::npos);
}

TEST(Metrics, AggregateAndFormat) {
  MatchResult win;
  win.success = true;
  win.passes = 1;
  win.scoring_time = 10.0;
  MatchResult loss;
  loss.passes = 0;
  const auto m = aggregate({win, loss, win, loss});
  EXPECT_EQ(m.runs, 4u);
  EXPECT_DOUBLE_EQ(m.success_rate, 0.5);
  EXPECT_DOUBLE_EQ(m.avg_passes, 0.5);
  EXPECT_DOUBLE_EQ(*m.avg_scoring_time, 10.0);
  EXPECT_EQ(format_report(m, "X"),
            "                      X\n"
            "Success Rate          50%\n"
            "Avg. no. of passes    0.50\n"
            "Avg. scoring time     10.0 sec.\n");
  EXPECT_EQ(format_report(aggregate({loss}), "X", ReportFormat::Csv),
            "metric,X\nSuccess Rate,0.0000\nAvg. no. of passes,0.0000\nAvg. scoring time,\n");
  EXPECT_EQ(error_kind([] { aggregate({}); }), ErrorKind::EmptyInput);
}

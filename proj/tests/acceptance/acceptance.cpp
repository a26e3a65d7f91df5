// Acceptance checks: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "llcoach/pipeline.hpp"
#include "oracles.hpp"

using namespace llcoach;

namespace {

const Domain& dom() { return oracle::bundled_domain(); }
const ActionCatalog& cat() { return oracle::bundled_catalog(); }

struct Outcome {
  bool ok = true;
  std::string note;

  void fail(const std::string& why) {
    if (ok) note = why;
    ok = false;
  }
};

int failures = 0;

void criterion(const std::string& name, double limit_s, const std::function<void(Outcome&)>& body) {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(out);
  } catch (const std::exception& e) {
    out.fail(std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (limit_s > 0 && secs >= limit_s) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "runtime %.3f s over %.1f s", secs, limit_s);
    out.fail(buf);
  }
  std::printf("%s  %-28s %.3f s%s%s\n", out.ok ? "PASS" : "FAIL", name.c_str(), secs, out.note.empty() ? "" : "  ",
              out.note.c_str());
  std::fflush(stdout);
  if (!out.ok) ++failures;
}

std::vector<std::string> corpus_stems() {
  std::vector<std::string> out;
  for (const auto& e : std::filesystem::directory_iterator(oracle::fixture("corpus"))) {
    if (e.path().extension() == ".plan") out.push_back(e.path().stem().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Maps texts to fixed vectors; used to build randomized action stores.
class MockEmbedder final : public EmbeddingProvider {
 public:
  explicit MockEmbedder(std::size_t dim) : dim_(dim) {}
  std::string id() const override { return "mock"; }
  std::size_t dim() const override { return dim_; }
  Embedding embed(std::string_view text) const override { return vectors_.at(std::string(text)); }
  void set(const std::string& text, std::vector<double> v) { vectors_[text] = {std::move(v)}; }

 private:
  std::size_t dim_;
  std::map<std::string, Embedding> vectors_;
};

void parser_fidelity(Outcome& out) {
  const std::string example =
      "pass_the_ball STRIKER {'SENDER': STRIKER, 'RECEIVER': JOLLY}\n"
      "JOIN{receive_pass JOLLY {'SENDER': STRIKER}, kick_to_goal JOLLY {}}\n";
  const Plan p = parse_plan(example, cat(), dom());
  if (p.steps.size() != 2 || p.steps[0].kind != StepKind::Single || p.steps[1].kind != StepKind::Join ||
      p.steps[1].actions.size() != 2 || p.steps[0].actions[0].args.size() != 2) {
    out.fail("example plan has the wrong shape");
  }
  const auto report = validate_plan(p, cat(), dom(), parse_state("ball_held_by(STRIKER)"));
  if (report.violations.size() != 1 || report.violations[0].kind != ViolationKind::SelfJoin) {
    out.fail("example plan: expected exactly one SelfJoin, got " + std::to_string(report.violations.size()));
  }
  const auto stems = corpus_stems();
  if (stems.size() != 20) out.fail("corpus has " + std::to_string(stems.size()) + " plans");
  for (const auto& s : stems) {
    const Plan a = parse_plan(oracle::read(oracle::fixture("corpus/" + s + ".plan")), cat(), dom());
    if (parse_plan(serialize_plan(a), cat(), dom()) != a) out.fail(s + " does not round-trip");
  }
}

void retrieval_oracle(Outcome& out) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> coord(-3, 3);
  std::uniform_int_distribution<std::size_t> size(1, 100);
  const std::size_t dim = 6;
  for (int trial = 0; trial < 200; ++trial) {
    MockEmbedder embedder(dim);
    auto random_vec = [&] {
      std::vector<double> v(dim, 0.0);
      while (std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; })) {
        for (auto& x : v) x = coord(rng);
      }
      return v;
    };
    std::vector<ActionSchema> schemas;
    const std::size_t n = size(rng);
    for (std::size_t i = 0; i < n; ++i) {
      ActionSchema s;
      s.action_id = "a" + std::to_string((i * 7919 + trial) % 10007);
      s.description = "description of " + s.action_id;
      embedder.set(s.description, random_vec());
      schemas.push_back(s);
    }
    embedder.set("query", random_vec());
    const ActionCatalog catalog(schemas);
    const VectorIndex index = VectorIndex::build(schemas, embedder);
    for (std::size_t k : {1u, 5u, 8u, 100u}) {
      std::vector<std::string> got;
      for (const auto& a : retrieve_actions("query", index, catalog, embedder, k)) got.push_back(a.action_id);
      if (got != oracle::brute_force_top_k(index.entries(), embedder.embed("query").vector, k)) {
        out.fail("trial " + std::to_string(trial) + " k=" + std::to_string(k) + " differs");
        return;
      }
    }
  }
}

void strips_oracle(Outcome& out) {
  std::mt19937_64 rng(77);
  int passed_ball = 0;
  for (int i = 0; i < 500; ++i) {
    const Plan p = oracle::random_plan(rng, cat(), dom(), 4);
    const auto facts = oracle::random_facts(rng, dom());
    std::vector<std::string> final_facts;
    const auto expected = oracle::straight_line_validate(p, cat(), dom(), facts, &final_facts);
    const auto report = validate_plan(p, cat(), dom(), oracle::to_state(facts));
    if (oracle::findings_of(report) != expected || oracle::fact_strings(report.final_state) != final_facts) {
      out.fail("plan " + std::to_string(i) + " differs:\n" + serialize_plan(p));
      return;
    }
    for (const auto& f : expected) passed_ball += f.kind == "PassedBall";
  }
  if (passed_ball == 0) out.fail("no random plan exercised the passing constraint");
}

void join_commutativity(Outcome& out) {
  int joins = 0;
  for (const auto& s : corpus_stems()) {
    const Plan p = parse_plan(oracle::read(oracle::fixture("corpus/" + s + ".plan")), cat(), dom());
    const SimState s0 = parse_state(oracle::read(oracle::fixture("corpus/" + s + ".state")));
    const Plan q = auto_parallelize(p, cat(), dom(), s0);
    Plan prefix;
    for (const auto& step : q.steps) {
      if (step.kind == StepKind::Join && step.actions.size() <= 3) {
        ++joins;
        const auto state = validate_plan(prefix, cat(), dom(), s0).final_state;
        if (!oracle::join_commutes(step, cat(), oracle::fact_strings(state))) out.fail(s + ": JOIN does not commute");
      }
      prefix.steps.push_back(step);
    }
  }
  if (joins == 0) out.fail("no JOIN produced on the corpus");
}

void role_retrieval(Outcome& out) {
  // The bundled domain has five roles; a sixth makes n = 6 reachable.
  std::vector<Role> roles = dom().roles();
  roles.push_back({"SWEEPER", "Extra role for the n = 6 case.", {"move_to"}});
  const Domain six(dom().description(), dom().waypoints(), roles, dom().field());
  std::mt19937_64 rng(99);
  std::vector<std::string> wps;
  for (const auto& w : six.waypoints()) wps.push_back(w.token);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + trial % 6;
    const WorldState w = oracle::random_world(rng, six, n, 2, false);
    Scenario s;
    for (std::size_t i = 0; i < n; ++i) s.assignments.push_back({roles[i].name, wps[rng() % wps.size()]});
    const auto mapping = retrieve_roles(w, s, six);
    std::vector<std::vector<double>> cost(n, std::vector<double>(n));
    double got = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 p = w.agents[i].pose.position();
      for (std::size_t j = 0; j < n; ++j) {
        const Vec2 q = six.waypoint(s.assignments[j].waypoint).position;
        cost[i][j] = std::hypot(p.x - q.x, p.y - q.y);
      }
      const Vec2 q = six.waypoint(s.find(mapping.at(w.agents[i].agent.agent_id))->waypoint).position;
      got += std::hypot(p.x - q.x, p.y - q.y);
    }
    if (std::abs(got - oracle::permutation_min_cost(cost)) > 1e-9) {
      out.fail("trial " + std::to_string(trial) + " is not minimal");
      return;
    }
  }
}

void simulator(Outcome& out) {
  const SimConfig cfg;  // kick_speed 4 m/s, tick 0.05 s
  const auto kick = compile_fsm(parse_plan("kick_to_goal STRIKER {}", cat(), dom()));
  const WorldState clear = parse_world("AGENT r1 OWN STRIKER 3.5 0 0\nBALL 3.5 0\n");
  const auto shot = run_match(kick, clear, dom(), cfg, {});
  if (!shot.scoring_time || std::abs(*shot.scoring_time - 0.25) > cfg.tick) {
    out.fail("clear shot did not score at 0.25 s");
  }
  const auto pass_kick = compile_fsm(parse_plan(
      "pass_the_ball STRIKER {'SENDER': STRIKER, 'RECEIVER': JOLLY}\nreceive_pass JOLLY {'SENDER': STRIKER}\n"
      "kick_to_goal JOLLY {}\n",
      cat(), dom()));
  const WorldState two = parse_world(
      "AGENT r1 OWN STRIKER 2.0 1.0 0\nAGENT r2 OWN JOLLY 3.0 0.0 0\nAGENT b1 OPPONENT - -3 2 0\nBALL 2.0 1.0\n");
  const auto pk = run_match(pass_kick, two, dom(), cfg, {});
  if (pk.passes != 1 || !pk.success) out.fail("pass-then-kick: passes = " + std::to_string(pk.passes));
  const auto worlds = parse_world_set(oracle::read(oracle::fixture("golden/scenarios.worlds")));
  for (std::uint64_t seed : {0u, 1u, 42u}) {
    for (const auto& [name, w] : worlds) {
      const OpponentPolicy pol{OpponentPolicyKind::NearestIntercept, seed};
      if (run_match(pass_kick, w, dom(), cfg, pol).trace_text() != run_match(pass_kick, w, dom(), cfg, pol).trace_text()) {
        out.fail("trace differs for " + name);
      }
    }
  }
}

void end_to_end(Outcome& out) {
  NetworkGuard guard;
  GenerateInputs in;
  in.domain = dom();
  in.catalog = cat();
  in.frame = parse_world(oracle::read(oracle::fixture("golden/frame.world")));
  in.frame_id = "golden-001";
  ReplayProvider replay(Transcript::parse(oracle::read(oracle::fixture("golden/transcript.txt"))));
  const auto result = run_generate(in, replay, HashEmbeddingProvider{});
  if (!result.report.ok()) out.fail("generated plan has violations");
  const Library lib = load_library(oracle::fixture("golden/library"), cat(), dom());
  if (lib.find("golden-001") == nullptr || lib.find("golden-001")->plan.steps != result.record.plan.steps) {
    out.fail("generated plan differs from the library record");
  }
  const auto worlds = parse_world_set(oracle::read(oracle::fixture("golden/scenarios.worlds")));
  if (worlds.size() != 8) out.fail("expected 8 scenarios");
  const auto ev = run_evaluate(lib, worlds, dom(), SimConfig{}, OpponentPolicyKind::Static, 0);
  const std::string report = format_report(ev.metrics, "LLCoach");
  if (report != oracle::read(oracle::fixture("golden/report.txt"))) out.fail("report differs from golden");
  for (const char* label : {"\nSuccess Rate ", "\nAvg. no. of passes ", "\nAvg. scoring time "}) {
    if (report.find(label) == std::string::npos) out.fail(std::string("missing row ") + (label + 1));
  }
}

void plan_selection(Outcome& out) {
  std::mt19937_64 rng(5150);
  const Plan kick = parse_plan("kick_to_goal STRIKER {}", cat(), dom());
  std::vector<std::string> wps;
  for (const auto& w : dom().waypoints()) wps.push_back(w.token);
  for (int trial = 0; trial < 40; ++trial) {
    Library lib;
    const std::size_t n = 1 + (trial * 5) % 100;
    for (std::size_t i = 0; i < n; ++i) {
      Scenario s = oracle::random_scenario(rng, dom());
      const std::string ball = s.find("BALL")->waypoint;
      std::erase_if(s.assignments, [&](const Assignment& a) {
        return a.subject == "STRIKER" || (dom().has_role(a.subject) && a.waypoint == ball);
      });
      s.assignments.insert(s.assignments.begin(), {"STRIKER", ball});
      lib = add(lib, {kick, s, "r" + std::to_string(1000 + i), static_cast<std::int64_t>(rng() % 5)}, cat(), dom());
    }
    for (int q = 0; q < 5; ++q) {
      const WorldState w = oracle::random_world(rng, dom(), 5, 2, true);
      const auto sel = select_plan(lib, w, dom());
      if (sel.record->frame_id != oracle::brute_force_select(lib, scenario_from_world(w, dom()), dom())) {
        out.fail("selection differs in trial " + std::to_string(trial));
        return;
      }
    }
  }
  Library lib;
  const char* left[] = {"DEFENSIVE_LEFT", "OUR_PENALTY_AREA", "DEFENSIVE_RIGHT"};
  const char* right[] = {"ATTACKING_LEFT", "KICKING_POSITION", "ATTACKING_RIGHT"};
  for (int i = 0; i < 3; ++i) {
    lib = add(lib, {kick, {{{"STRIKER", left[i]}, {"BALL", left[i]}}}, "L" + std::to_string(i), i + 1}, cat(), dom());
    lib = add(lib, {kick, {{{"STRIKER", right[i]}, {"BALL", right[i]}}}, "R" + std::to_string(i), i + 4}, cat(), dom());
  }
  std::vector<std::vector<std::string>> members;
  for (auto c : cluster_scenarios(lib, 2, dom())) {
    std::sort(c.members.begin(), c.members.end());
    members.push_back(c.members);
  }
  std::sort(members.begin(), members.end());
  if (members != std::vector<std::vector<std::string>>{{"L0", "L1", "L2"}, {"R0", "R1", "R2"}}) {
    out.fail("k-medoids did not recover the two clusters");
  }
}

}  // namespace

int main() {
  criterion("parser-fidelity", 1.0, parser_fidelity);
  criterion("retrieval-oracle", 5.0, retrieval_oracle);
  criterion("strips-validation-oracle", 5.0, strips_oracle);
  criterion("join-commutativity", 0.0, join_commutativity);
  criterion("role-retrieval-optimality", 0.0, role_retrieval);
  criterion("simulator-determinism", 0.0, simulator);
  criterion("end-to-end-replay", 10.0, end_to_end);
  criterion("plan-selection-oracle", 0.0, plan_selection);
  return failures;
}

#include "llcoach/executor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "llcoach/error.hpp"
#include "llcoach/text.hpp"

namespace llcoach {

// ---- FSM compilation -------------------------------------------------------

std::map<std::string, AgentFSM> compile_fsm(const Plan& plan) {
  if (plan.steps.empty()) throw Error(ErrorKind::InvalidPlan, "cannot compile an empty plan");
  std::map<std::string, AgentFSM> fsms;
  int next_barrier = 1;
  for (std::size_t si = 0; si < plan.steps.size(); ++si) {
    const PlanStep& step = plan.steps[si];
    if (step.actions.empty()) {
      throw Error(ErrorKind::InvalidPlan, "step " + std::to_string(si + 1) + " has no actions");
    }
    std::optional<int> barrier;
    if (step.kind == StepKind::Join) {
      std::set<std::string, std::less<>> agents;
      for (const auto& a : step.actions) {
        if (!agents.insert(a.agent_id).second) {
          throw Error(ErrorKind::InvalidPlan,
                      "step " + std::to_string(si + 1) + ": agent " + a.agent_id + " appears twice in a JOIN");
        }
      }
      barrier = next_barrier++;
    } else if (step.actions.size() != 1) {
      throw Error(ErrorKind::InvalidPlan, "step " + std::to_string(si + 1) + " is not a single action");
    }
    for (const auto& a : step.actions) {
      AgentFSM& fsm = fsms[a.agent_id];
      fsm.agent_id = a.agent_id;
      fsm.states.push_back({a, barrier});
    }
  }
  return fsms;
}

// ---- configuration ---------------------------------------------------------

namespace {

struct ConfigField {
  std::string_view name;
  double SimConfig::*member;
};

constexpr ConfigField kConfigFields[] = {
    {"walk_speed", &SimConfig::walk_speed},
    {"pass_speed", &SimConfig::pass_speed},
    {"kick_speed", &SimConfig::kick_speed},
    {"control_radius", &SimConfig::control_radius},
    {"tick", &SimConfig::tick},
    {"timeout", &SimConfig::timeout},
    {"goal_x", &SimConfig::goal_x},
    {"goal_half_width", &SimConfig::goal_half_width},
};

}  // namespace

void SimConfig::validate() const {
  for (const auto& f : kConfigFields) {
    const double v = this->*f.member;
    if (!std::isfinite(v) || v <= 0.0) {
      throw Error(ErrorKind::ConfigInvalid, std::string(f.name) + " must be positive, got " + text::format_double(v));
    }
  }
  if (tick > 0.1) throw Error(ErrorKind::ConfigInvalid, "tick must be at most 0.1 s");
  if (timeout < tick) throw Error(ErrorKind::ConfigInvalid, "timeout must be at least one tick");
}

SimConfig SimConfig::parse(std::string_view input, std::string_view source) {
  SimConfig config;
  const auto lines = text::split_lines(input);
  std::set<std::string, std::less<>> seen;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = text::trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    const std::string where = std::string(source) + ":" + std::to_string(i + 1) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw Error(ErrorKind::ConfigInvalid, where + "expected 'key = value'");
    const auto key = text::trim(line.substr(0, eq));
    const auto value = text::trim(line.substr(eq + 1));
    const auto* field = std::find_if(std::begin(kConfigFields), std::end(kConfigFields),
                                     [&](const ConfigField& f) { return f.name == key; });
    if (field == std::end(kConfigFields)) {
      throw Error(ErrorKind::ConfigInvalid, where + "unknown key '" + std::string(key) + "'");
    }
    if (!seen.insert(std::string(key)).second) {
      throw Error(ErrorKind::ConfigInvalid, where + "duplicate key '" + std::string(key) + "'");
    }
    double number = 0.0;
    if (!text::parse_double(value, number)) {
      throw Error(ErrorKind::ConfigInvalid, where + "not a number: '" + std::string(value) + "'");
    }
    config.*(field->member) = number;
  }
  config.validate();
  return config;
}

std::string SimConfig::serialize() const {
  std::string out;
  for (const auto& f : kConfigFields) out += std::string(f.name) + " = " + text::format_double(this->*f.member) + "\n";
  return out;
}

std::string_view to_string(OpponentPolicyKind kind) {
  return kind == OpponentPolicyKind::Static ? "STATIC" : "NEAREST_INTERCEPT";
}

std::optional<OpponentPolicyKind> opponent_policy_from_string(std::string_view input) {
  const std::string upper = text::to_upper(text::trim(input));
  if (upper == "STATIC") return OpponentPolicyKind::Static;
  if (upper == "NEAREST_INTERCEPT") return OpponentPolicyKind::NearestIntercept;
  return std::nullopt;
}

// ---- simulation --------------------------------------------------------------

namespace {

constexpr double kEps = 1e-9;
constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

enum class Behaviour { Move, Dribble, Reach, Pass, Receive, Align, Kick, NoOp };

Behaviour behaviour_of(const GroundedAction& a) {
  const std::string& id = a.action_id;
  if (id == "move_to") return Behaviour::Move;
  if (id == "dribble_to") return Behaviour::Dribble;
  if (id == "reach_ball") return Behaviour::Reach;
  if (id == "pass_the_ball") {
    const std::string* sender = a.arg("SENDER");
    return sender == nullptr || *sender == a.agent_id ? Behaviour::Pass : Behaviour::Receive;
  }
  if (id == "receive_pass") return Behaviour::Receive;
  if (id == "align_to_goal") return Behaviour::Align;
  if (id == "kick_to_goal") return Behaviour::Kick;
  return Behaviour::NoOp;
}

enum class Status { Pending, Running, Done };

struct Body {
  std::string name;  // role for own agents, agent id for opponents
  Team team = Team::Own;
  Vec2 pos;
  double theta = 0.0;
  double reaction_delay = 0.0;
};

enum class Flight { None, Pass, Kick };

struct Ball {
  Vec2 pos;
  Vec2 vel;
  Flight flight = Flight::None;
  Vec2 target;
  std::size_t holder = kNone;
  std::size_t launcher = kNone;  // excluded from control until the ball leaves its radius
  std::size_t pass_sender = kNone;
  std::size_t pass_receiver = kNone;
  std::size_t kicker = kNone;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string point(Vec2 p) { return "(" + fmt("%.3f", p.x) + ", " + fmt("%.3f", p.y) + ")"; }

class Match {
 public:
  Match(const std::map<std::string, AgentFSM>& fsms, const WorldState& world0, const Domain& domain,
        const SimConfig& config, const OpponentPolicy& opponents)
      : domain_(domain), config_(config), policy_(opponents) {
    for (const auto& [role, fsm] : fsms) {
      if (world0.find_by_role(role) == nullptr) {
        throw Error(ErrorKind::MissingRole, "no agent in the world plays role " + role);
      }
      fsms_.push_back(fsm);
      fsms_.back().current = 0;
      status_.emplace_back(fsm.states.size(), Status::Pending);
    }
    for (const auto& a : world0.agents) {
      Body b;
      b.team = a.agent.team;
      b.name = a.agent.team == Team::Own && a.agent.role ? *a.agent.role : a.agent.agent_id;
      b.pos = domain.clamp(a.pose.position());
      b.theta = a.pose.theta;
      bodies_.push_back(std::move(b));
    }
    for (const auto& fsm : fsms_) {
      actor_.push_back(body_by_name(fsm.agent_id, Team::Own));
      for (const auto& s : fsm.states) {
        for (const auto& [key, value] : s.action.args) {
          if (domain.has_role(value) && body_by_name(value, Team::Own) == kNone) {
            throw Error(ErrorKind::MissingRole, "no agent in the world plays role " + value);
          }
        }
      }
    }
    if (policy_.kind == OpponentPolicyKind::NearestIntercept) {
      std::mt19937_64 rng(policy_.seed);
      for (auto& b : bodies_) {
        // Top 53 bits mapped to [0, 1); portable unlike std::uniform_real_distribution.
        if (b.team == Team::Opponent) b.reaction_delay = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      }
    }
    ball_.pos = domain.clamp(world0.ball);
    result_.tick = config.tick;
  }

  MatchResult run() {
    update_possession(0);
    const auto max_ticks = static_cast<std::int64_t>(std::ceil(config_.timeout / config_.tick - kEps));
    if (result_.end_reason.empty()) {
      for (std::int64_t n = 0; n < max_ticks; ++n) {
        step_agents(n);
        step_opponents(n);
        step_ball(n);
        if (!result_.end_reason.empty()) break;
        update_possession(n + 1);
        if (!result_.end_reason.empty()) break;
        if (plan_exhausted()) {
          finish(n + 1, "PLAN_EXHAUSTED");
          break;
        }
      }
    }
    if (result_.end_reason.empty()) finish(max_ticks, "TIMEOUT");
    return std::move(result_);
  }

 private:
  std::size_t body_by_name(std::string_view name, Team team) const {
    for (std::size_t i = 0; i < bodies_.size(); ++i) {
      if (bodies_[i].team == team && bodies_[i].name == name) return i;
    }
    return kNone;
  }

  void event(std::int64_t tick, std::string kind, std::string agent, std::string details) {
    result_.trace.push_back({tick, std::move(kind), std::move(agent), std::move(details)});
  }

  void finish(std::int64_t tick, std::string reason) {
    result_.end_reason = reason;
    event(tick, "END", "-", reason);
  }

  bool ball_free() const { return ball_.holder == kNone && ball_.flight == Flight::None; }

  // Moves `b` toward `target`; true once it is there.
  bool walk(Body& b, Vec2 target) {
    const double step = config_.walk_speed * config_.tick;
    const double d = distance(b.pos, target);
    if (d <= step + kEps) {
      b.pos = domain_.clamp(target);
      return true;
    }
    b.pos = domain_.clamp({b.pos.x + (target.x - b.pos.x) / d * step, b.pos.y + (target.y - b.pos.y) / d * step});
    b.theta = std::atan2(target.y - b.pos.y, target.x - b.pos.x);
    return false;
  }

  void launch(std::size_t from, Vec2 target, double speed, Flight flight) {
    Body& b = bodies_[from];
    const double d = distance(b.pos, target);
    ball_.pos = b.pos;
    ball_.vel = d > kEps ? Vec2{(target.x - b.pos.x) / d * speed, (target.y - b.pos.y) / d * speed} : Vec2{};
    ball_.flight = flight;
    ball_.target = target;
    ball_.holder = kNone;
    ball_.launcher = from;
    ball_.kicker = flight == Flight::Kick ? from : kNone;
    if (d <= kEps) ball_.flight = Flight::None;
  }

  bool barrier_arrived(int barrier) const {
    for (std::size_t f = 0; f < fsms_.size(); ++f) {
      const auto& fsm = fsms_[f];
      for (std::size_t s = 0; s < fsm.states.size(); ++s) {
        if (fsm.states[s].barrier_id == barrier && fsm.current != s) return false;
      }
    }
    return true;
  }

  bool barrier_done(int barrier) const {
    for (std::size_t f = 0; f < fsms_.size(); ++f) {
      const auto& fsm = fsms_[f];
      for (std::size_t s = 0; s < fsm.states.size(); ++s) {
        if (fsm.states[s].barrier_id == barrier && status_[f][s] != Status::Done) return false;
      }
    }
    return true;
  }

  void step_agents(std::int64_t n) {
    for (std::size_t f = 0; f < fsms_.size(); ++f) {
      AgentFSM& fsm = fsms_[f];
      // Leave completed states; a JOIN member waits until every member is done.
      while (!fsm.finished() && status_[f][fsm.current] == Status::Done) {
        const auto barrier = fsm.states[fsm.current].barrier_id;
        if (barrier && !barrier_done(*barrier)) break;
        if (barrier && released_.insert(*barrier).second) {
          event(n, "BARRIER_RELEASE", "-", "barrier=" + std::to_string(*barrier));
        }
        ++fsm.current;
      }
      if (fsm.finished()) continue;
      const std::size_t s = fsm.current;
      if (status_[f][s] == Status::Pending) {
        const auto barrier = fsm.states[s].barrier_id;
        if (barrier && !barrier_arrived(*barrier)) continue;
        status_[f][s] = Status::Running;
        event(n, "ACTION_START", fsm.agent_id, serialize_action(fsm.states[s].action));
      }
      if (status_[f][s] == Status::Running && act(n, f)) {
        status_[f][s] = Status::Done;
        event(n, "ACTION_DONE", fsm.agent_id, fsm.states[s].action.action_id);
      }
    }
  }

  // Walks the actor to a free ball; true when it already holds the ball.
  bool fetch_ball(std::size_t who) {
    if (ball_.holder == who) return true;
    if (ball_free()) walk(bodies_[who], ball_.pos);
    return false;
  }

  Vec2 waypoint_arg(const GroundedAction& a) const {
    const std::string* target = a.arg("TARGET");
    if (target != nullptr) {
      if (const Waypoint* w = domain_.find_waypoint(*target)) return w->position;
    }
    return bodies_[body_by_name(a.agent_id, Team::Own)].pos;
  }

  bool act(std::int64_t n, std::size_t f) {
    const GroundedAction& a = fsms_[f].states[fsms_[f].current].action;
    const std::size_t me = actor_[f];
    Body& body = bodies_[me];
    switch (behaviour_of(a)) {
      case Behaviour::Move:
        return walk(body, waypoint_arg(a));
      case Behaviour::Dribble:
        if (!fetch_ball(me)) return false;
        return walk(body, waypoint_arg(a));
      case Behaviour::Reach:
        return fetch_ball(me);
      case Behaviour::Receive:
        if (ball_.holder == me) return true;
        if (ball_free()) walk(body, ball_.pos);
        return false;
      case Behaviour::Align:
        body.theta = std::atan2(-body.pos.y, config_.goal_x - body.pos.x);
        return true;
      case Behaviour::Pass: {
        if (!fetch_ball(me)) return false;
        const std::string* receiver_role = a.arg("RECEIVER");
        const std::size_t receiver = receiver_role ? body_by_name(*receiver_role, Team::Own) : kNone;
        if (receiver == kNone || receiver == me) return true;
        launch(me, bodies_[receiver].pos, config_.pass_speed, Flight::Pass);
        ball_.pass_sender = me;
        ball_.pass_receiver = receiver;
        event(n, "PASS_LAUNCH", body.name, "to=" + bodies_[receiver].name + " target=" + point(ball_.target));
        if (ball_.flight == Flight::None) update_possession(n);
        return true;
      }
      case Behaviour::Kick: {
        if (!fetch_ball(me)) return false;
        launch(me, {config_.goal_x, 0.0}, config_.kick_speed, Flight::Kick);
        ball_.pass_sender = ball_.pass_receiver = kNone;
        event(n, "KICK", body.name, "from=" + point(body.pos));
        return true;
      }
      case Behaviour::NoOp:
        return true;
    }
    return true;
  }

  std::size_t chaser() const {
    std::size_t best = kNone;
    double best_d = 0.0;
    for (std::size_t i = 0; i < bodies_.size(); ++i) {
      if (bodies_[i].team != Team::Opponent) continue;
      const double d = distance(bodies_[i].pos, ball_.pos);
      if (best == kNone || d < best_d - kEps || (std::abs(d - best_d) <= kEps && bodies_[i].name < bodies_[best].name)) {
        best = i;
        best_d = d;
      }
    }
    return best;
  }

  void step_opponents(std::int64_t n) {
    if (policy_.kind != OpponentPolicyKind::NearestIntercept) return;
    const std::size_t c = chaser();
    if (c == kNone) return;
    if (static_cast<double>(n) * config_.tick + kEps < bodies_[c].reaction_delay) return;
    walk(bodies_[c], ball_.pos);
  }

  void step_ball(std::int64_t n) {
    if (ball_.holder != kNone) {
      ball_.pos = bodies_[ball_.holder].pos;
      return;
    }
    if (ball_.flight == Flight::None) return;
    const Vec2 prev = ball_.pos;
    Vec2 next{prev.x + ball_.vel.x * config_.tick, prev.y + ball_.vel.y * config_.tick};
    if (ball_.flight == Flight::Pass) {
      const double remaining = distance(prev, ball_.target);
      if (remaining <= distance(prev, next) + kEps) {
        ball_.pos = domain_.clamp(ball_.target);
        ball_.flight = Flight::None;
        ball_.vel = {};
        return;
      }
    }
    if (prev.x < config_.goal_x && next.x >= config_.goal_x) {
      const double frac = (config_.goal_x - prev.x) / (next.x - prev.x);
      const double y = prev.y + frac * (next.y - prev.y);
      if (std::abs(y) <= config_.goal_half_width + kEps) {
        ball_.pos = {config_.goal_x, y};
        ball_.flight = Flight::None;
        ball_.vel = {};
        result_.success = true;
        result_.scoring_time = (static_cast<double>(n) + frac) * config_.tick;
        event(n + 1, "GOAL", ball_.kicker != kNone ? bodies_[ball_.kicker].name : "-", "time=" + fmt("%.3f", *result_.scoring_time));
        finish(n + 1, "GOAL");
        return;
      }
    }
    const Vec2 clamped = domain_.clamp(next);
    ball_.pos = clamped;
    if (!(clamped == next)) {
      ball_.flight = Flight::None;
      ball_.vel = {};
      event(n + 1, "BALL_OUT", "-", "at=" + point(clamped));
    }
  }

  void take(std::int64_t tick, std::size_t who) {
    ball_.holder = who;
    ball_.flight = Flight::None;
    ball_.vel = {};
    ball_.launcher = kNone;
    ball_.pos = bodies_[who].pos;
    event(tick, "CONTROL", bodies_[who].name, "at=" + point(ball_.pos));
    if (ball_.pass_receiver != kNone) {
      if (who == ball_.pass_receiver) {
        ++result_.passes;
        event(tick, "PASS_COMPLETE", bodies_[who].name, "from=" + bodies_[ball_.pass_sender].name);
      }
      ball_.pass_sender = ball_.pass_receiver = kNone;
    }
  }

  void update_possession(std::int64_t tick) {
    const double r = config_.control_radius + kEps;
    if (ball_.launcher != kNone && distance(bodies_[ball_.launcher].pos, ball_.pos) > r) ball_.launcher = kNone;

    if (policy_.kind == OpponentPolicyKind::NearestIntercept) {
      for (std::size_t i = 0; i < bodies_.size(); ++i) {
        if (bodies_[i].team == Team::Opponent && distance(bodies_[i].pos, ball_.pos) <= r) {
          event(tick, "STEAL", bodies_[i].name, "at=" + point(ball_.pos));
          finish(tick, "STEAL");
          return;
        }
      }
    }
    if (ball_.holder != kNone) return;
    if (ball_.flight == Flight::Kick) return;
    if (ball_.flight == Flight::Pass) {
      const std::size_t rcv = ball_.pass_receiver;
      if (rcv != kNone && rcv != ball_.launcher && distance(bodies_[rcv].pos, ball_.pos) <= r) take(tick, rcv);
      return;
    }
    std::size_t best = kNone;
    double best_d = 0.0;
    for (std::size_t i = 0; i < bodies_.size(); ++i) {
      if (bodies_[i].team != Team::Own || i == ball_.launcher) continue;
      const double d = distance(bodies_[i].pos, ball_.pos);
      if (d > r) continue;
      if (best == kNone || d < best_d - kEps || (std::abs(d - best_d) <= kEps && bodies_[i].name < bodies_[best].name)) {
        best = i;
        best_d = d;
      }
    }
    if (best != kNone) take(tick, best);
  }

  bool plan_exhausted() const {
    if (ball_.flight != Flight::None) return false;
    return std::all_of(fsms_.begin(), fsms_.end(), [](const AgentFSM& f) { return f.finished(); });
  }

  const Domain& domain_;
  SimConfig config_;
  OpponentPolicy policy_;
  std::vector<AgentFSM> fsms_;
  std::vector<std::vector<Status>> status_;
  std::vector<std::size_t> actor_;
  std::vector<Body> bodies_;
  std::set<int> released_;
  Ball ball_;
  MatchResult result_;
};

}  // namespace

MatchResult run_match(const std::map<std::string, AgentFSM>& fsms, const WorldState& world0,
                      const Domain& domain, const SimConfig& config, const OpponentPolicy& opponents) {
  config.validate();
  return Match(fsms, world0, domain, config, opponents).run();
}

std::string MatchResult::trace_text() const {
  std::string out;
  for (const auto& e : trace) {
    out += "t=" + fmt("%.3f", static_cast<double>(e.tick) * tick) + " EVENT " + e.kind + " " + e.agent;
    if (!e.details.empty()) out += " " + e.details;
    out += "\n";
  }
  return out;
}

// ---- metrics -----------------------------------------------------------------

AggregateMetrics aggregate(const std::vector<MatchResult>& results) {
  if (results.empty()) throw Error(ErrorKind::EmptyInput, "no match results to aggregate");
  AggregateMetrics m;
  m.runs = results.size();
  std::size_t successes = 0;
  double passes = 0.0;
  double time = 0.0;
  for (const auto& r : results) {
    passes += r.passes;
    if (r.success && r.scoring_time) {
      ++successes;
      time += *r.scoring_time;
    }
  }
  m.success_rate = static_cast<double>(successes) / static_cast<double>(results.size());
  m.avg_passes = passes / static_cast<double>(results.size());
  if (successes > 0) m.avg_scoring_time = time / static_cast<double>(successes);
  return m;
}

std::optional<ReportFormat> report_format_from_string(std::string_view input) {
  const std::string lower = text::to_lower(text::trim(input));
  if (lower == "table") return ReportFormat::Table;
  if (lower == "tsv") return ReportFormat::Tsv;
  if (lower == "csv") return ReportFormat::Csv;
  return std::nullopt;
}

namespace {

constexpr std::string_view kRowLabels[] = {"Success Rate", "Avg. no. of passes", "Avg. scoring time"};

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string format_report(const AggregateMetrics& metrics, std::string_view column_label, ReportFormat format) {
  if (format == ReportFormat::Table) {
    const std::string values[] = {
        fmt("%.0f", std::round(metrics.success_rate * 100.0)) + "%",
        fmt("%.2f", metrics.avg_passes),
        metrics.avg_scoring_time ? fmt("%.1f", *metrics.avg_scoring_time) + " sec." : "n/a",
    };
    constexpr int kWidth = 22;
    std::string out = std::string(kWidth, ' ') + std::string(column_label) + "\n";
    for (std::size_t i = 0; i < 3; ++i) {
      std::string label(kRowLabels[i]);
      label.resize(kWidth, ' ');
      out += label + values[i] + "\n";
    }
    return out;
  }
  const std::string values[] = {
      fmt("%.4f", metrics.success_rate),
      fmt("%.4f", metrics.avg_passes),
      metrics.avg_scoring_time ? fmt("%.4f", *metrics.avg_scoring_time) : "",
  };
  const char sep = format == ReportFormat::Tsv ? '\t' : ',';
  auto field = [&](std::string_view s) { return format == ReportFormat::Csv ? csv_field(s) : std::string(s); };
  std::string out = "metric" + std::string(1, sep) + field(column_label) + "\n";
  for (std::size_t i = 0; i < 3; ++i) out += field(kRowLabels[i]) + sep + values[i] + "\n";
  return out;
}

}  // namespace llcoach

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "llcoach/error.hpp"
#include "llcoach/plan.hpp"
#include "llcoach/text.hpp"
#include "plan_checks.hpp"

namespace llcoach {

const std::string* GroundedAction::arg(std::string_view name) const {
  for (const auto& [key, value] : args) {
    if (key == name) return &value;
  }
  return nullptr;
}

PlanStep PlanStep::single(GroundedAction action) { return {StepKind::Single, {std::move(action)}}; }

PlanStep PlanStep::join(std::vector<GroundedAction> actions) {
  return {StepKind::Join, std::move(actions)};
}

std::size_t Plan::action_count() const {
  std::size_t n = 0;
  for (const auto& s : steps) n += s.actions.size();
  return n;
}

namespace {

enum class Tok { Ident, String, LBrace, RBrace, Comma, Colon, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::size_t line = 0;
  std::size_t column = 0;
  bool first_on_line = false;
};

struct Located {
  std::size_t line = 0;
  std::size_t column = 0;
};

[[noreturn]] void fail(ErrorKind kind, Located at, const std::string& what) {
  std::ostringstream msg;
  msg << "line " << at.line << ", column " << at.column << ": " << what;
  throw Error(kind, msg.str());
}

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> tokens;
  std::size_t line = 1;
  std::size_t col = 1;
  std::size_t last_token_line = 0;
  std::size_t i = 0;
  auto push = [&](Tok kind, std::string text, std::size_t tl, std::size_t tc) {
    tokens.push_back({kind, std::move(text), tl, tc, tl != last_token_line});
    last_token_line = tl;
  };
  while (i < src.size()) {
    const char c = src[i];
    if (c == '\n') {
      ++line;
      col = 1;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++col;
      ++i;
      continue;
    }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') ++i;
      continue;
    }
    const std::size_t tl = line;
    const std::size_t tc = col;
    switch (c) {
      case '{': push(Tok::LBrace, "{", tl, tc); ++i; ++col; continue;
      case '}': push(Tok::RBrace, "}", tl, tc); ++i; ++col; continue;
      case ',': push(Tok::Comma, ",", tl, tc); ++i; ++col; continue;
      case ':': push(Tok::Colon, ":", tl, tc); ++i; ++col; continue;
      default: break;
    }
    if (c == '\'' || c == '"') {
      std::size_t j = i + 1;
      while (j < src.size() && src[j] != c && src[j] != '\n') ++j;
      if (j >= src.size() || src[j] != c) fail(ErrorKind::SyntaxError, {tl, tc}, "unterminated quote");
      push(Tok::String, std::string(src.substr(i + 1, j - i - 1)), tl, tc);
      col += j - i + 1;
      i = j + 1;
      continue;
    }
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      push(Tok::Ident, std::string(src.substr(i, j - i)), tl, tc);
      col += j - i;
      i = j;
      continue;
    }
    fail(ErrorKind::SyntaxError, {tl, tc}, std::string("unexpected character '") + c + "'");
  }
  tokens.push_back({Tok::End, "", line, col, true});
  return tokens;
}

std::string describe(const Token& t) {
  switch (t.kind) {
    case Tok::End: return "end of input";
    case Tok::String: return "'" + t.text + "'";
    default: return "'" + t.text + "'";
  }
}

struct ParsedAction {
  GroundedAction action;
  Located at;
  std::vector<std::pair<std::string, Located>> raw_keys;
};

struct ParsedStep {
  PlanStep step;
  Located at;
  std::vector<ParsedAction> actions;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  std::vector<ParsedStep> parse_plan() {
    std::vector<ParsedStep> steps;
    while (peek().kind != Tok::End) {
      const Token& first = peek();
      if (!first.first_on_line) {
        fail(ErrorKind::SyntaxError, loc(first), "each plan step must start on a new line");
      }
      steps.push_back(parse_step());
    }
    return steps;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& next() { return tokens_[pos_ < tokens_.size() - 1 ? pos_++ : pos_]; }
  static Located loc(const Token& t) { return {t.line, t.column}; }

  const Token& expect(Tok kind, std::string_view what) {
    const Token& t = peek();
    if (t.kind != kind) {
      fail(ErrorKind::SyntaxError, loc(t), "expected " + std::string(what) + ", found " + describe(t));
    }
    return next();
  }

  ParsedStep parse_step() {
    ParsedStep out;
    const Token& head = peek();
    out.at = loc(head);
    if (head.kind == Tok::Ident && head.text == "JOIN") {
      next();
      expect(Tok::LBrace, "'{' after JOIN");
      out.actions.push_back(parse_action());
      while (peek().kind == Tok::Comma) {
        next();
        out.actions.push_back(parse_action());
      }
      expect(Tok::RBrace, "',' or '}' closing the JOIN block");
      if (out.actions.size() < 2) {
        fail(ErrorKind::SyntaxError, out.at, "a JOIN block needs at least two actions");
      }
      std::vector<GroundedAction> actions;
      for (const auto& a : out.actions) actions.push_back(a.action);
      out.step = PlanStep::join(std::move(actions));
    } else {
      out.actions.push_back(parse_action());
      out.step = PlanStep::single(out.actions.front().action);
    }
    return out;
  }

  ParsedAction parse_action() {
    ParsedAction out;
    const Token& id = peek();
    out.at = loc(id);
    if (id.kind == Tok::Ident && id.text == "JOIN") {
      fail(ErrorKind::SyntaxError, loc(id), "nested JOIN blocks are not allowed");
    }
    out.action.action_id = expect(Tok::Ident, "an ACTION_ID").text;
    const Token& agent = peek();
    if (agent.kind == Tok::Ident && agent.text == "JOIN") {
      fail(ErrorKind::SyntaxError, loc(agent), "expected an AGENT_ID, found JOIN");
    }
    out.action.agent_id = expect(Tok::Ident, "an AGENT_ID").text;
    expect(Tok::LBrace, "'{' opening the argument list");
    if (peek().kind != Tok::RBrace) {
      parse_pair(out);
      while (peek().kind == Tok::Comma) {
        next();
        parse_pair(out);
      }
    }
    expect(Tok::RBrace, "',' or '}' closing the argument list");
    return out;
  }

  void parse_pair(ParsedAction& out) {
    const Token& key = peek();
    if (key.kind != Tok::Ident && key.kind != Tok::String) {
      fail(ErrorKind::SyntaxError, loc(key), "expected an argument name, found " + describe(key));
    }
    next();
    expect(Tok::Colon, "':' after the argument name");
    const Token& value = peek();
    if (value.kind != Tok::Ident && value.kind != Tok::String) {
      fail(ErrorKind::SyntaxError, loc(value), "expected an argument value, found " + describe(value));
    }
    next();
    std::string name = text::to_upper(text::trim(key.text));
    out.raw_keys.emplace_back(name, loc(key));
    out.action.args.emplace_back(std::move(name), std::string(text::trim(value.text)));
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace

Plan parse_plan(std::string_view input, const ActionCatalog& catalog, const Domain& domain,
                ParseOptions options) {
  auto steps = Parser(tokenize(input)).parse_plan();
  if (steps.empty()) throw Error(ErrorKind::EmptyPlan, "plan has no steps");

  Plan plan;
  for (auto& parsed : steps) {
    for (auto& pa : parsed.actions) {
      for (const auto& issue : detail::check_action(pa.action, catalog, domain)) {
        fail(issue.error, pa.at, issue.message);
      }
      detail::order_args(pa.action, *catalog.find(pa.action.action_id));
    }
    std::vector<GroundedAction> actions;
    for (auto& pa : parsed.actions) actions.push_back(std::move(pa.action));
    parsed.step.actions = std::move(actions);
    if (options.strict_join) {
      if (auto dup = detail::duplicate_agent(parsed.step)) {
        fail(ErrorKind::SelfJoin, parsed.at, "agent " + *dup + " appears twice in one JOIN block");
      }
    }
    plan.steps.push_back(std::move(parsed.step));
  }
  return plan;
}

std::string serialize_action(const GroundedAction& action) {
  std::string out = action.action_id + " " + action.agent_id + " {";
  for (std::size_t i = 0; i < action.args.size(); ++i) {
    if (i > 0) out += ", ";
    out += "'" + action.args[i].first + "': " + action.args[i].second;
  }
  out += "}";
  return out;
}

std::string serialize_plan(const Plan& plan) {
  std::string out;
  for (const auto& step : plan.steps) {
    if (step.kind == StepKind::Join) {
      out += "JOIN{";
      for (std::size_t i = 0; i < step.actions.size(); ++i) {
        if (i > 0) out += ", ";
        out += serialize_action(step.actions[i]);
      }
      out += "}\n";
    } else {
      for (const auto& a : step.actions) out += serialize_action(a) + "\n";
    }
  }
  return out;
}

std::string extract_plan_text(std::string_view response) {
  std::string out;
  const auto lines = text::split_lines(response);
  // With a fenced block present, only its body is the plan.
  const bool fenced = std::any_of(lines.begin(), lines.end(),
                                  [](const auto& l) { return text::trim(l).starts_with("```"); });
  int fences = 0;
  for (const auto& raw : lines) {
    std::string_view line = text::trim(raw);
    if (line.starts_with("```")) {
      ++fences;
      continue;
    }
    if (fenced && fences != 1) continue;
    const std::string upper = text::to_upper(line);
    if (upper.ends_with("PLAN:") && upper.find('{') == std::string::npos) continue;
    // Drop list markers such as "1. ", "2) " or "- ".
    std::size_t digits = 0;
    while (digits < line.size() && std::isdigit(static_cast<unsigned char>(line[digits]))) ++digits;
    if (digits > 0 && digits + 1 < line.size() && (line[digits] == '.' || line[digits] == ')') &&
        line[digits + 1] == ' ') {
      line = text::trim(line.substr(digits + 2));
    } else if (line.starts_with("- ")) {
      line = text::trim(line.substr(2));
    }
    out += std::string(line) + "\n";
  }
  return out;
}

}  // namespace llcoach

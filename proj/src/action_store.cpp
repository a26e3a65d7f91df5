#include "llcoach/action_store.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

#include "llcoach/error.hpp"
#include "llcoach/text.hpp"

namespace llcoach {

namespace {

[[noreturn]] void parse_fail(std::string_view source, std::size_t line, const std::string& what) {
  std::ostringstream msg;
  msg << source << ":" << line << ": " << what;
  throw Error(ErrorKind::ParseError, msg.str());
}

bool is_variable(std::string_view term) { return term.size() > 1 && term.front() == '?'; }

}  // namespace

std::string_view to_string(PredicateName name) {
  switch (name) {
    case PredicateName::At: return "at";
    case PredicateName::BallAt: return "ball_at";
    case PredicateName::BallHeldBy: return "ball_held_by";
    case PredicateName::HasPassed: return "has_passed";
    case PredicateName::AlignedToGoal: return "aligned_to_goal";
  }
  return "?";
}

std::optional<PredicateName> predicate_from_string(std::string_view name) {
  for (auto p : {PredicateName::At, PredicateName::BallAt, PredicateName::BallHeldBy,
                 PredicateName::HasPassed, PredicateName::AlignedToGoal}) {
    if (to_string(p) == name) return p;
  }
  return std::nullopt;
}

std::size_t arity(PredicateName name) { return name == PredicateName::At ? 2 : 1; }

std::string Predicate::to_string() const {
  std::string out = negated ? "!" : "";
  out += llcoach::to_string(name);
  out += "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i > 0) out += ", ";
    out += args[i];
  }
  out += ")";
  return out;
}

Predicate parse_predicate(std::string_view input) {
  std::string_view s = text::trim(input);
  Predicate p;
  if (!s.empty() && s.front() == '!') {
    p.negated = true;
    s = text::trim(s.substr(1));
  }
  const auto open = s.find('(');
  if (open == std::string_view::npos || s.back() != ')') {
    throw Error(ErrorKind::ParseError, "malformed predicate '" + std::string(input) + "'");
  }
  const auto name = text::trim(s.substr(0, open));
  const auto parsed = predicate_from_string(name);
  if (!parsed) {
    throw Error(ErrorKind::ParseError, "unknown predicate '" + std::string(name) + "'");
  }
  p.name = *parsed;
  const auto inner = s.substr(open + 1, s.size() - open - 2);
  if (inner.find_first_of("()") != std::string_view::npos) {
    throw Error(ErrorKind::ParseError, "nested terms in '" + std::string(input) + "'");
  }
  for (const auto& term : text::split_top_level(inner, ',')) {
    const std::string_view bare = is_variable(term) ? std::string_view(term).substr(1) : term;
    if (!text::is_identifier(bare)) {
      throw Error(ErrorKind::ParseError, "bad term '" + term + "'");
    }
    p.args.push_back(term);
  }
  if (p.args.size() != arity(p.name)) {
    throw Error(ErrorKind::ParseError, std::string(name) + " expects " +
                                           std::to_string(arity(p.name)) + " argument(s)");
  }
  return p;
}

std::string_view to_string(ValueDomain domain) {
  switch (domain) {
    case ValueDomain::Role: return "ROLE";
    case ValueDomain::Waypoint: return "WAYPOINT";
    case ValueDomain::Agent: return "AGENT";
    case ValueDomain::FreeText: return "FREE_TEXT";
  }
  return "?";
}

std::optional<ValueDomain> value_domain_from_string(std::string_view s) {
  const std::string upper = text::to_upper(s);
  for (auto d : {ValueDomain::Role, ValueDomain::Waypoint, ValueDomain::Agent, ValueDomain::FreeText}) {
    if (to_string(d) == upper) return d;
  }
  return std::nullopt;
}

const ActionArg* ActionSchema::find_arg(std::string_view name) const {
  for (const auto& a : args) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

// ---- action file -----------------------------------------------------------

namespace {

enum class Field { ActionId, Description, Args, Preconditions, Effects };

constexpr std::pair<Field, std::string_view> kFields[] = {
    {Field::ActionId, "ACTION_ID:"},
    {Field::Description, "DESCRIPTION:"},
    {Field::Args, "ARGS:"},
    {Field::Preconditions, "PRECONDITIONS:"},
    {Field::Effects, "EFFECTS:"},
};

struct RawField {
  std::string value;
  std::size_t line = 0;
  bool present = false;
};

struct RawBlock {
  std::size_t first_line = 0;
  RawField fields[5];
};

std::vector<Predicate> parse_predicate_list(const RawField& f, std::string_view source) {
  std::vector<Predicate> out;
  const auto v = text::trim(f.value);
  if (v.empty() || text::to_lower(v) == "none") return out;
  for (const auto& piece : text::split_top_level(v, ',')) {
    try {
      out.push_back(parse_predicate(piece));
    } catch (const Error& e) {
      parse_fail(source, f.line, e.detail());
    }
  }
  return out;
}

ActionSchema build_schema(const RawBlock& block, std::string_view source) {
  const auto& id_field = block.fields[static_cast<int>(Field::ActionId)];
  if (!id_field.present) parse_fail(source, block.first_line, "block does not start with ACTION_ID:");
  ActionSchema schema;
  schema.action_id = std::string(text::trim(id_field.value));
  if (!text::is_identifier(schema.action_id)) {
    parse_fail(source, id_field.line, "bad ACTION_ID '" + schema.action_id + "'");
  }
  const auto& desc = block.fields[static_cast<int>(Field::Description)];
  if (!desc.present || text::trim(desc.value).empty()) {
    parse_fail(source, id_field.line, "action '" + schema.action_id + "' has no DESCRIPTION");
  }
  schema.description = std::string(text::trim(desc.value));

  const auto& args = block.fields[static_cast<int>(Field::Args)];
  const auto args_text = text::trim(args.value);
  if (!args_text.empty() && text::to_lower(args_text) != "none") {
    for (const auto& piece : text::split_top_level(args_text, ',')) {
      const auto colon = piece.find(':');
      if (colon == std::string::npos) {
        parse_fail(source, args.line, "expected ARG_NAME : ARG_VALUE, got '" + piece + "'");
      }
      ActionArg arg;
      arg.name = text::to_upper(text::trim(std::string_view(piece).substr(0, colon)));
      if (!text::is_upper_token(arg.name) || arg.name == "AGENT") {
        parse_fail(source, args.line, "bad argument name '" + arg.name + "'");
      }
      const auto domain = value_domain_from_string(text::trim(std::string_view(piece).substr(colon + 1)));
      if (!domain) parse_fail(source, args.line, "unknown argument domain in '" + piece + "'");
      arg.domain = *domain;
      if (schema.find_arg(arg.name) != nullptr) {
        parse_fail(source, args.line, "duplicate argument '" + arg.name + "'");
      }
      schema.args.push_back(std::move(arg));
    }
  }
  const auto& pre = block.fields[static_cast<int>(Field::Preconditions)];
  const auto& eff = block.fields[static_cast<int>(Field::Effects)];
  schema.preconditions = parse_predicate_list(pre, source);
  schema.effects = parse_predicate_list(eff, source);

  for (const auto* list : {&schema.preconditions, &schema.effects}) {
    const std::size_t line = list == &schema.preconditions ? pre.line : eff.line;
    for (const auto& p : *list) {
      for (const auto& term : p.args) {
        if (!is_variable(term) || term == kAgentVariable) continue;
        if (schema.find_arg(std::string_view(term).substr(1)) == nullptr) {
          std::ostringstream msg;
          msg << source << ":" << line << ": variable " << term << " in action '"
              << schema.action_id << "' is not declared in ARGS";
          throw Error(ErrorKind::UndeclaredVariable, msg.str());
        }
      }
    }
  }
  return schema;
}

}  // namespace

std::vector<ActionSchema> parse_action_file(std::string_view input, std::string_view source) {
  const auto lines = text::split_lines(input);
  std::vector<RawBlock> blocks;
  RawBlock* current = nullptr;
  int last_field = -1;

  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    const auto line = text::trim(lines[i]);
    if (!line.empty() && line.front() == '#') continue;
    if (line.empty()) {
      current = nullptr;
      last_field = -1;
      continue;
    }
    int matched = -1;
    for (int f = 0; f < 5; ++f) {
      if (text::starts_with_ci(line, kFields[f].second)) {
        matched = f;
        break;
      }
    }
    if (matched < 0) {
      if (current == nullptr || last_field < 0) {
        parse_fail(source, line_no, "expected a field header, got '" + std::string(line) + "'");
      }
      auto& field = current->fields[last_field];
      field.value += field.value.empty() ? "" : " ";
      field.value += line;
      continue;
    }
    if (current == nullptr) {
      if (matched != static_cast<int>(Field::ActionId)) {
        parse_fail(source, line_no, "an action block must start with ACTION_ID:");
      }
      blocks.emplace_back();
      current = &blocks.back();
      current->first_line = line_no;
    } else if (matched == static_cast<int>(Field::ActionId)) {
      parse_fail(source, line_no, "ACTION_ID: inside a block; separate actions by a blank line");
    }
    auto& field = current->fields[matched];
    if (field.present) parse_fail(source, line_no, "duplicate field " + std::string(kFields[matched].second));
    field.present = true;
    field.line = line_no;
    field.value = std::string(text::trim(line.substr(kFields[matched].second.size())));
    last_field = matched;
  }

  std::vector<ActionSchema> schemas;
  std::set<std::string> ids;
  for (const auto& block : blocks) {
    auto schema = build_schema(block, source);
    if (!ids.insert(schema.action_id).second) {
      std::ostringstream msg;
      msg << source << ":" << block.first_line << ": action id '" << schema.action_id
          << "' defined twice";
      throw Error(ErrorKind::DuplicateActionId, msg.str());
    }
    schemas.push_back(std::move(schema));
  }
  return schemas;
}

std::string serialize_action(const ActionSchema& schema) {
  auto join_predicates = [](const std::vector<Predicate>& ps) {
    std::string out;
    for (std::size_t i = 0; i < ps.size(); ++i) {
      if (i > 0) out += ", ";
      out += ps[i].to_string();
    }
    return out;
  };
  std::string out;
  out += "ACTION_ID: " + schema.action_id + "\n";
  out += "DESCRIPTION: " + schema.description + "\n";
  out += "ARGS:";
  for (std::size_t i = 0; i < schema.args.size(); ++i) {
    out += i == 0 ? " " : ", ";
    out += schema.args[i].name + " : " + std::string(to_string(schema.args[i].domain));
  }
  out += "\n";
  const auto pre = join_predicates(schema.preconditions);
  const auto eff = join_predicates(schema.effects);
  out += "PRECONDITIONS:" + (pre.empty() ? std::string() : " " + pre) + "\n";
  out += "EFFECTS:" + (eff.empty() ? std::string() : " " + eff) + "\n";
  return out;
}

std::string serialize_action_file(const std::vector<ActionSchema>& schemas) {
  std::string out;
  for (std::size_t i = 0; i < schemas.size(); ++i) {
    if (i > 0) out += "\n";
    out += serialize_action(schemas[i]);
  }
  return out;
}

ActionCatalog::ActionCatalog(std::vector<ActionSchema> schemas) : schemas_(std::move(schemas)) {
  for (std::size_t i = 0; i < schemas_.size(); ++i) {
    if (!by_id_.emplace(schemas_[i].action_id, i).second) {
      throw Error(ErrorKind::DuplicateActionId, schemas_[i].action_id);
    }
  }
}

const ActionSchema* ActionCatalog::find(std::string_view action_id) const {
  auto it = by_id_.find(action_id);
  return it == by_id_.end() ? nullptr : &schemas_[it->second];
}

// ---- embeddings ----------------------------------------------------------

HashEmbeddingProvider::HashEmbeddingProvider(std::size_t dim) : dim_(dim) {
  if (dim_ == 0) throw Error(ErrorKind::InvalidArgument, "embedding dimension must be positive");
}

Embedding HashEmbeddingProvider::embed(std::string_view input) const {
  Embedding e;
  e.vector.assign(dim_, 0.0);
  auto add_token = [&](std::string_view token) {
    std::uint64_t h = 14695981039346656037ULL;
    for (char c : token) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ULL;
    }
    const double sign = (h >> 63) != 0 ? -1.0 : 1.0;
    e.vector[h % dim_] += sign;
  };
  std::string token;
  for (char c : input) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      token.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!token.empty()) {
      add_token(token);
      token.clear();
    }
  }
  if (!token.empty()) add_token(token);
  return e;
}

RecordedEmbeddingProvider RecordedEmbeddingProvider::parse(std::string_view input,
                                                           std::string_view source) {
  const VectorIndex index = VectorIndex::parse(input, source);
  RecordedEmbeddingProvider provider;
  provider.dim_ = index.dim();
  for (const auto& entry : index.entries()) provider.vectors_.emplace(entry.key, entry.embedding);
  return provider;
}

Embedding RecordedEmbeddingProvider::embed(std::string_view input) const {
  if (auto hit = lookup(embedding_key(input))) return *hit;
  throw Error(ErrorKind::ProviderError,
              "no recorded embedding for text key " + embedding_key(input));
}

std::optional<Embedding> RecordedEmbeddingProvider::lookup(std::string_view key) const {
  auto it = vectors_.find(key);
  if (it == vectors_.end()) return std::nullopt;
  return it->second;
}

std::string embedding_key(std::string_view input) { return text::sha256_hex(input).substr(0, 16); }

std::string embedding_text(const ActionSchema& schema) { return schema.description; }

Embedding embed(std::string_view input, const EmbeddingProvider& provider) {
  Embedding e = provider.embed(input);
  if (e.dim() != provider.dim()) {
    throw Error(ErrorKind::DimMismatch, "provider '" + provider.id() + "' returned dimension " +
                                            std::to_string(e.dim()) + ", declared " +
                                            std::to_string(provider.dim()));
  }
  for (double v : e.vector) {
    if (!std::isfinite(v)) throw Error(ErrorKind::ProviderError, "non-finite embedding component");
  }
  return e;
}

double cosine_similarity(const Embedding& a, const Embedding& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorKind::DimMismatch,
                std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
  }
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    dot += a.vector[i] * b.vector[i];
    na += a.vector[i] * a.vector[i];
    nb += b.vector[i] * b.vector[i];
  }
  if (na == 0.0 || nb == 0.0) throw Error(ErrorKind::ZeroVector, "cosine of an all-zero vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

VectorIndex::VectorIndex(std::vector<IndexEntry> entries) : entries_(std::move(entries)) {
  std::set<std::string, std::less<>> keys;
  for (const auto& e : entries_) {
    if (e.embedding.dim() == 0) throw Error(ErrorKind::InvalidArgument, "empty embedding for " + e.key);
    if (dim_ == 0) dim_ = e.embedding.dim();
    if (e.embedding.dim() != dim_) {
      throw Error(ErrorKind::DimMismatch, "entry '" + e.key + "' has dimension " +
                                              std::to_string(e.embedding.dim()));
    }
    for (double v : e.embedding.vector) {
      if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "non-finite value in " + e.key);
    }
    if (!keys.insert(e.key).second) throw Error(ErrorKind::InvalidArgument, "duplicate key " + e.key);
  }
}

VectorIndex VectorIndex::build(const std::vector<ActionSchema>& schemas,
                               const EmbeddingProvider& provider) {
  std::vector<IndexEntry> entries;
  entries.reserve(schemas.size());
  for (const auto& s : schemas) entries.push_back({s.action_id, embed(embedding_text(s), provider)});
  return VectorIndex(std::move(entries));
}

std::string VectorIndex::serialize() const {
  std::string out;
  for (const auto& e : entries_) {
    out += e.key;
    for (double v : e.embedding.vector) out += " " + text::format_double(v);
    out += "\n";
  }
  return out;
}

VectorIndex VectorIndex::parse(std::string_view input, std::string_view source) {
  std::vector<IndexEntry> entries;
  const auto lines = text::split_lines(input);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = text::trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    std::istringstream in{std::string(line)};
    IndexEntry entry;
    in >> entry.key;
    std::string tok;
    while (in >> tok) {
      double v = 0.0;
      if (!text::parse_double(tok, v)) parse_fail(source, i + 1, "bad component '" + tok + "'");
      entry.embedding.vector.push_back(v);
    }
    if (entry.embedding.vector.empty()) parse_fail(source, i + 1, "no vector components");
    if (!entries.empty() && entries.front().embedding.dim() != entry.embedding.dim()) {
      std::ostringstream msg;
      msg << source << ":" << i + 1 << ": dimension " << entry.embedding.dim() << ", expected "
          << entries.front().embedding.dim();
      throw Error(ErrorKind::DimMismatch, msg.str());
    }
    entries.push_back(std::move(entry));
  }
  try {
    return VectorIndex(std::move(entries));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidArgument) {
      throw Error(ErrorKind::ParseError, std::string(source) + ": " + e.detail());
    }
    throw;
  }
}

std::vector<ScoredKey> nearest_neighbors(const VectorIndex& index, const Embedding& query,
                                         std::size_t k) {
  if (k == 0) return {};
  if (index.empty()) throw Error(ErrorKind::EmptyIndex, "retrieval from an empty index");
  std::vector<ScoredKey> scored;
  scored.reserve(index.size());
  for (const auto& e : index.entries()) {
    scored.push_back({e.key, cosine_similarity(query, e.embedding)});
  }
  const std::size_t n = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(),
                    [](const ScoredKey& a, const ScoredKey& b) {
                      if (a.similarity != b.similarity) return a.similarity > b.similarity;
                      return a.key < b.key;
                    });
  scored.resize(n);
  return scored;
}

std::string retrieval_query(const PlanningGoal& goal, const Domain& domain, bool include_domain) {
  std::string q = goal.text;
  if (!include_domain) return q;
  if (!domain.description().empty()) q += "\n" + domain.description();
  q += "\nWaypoints:";
  for (const auto& w : domain.waypoints()) q += " " + w.token;
  q += "\nRoles:";
  for (const auto& r : domain.roles()) q += " " + r.name;
  return q;
}

std::vector<ActionSchema> retrieve_actions(std::string_view query, const VectorIndex& index,
                                           const ActionCatalog& catalog,
                                           const EmbeddingProvider& provider, std::size_t k) {
  if (k == 0) return {};
  if (index.empty()) throw Error(ErrorKind::EmptyIndex, "retrieval from an empty index");
  const Embedding q = embed(query, provider);
  std::vector<ActionSchema> out;
  for (const auto& hit : nearest_neighbors(index, q, k)) {
    const ActionSchema* schema = catalog.find(hit.key);
    if (schema == nullptr) {
      throw Error(ErrorKind::InvalidArgument, "index key '" + hit.key + "' has no action schema");
    }
    out.push_back(*schema);
  }
  return out;
}

}  // namespace llcoach

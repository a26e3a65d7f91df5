#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "llcoach/domain.hpp"

namespace llcoach {

enum class PredicateName { At, BallAt, BallHeldBy, HasPassed, AlignedToGoal };

std::string_view to_string(PredicateName name);
std::optional<PredicateName> predicate_from_string(std::string_view name);
std::size_t arity(PredicateName name);

/// The implicit variable bound to the acting agent.
inline constexpr std::string_view kAgentVariable = "?AGENT";

/// A (possibly negated) atom. Arguments starting with '?' are variables,
/// anything else is a domain token.
struct Predicate {
  PredicateName name = PredicateName::At;
  std::vector<std::string> args;
  bool negated = false;

  /// `name(arg,...)`, prefixed with `!` when negated.
  std::string to_string() const;

  friend bool operator==(const Predicate&, const Predicate&) = default;
  friend auto operator<=>(const Predicate&, const Predicate&) = default;
};

/// Parses `[!]name(arg, ...)`; throws ParseError.
Predicate parse_predicate(std::string_view text);

enum class ValueDomain { Role, Waypoint, Agent, FreeText };

std::string_view to_string(ValueDomain domain);
std::optional<ValueDomain> value_domain_from_string(std::string_view text);

struct ActionArg {
  std::string name;
  ValueDomain domain = ValueDomain::FreeText;

  friend bool operator==(const ActionArg&, const ActionArg&) = default;
};

struct ActionSchema {
  std::string action_id;
  std::string description;
  std::vector<ActionArg> args;
  std::vector<Predicate> preconditions;
  std::vector<Predicate> effects;

  const ActionArg* find_arg(std::string_view name) const;

  friend bool operator==(const ActionSchema&, const ActionSchema&) = default;
};

/// Parses the ACTION_ID / DESCRIPTION / ARGS / PRECONDITIONS / EFFECTS block
/// format, one action per blank-line separated block. Throws ParseError (with
/// line number), DuplicateActionId, UndeclaredVariable.
std::vector<ActionSchema> parse_action_file(std::string_view text,
                                            std::string_view source = "<actions>");
std::string serialize_action(const ActionSchema& schema);
std::string serialize_action_file(const std::vector<ActionSchema>& schemas);

/// Lookup by id; schemas are kept in file order.
class ActionCatalog {
 public:
  ActionCatalog() = default;
  explicit ActionCatalog(std::vector<ActionSchema> schemas);

  const std::vector<ActionSchema>& schemas() const { return schemas_; }
  const ActionSchema* find(std::string_view action_id) const;
  bool empty() const { return schemas_.empty(); }
  std::size_t size() const { return schemas_.size(); }

 private:
  std::vector<ActionSchema> schemas_;
  std::map<std::string, std::size_t, std::less<>> by_id_;
};

// ---- embeddings ----------------------------------------------------------

struct Embedding {
  std::vector<double> vector;

  std::size_t dim() const { return vector.size(); }
  friend bool operator==(const Embedding&, const Embedding&) = default;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual std::string id() const = 0;
  virtual std::size_t dim() const = 0;
  /// Deterministic for a fixed provider and text. Throws ProviderError.
  virtual Embedding embed(std::string_view text) const = 0;
};

/// Bag-of-words over lower-cased alphanumeric tokens; each token is hashed
/// (FNV-1a 64) onto one of `dim` buckets with a hash-derived sign.
class HashEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit HashEmbeddingProvider(std::size_t dim = 16);

  std::string id() const override { return "hash-bow"; }
  std::size_t dim() const override { return dim_; }
  Embedding embed(std::string_view text) const override;

 private:
  std::size_t dim_;
};

/// Vectors recorded on disk, one `<key> <v1> ... <vdim>` line each. Texts are
/// looked up by `embedding_key(text)`; entries may also be keyed by action id.
class RecordedEmbeddingProvider final : public EmbeddingProvider {
 public:
  static RecordedEmbeddingProvider parse(std::string_view text,
                                         std::string_view source = "<embeddings>");

  std::string id() const override { return "recorded"; }
  std::size_t dim() const override { return dim_; }
  Embedding embed(std::string_view text) const override;
  std::optional<Embedding> lookup(std::string_view key) const;

 private:
  std::size_t dim_ = 0;
  std::map<std::string, Embedding, std::less<>> vectors_;
};

/// Stable lookup key for a text: first 16 hex digits of its SHA-256.
std::string embedding_key(std::string_view text);

/// The text embedded for an action: its natural-language description.
std::string embedding_text(const ActionSchema& schema);

Embedding embed(std::string_view text, const EmbeddingProvider& provider);

/// dot(a,b) / (|a||b|). Throws DimMismatch, ZeroVector.
double cosine_similarity(const Embedding& a, const Embedding& b);

struct IndexEntry {
  std::string key;
  Embedding embedding;
};

/// Exact (full scan) vector index. Immutable once built.
class VectorIndex {
 public:
  VectorIndex() = default;
  /// Throws DimMismatch, InvalidArgument (duplicate key / NaN).
  VectorIndex(std::vector<IndexEntry> entries);

  static VectorIndex build(const std::vector<ActionSchema>& schemas,
                           const EmbeddingProvider& provider);

  const std::vector<IndexEntry>& entries() const { return entries_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  /// Recorded-embedding format, usable by RecordedEmbeddingProvider.
  std::string serialize() const;
  static VectorIndex parse(std::string_view text, std::string_view source = "<index>");

 private:
  std::vector<IndexEntry> entries_;
  std::size_t dim_ = 0;
};

struct ScoredKey {
  std::string key;
  double similarity = 0.0;
};

/// Top-k entries by cosine similarity to `query`, descending, ties broken by
/// key. Throws EmptyIndex when k > 0 and the index is empty.
std::vector<ScoredKey> nearest_neighbors(const VectorIndex& index, const Embedding& query,
                                         std::size_t k);

inline constexpr std::size_t kDefaultRetrievalK = 8;

/// Query text used for retrieval: the planning goal, optionally followed by a
/// summary of the domain (description, waypoint tokens, role names).
std::string retrieval_query(const PlanningGoal& goal, const Domain& domain,
                            bool include_domain = true);

/// The k schemas most similar to the embedded query.
std::vector<ActionSchema> retrieve_actions(std::string_view query, const VectorIndex& index,
                                           const ActionCatalog& catalog,
                                           const EmbeddingProvider& provider, std::size_t k);

}  // namespace llcoach

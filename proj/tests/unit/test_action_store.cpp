#include <gtest/gtest.h>

#include <random>

#include "llcoach/action_store.hpp"
#include "llcoach/data.hpp"
#include "oracles.hpp"

using namespace llcoach;
using oracle::error_kind;

TEST(ActionStore, BundledCatalog) {
  const auto& cat = oracle::bundled_catalog();
  ASSERT_EQ(cat.size(), 7u);
  const ActionSchema* pass = cat.find("pass_the_ball");
  ASSERT_NE(pass, nullptr);
  ASSERT_EQ(pass->args.size(), 2u);
  EXPECT_EQ(pass->args[0].name, "SENDER");
  EXPECT_EQ(pass->args[0].domain, ValueDomain::Role);
  EXPECT_EQ(pass->preconditions.front().to_string(), "ball_held_by(?SENDER)");
  EXPECT_EQ(cat.find("fly"), nullptr);
}

TEST(ActionStore, ActionFileRoundTrip) {
  const auto schemas = parse_action_file(data::get("actions.txt"));
  EXPECT_EQ(parse_action_file(serialize_action_file(schemas)), schemas);
}

TEST(ActionStore, ActionFileErrors) {
  const std::string twice =
      "ACTION_ID: a\nDESCRIPTION: x\nARGS:\nPRECONDITIONS:\nEFFECTS:\n\n"
      "ACTION_ID: a\nDESCRIPTION: y\nARGS:\nPRECONDITIONS:\nEFFECTS:\n";
  EXPECT_EQ(error_kind([&] { parse_action_file(twice); }), ErrorKind::DuplicateActionId);
  const std::string undeclared =
      "ACTION_ID: a\nDESCRIPTION: x\nARGS:\nPRECONDITIONS: at(?AGENT, ?WHERE)\nEFFECTS:\n";
  EXPECT_EQ(error_kind([&] { parse_action_file(undeclared); }), ErrorKind::UndeclaredVariable);
  EXPECT_EQ(error_kind([] { parse_predicate("flies(?AGENT)"); }), ErrorKind::ParseError);
}

TEST(ActionStore, PredicateParse) {
  const Predicate p = parse_predicate("!ball_held_by( ?AGENT )");
  EXPECT_TRUE(p.negated);
  EXPECT_EQ(p.name, PredicateName::BallHeldBy);
  EXPECT_EQ(p.to_string(), "!ball_held_by(?AGENT)");
  EXPECT_EQ(error_kind([] { parse_predicate("at(?AGENT)"); }), ErrorKind::ParseError);
}

TEST(ActionStore, HashEmbeddingIsDeterministic) {
  HashEmbeddingProvider p(16);
  const Embedding a = p.embed("Kick the ball, kick!");
  EXPECT_EQ(a, p.embed("kick THE ball kick"));
  EXPECT_EQ(a.dim(), 16u);
  double l1 = 0.0;
  for (double v : a.vector) l1 += std::abs(v);
  EXPECT_LE(l1, 4.0);
}

TEST(ActionStore, CosineAgainstOracle) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    Embedding a, b;
    for (int d = 0; d < 8; ++d) {
      a.vector.push_back(n(rng));
      b.vector.push_back(n(rng));
    }
    EXPECT_EQ(cosine_similarity(a, b), oracle::cosine(a.vector, b.vector));
    EXPECT_NEAR(cosine_similarity(a, a), 1.0, 1e-12);
  }
  EXPECT_EQ(error_kind([] { cosine_similarity({{1, 0}}, {{1}}); }), ErrorKind::DimMismatch);
  EXPECT_EQ(error_kind([] { cosine_similarity({{0, 0}}, {{1, 0}}); }), ErrorKind::ZeroVector);
}

TEST(ActionStore, NearestNeighborsMatchBruteForce) {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<int> coord(-2, 2);  // small integers produce exact ties
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<IndexEntry> entries;
    const int n = 1 + trial % 40;
    for (int i = 0; i < n; ++i) {
      IndexEntry e;
      e.key = "k" + std::to_string((i * 7919) % 1000);
      do {
        e.embedding.vector.assign(4, 0.0);
        for (auto& v : e.embedding.vector) v = coord(rng);
      } while (e.embedding.vector == std::vector<double>(4, 0.0));
      entries.push_back(e);
    }
    Embedding q{{1, 1, 0, -1}};
    const VectorIndex index(entries);
    for (std::size_t k : {1u, 3u, 8u, 100u}) {
      std::vector<std::string> got;
      for (const auto& hit : nearest_neighbors(index, q, k)) got.push_back(hit.key);
      EXPECT_EQ(got, oracle::brute_force_top_k(entries, q.vector, k));
    }
  }
}

TEST(ActionStore, NearestNeighborsEdges) {
  EXPECT_TRUE(nearest_neighbors(VectorIndex{}, {{1}}, 0).empty());
  EXPECT_EQ(error_kind([] { nearest_neighbors(VectorIndex{}, {{1}}, 1); }), ErrorKind::EmptyIndex);
  EXPECT_EQ(error_kind([] { VectorIndex({{"a", {{1, 0}}}, {"a", {{0, 1}}}}); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(error_kind([] { VectorIndex({{"a", {{1, 0}}}, {"b", {{0, 1, 2}}}}); }), ErrorKind::DimMismatch);
}

TEST(ActionStore, IndexSerializeRoundTrip) {
  HashEmbeddingProvider p(16);
  const VectorIndex index = VectorIndex::build(oracle::bundled_catalog().schemas(), p);
  const VectorIndex again = VectorIndex::parse(index.serialize());
  ASSERT_EQ(again.size(), index.size());
  for (std::size_t i = 0; i < index.size(); ++i) {
    EXPECT_EQ(again.entries()[i].key, index.entries()[i].key);
    EXPECT_EQ(again.entries()[i].embedding, index.entries()[i].embedding);
  }
}

TEST(ActionStore, RecordedProviderLooksUpByTextKey) {
  const std::string text = "pass the ball";
  const auto provider = RecordedEmbeddingProvider::parse(embedding_key(text) + " 1 0 0\nother 0 1 0\n");
  EXPECT_EQ(provider.dim(), 3u);
  EXPECT_EQ(provider.embed(text), (Embedding{{1, 0, 0}}));
  EXPECT_EQ(error_kind([&] { provider.embed("unknown text"); }), ErrorKind::ProviderError);
}

TEST(ActionStore, RetrieveActionsReturnsSchemas) {
  HashEmbeddingProvider p(16);
  const auto& cat = oracle::bundled_catalog();
  const VectorIndex index = VectorIndex::build(cat.schemas(), p);
  const std::string query = retrieval_query(default_planning_goal(), oracle::bundled_domain());
  const auto all = retrieve_actions(query, index, cat, p, 100);
  EXPECT_EQ(all.size(), cat.size());
  const auto top = retrieve_actions(query, index, cat, p, 3);
  ASSERT_EQ(top.size(), 3u);
  std::vector<std::string> expected = oracle::brute_force_top_k(index.entries(), p.embed(query).vector, 3);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(top[i].action_id, expected[i]);
}

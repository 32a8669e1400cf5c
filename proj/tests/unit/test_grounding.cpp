#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "erag/errors.hpp"
#include "erag/grounding.hpp"
#include "support/oracles.hpp"

using namespace erag;

namespace {

struct Fixture {
  SceneGraph graph;
  EmbeddingIndex index{std::make_shared<HashingEmbedder>()};

  explicit Fixture(SceneGraph g) : graph(std::move(g)) {
    for (const auto& [id, e] : graph.entities()) index.upsert_document(EmbeddingIndex::document_for(e));
  }
  void add(Entity e) { index.apply_graph_delta(graph, graph.upsert_entity(std::move(e))); }
};

Abstraction abstraction_of(std::vector<std::string> terms) {
  Abstraction a;
  a.task = "t";
  a.entities = std::move(terms);
  return a;
}

// Maps a handful of phrases onto shared concept axes, standing in for a
// semantic embedding model.
class ConceptEmbedder final : public Embedder {
 public:
  std::size_t dimension() const override { return 3; }
  EmbeddingVector embed(std::string_view text) const override {
    if (text.empty()) throw ValidationError("empty");
    const std::string t(text);
    std::vector<double> v(3, 0.0);
    if (t == "utensil for flipping" || t == "spatula" || t == "turner") v[0] = 1.0;
    else if (t == "egg") v[1] = 1.0;
    else v[2] = 1.0;
    return {v};
  }
};

void expect_subset(const SceneGraph& sub, const SceneGraph& g) {
  for (const auto& [id, e] : sub.entities()) {
    ASSERT_NE(g.find_entity(id), nullptr);
    EXPECT_EQ(e, *g.find_entity(id));
  }
  for (const auto& [id, e] : sub.edges()) {
    ASSERT_NE(g.find_edge(id), nullptr);
    EXPECT_EQ(e, *g.find_edge(id));
    EXPECT_TRUE(sub.contains(e.source) && sub.contains(e.target));
  }
}

}  // namespace

TEST(Extract, SingleExactMatch) {
  SceneGraph g;
  g.upsert_entity({"egg_1", "egg", {{"temperature", std::string("Cold")}}, 0});
  g.upsert_entity({"shelf_1", "shelf", {}, 0});
  Fixture f(g);
  const auto sub = extract(f.graph, f.index, abstraction_of({"egg"}), {}, {});
  EXPECT_EQ(sub.entity_ids(), std::set<std::string>{"egg_1"});
  EXPECT_EQ(sub.graph.edge_count(), 0u);
  EXPECT_EQ(sub.provenance.at("egg_1"), std::vector<std::string>{"egg"});
  EXPECT_EQ(sub.token_count, llm::count_tokens(sub.serialized));
}

TEST(Extract, KeepsConnectingEdgeAndDropsUnrelated) {
  SceneGraph g;
  g.upsert_entity({"egg_1", "egg", {}, 0});
  g.upsert_entity({"pan_1", "pan", {}, 0});
  g.upsert_edge({"egg_1|on|pan_1", "egg_1", "pan_1", {"on"}});
  const char* junk[] = {"ladder", "truss", "zebra", "tractor", "helmet"};
  for (int i = 0; i < 50; ++i) {
    g.upsert_entity({"junk_" + std::to_string(i), junk[i % 5], {}, 0});
    if (i > 0) {
      g.upsert_edge({"j" + std::to_string(i), "junk_" + std::to_string(i), "junk_0", {"near"}});
    }
  }
  g.upsert_edge({"pan_to_junk", "pan_1", "junk_3", {"near"}});
  Fixture f(g);
  const auto sub = extract(f.graph, f.index, abstraction_of({"egg", "pan"}), {}, {});
  EXPECT_EQ(sub.entity_ids(), (std::set<std::string>{"egg_1", "pan_1"}));
  ASSERT_EQ(sub.graph.edge_count(), 1u);
  EXPECT_EQ(sub.graph.edges().begin()->first, "egg_1|on|pan_1");
}

TEST(Extract, FeedbackTermReachesFlippingUtensils) {
  SceneGraph g;
  g.upsert_entity({"spatula_1", "spatula", {}, 0});
  g.upsert_entity({"turner_1", "turner", {}, 0});
  g.upsert_entity({"egg_1", "egg", {}, 0});
  g.upsert_entity({"mug_1", "mug", {}, 0});
  EmbeddingIndex index(std::make_shared<ConceptEmbedder>());
  for (const auto& [id, e] : g.entities()) index.upsert_document(EmbeddingIndex::document_for(e));

  const Abstraction a = abstraction_of({"egg"});
  const auto before = extract(g, index, a, {}, {});
  EXPECT_EQ(before.entity_ids(), std::set<std::string>{"egg_1"});
  QueryTermSet fb;
  fb.feedback_terms.push_back({"utensil for flipping", {}, {}});
  const auto after = extract(g, index, a, fb, {});
  EXPECT_EQ(after.entity_ids(), (std::set<std::string>{"egg_1", "spatula_1", "turner_1"}));
}

TEST(AttributeView, UnionFallbackAndErrors) {
  Abstraction a = abstraction_of({"egg", "food"});
  a.attribute_map["egg"] = {"temperature", "breakable"};
  a.attribute_map["food"] = {"isCooked"};
  QueryTermSet fb;
  fb.feedback_terms.push_back({"cold thing", {"isColdSource"}, {}});
  fb.feedback_terms.push_back({"thing", {}, {}});
  const auto& cat = household_attribute_catalog();
  std::map<std::string, std::vector<std::string>> prov = {
      {"egg_1", {"egg"}}, {"egg_2", {"egg", "food"}}, {"x", {"cold thing"}}, {"y", {"thing"}}};
  EXPECT_EQ(attribute_view_for("egg_1", prov, a, fb, cat), (std::set<std::string>{"temperature", "breakable"}));
  EXPECT_EQ(attribute_view_for("egg_2", prov, a, fb, cat),
            (std::set<std::string>{"temperature", "breakable", "isCooked"}));
  EXPECT_EQ(attribute_view_for("x", prov, a, fb, cat), std::set<std::string>{"isColdSource"});
  EXPECT_EQ(attribute_view_for("y", prov, a, fb, cat), std::set<std::string>(cat.begin(), cat.end()));
  EXPECT_THROW(attribute_view_for("ghost", prov, a, fb, cat), NotFoundError);
}

TEST(Extract, SerializationUsesAttributeView) {
  SceneGraph g;
  g.upsert_entity({"egg_1", "egg", {{"temperature", std::string("Cold")}, {"isCooked", false}, {"breakable", true}}, 0});
  Fixture f(g);
  Abstraction a = abstraction_of({"egg"});
  a.attribute_map["egg"] = {"temperature", "breakable"};
  const auto sub = extract(f.graph, f.index, a, {}, {});
  EXPECT_EQ(sub.serialized,
            R"({"entities":[{"id":"egg_1","label":"egg","attributes":{"breakable":true,"temperature":"Cold"}}],"edges":[]})");
}

TEST(Extract, EmptyInputsGiveEmptySubgraph) {
  SceneGraph g;
  g.upsert_entity({"egg_1", "egg", {}, 0});
  Fixture f(g);
  const auto sub = extract(f.graph, f.index, abstraction_of({}), {}, {});
  EXPECT_EQ(sub.graph.entity_count(), 0u);
  EXPECT_EQ(sub.serialized, R"({"entities":[],"edges":[]})");
  EXPECT_EQ(extract(f.graph, f.index, abstraction_of({"  "}), {}, {}).graph.entity_count(), 0u);
}

TEST(Extract, MatchesOracleAndSubsetProperty) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    Fixture f(oracle::random_graph(rng, 50));
    std::vector<std::string> terms;
    for (std::size_t i = 0, n = rng() % 6; i < n; ++i) terms.push_back(oracle::random_term(rng));
    Abstraction a = abstraction_of(terms);
    QueryTermSet fb;
    if (rng() % 2) {
      FeedbackTerm t{oracle::random_term(rng), {"isOpen"}, {}};
      if (rng() % 2) t.filters.push_back({"isOpen", Comparator::kEq, true});
      fb.feedback_terms.push_back(t);
    }
    RetrievalParams p;
    p.k = 1 + static_cast<int>(rng() % 6);
    const auto sub = extract(f.graph, f.index, a, fb, p);
    EXPECT_EQ(sub.entity_ids(), oracle::extract_entities(f.graph, a, fb, p));
    const auto want = oracle::induced(oracle::plain(f.graph), sub.entity_ids());
    EXPECT_EQ(oracle::plain(sub.graph).edges, want.edges);
    expect_subset(sub.graph, f.graph);
    EXPECT_EQ(extract(f.graph, f.index, a, fb, p).serialized, sub.serialized);
  }
}

TEST(Extract, FeedbackIsMonotone) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    Fixture f(oracle::random_graph(rng, 40));
    const Abstraction a = abstraction_of({oracle::random_term(rng), oracle::random_term(rng)});
    QueryTermSet fb;
    fb.feedback_terms.push_back({oracle::random_term(rng), {}, {{"isOpen", Comparator::kNeq, false}}});
    const auto without = extract(f.graph, f.index, a, {}, {}).entity_ids();
    const auto with = extract(f.graph, f.index, a, fb, {}).entity_ids();
    EXPECT_TRUE(std::includes(with.begin(), with.end(), without.begin(), without.end()));
  }
}

TEST(Extract, IndependentOfNonOverlappingDistractors) {
  const char* words[] = {"yacht", "truss", "zebra", "tractor", "helmet", "anvil", "duck", "gazebo"};
  SceneGraph base;
  base.upsert_entity({"egg_1", "egg", {}, 0});
  base.upsert_entity({"pan_1", "pan", {}, 0});
  base.upsert_entity({"stove_burner_1", "stove burner", {}, 0});
  base.upsert_edge({"pan_1|on|stove_burner_1", "pan_1", "stove_burner_1", {"on"}});
  const Abstraction a = abstraction_of({"egg", "pan", "stove burner"});
  std::optional<std::string> first;
  for (int n : {0, 290, 1135}) {
    Fixture f(base);
    for (int i = 0; i < n; ++i) f.add({"d" + std::to_string(i), words[i % 8], {}, 0});
    const auto sub = extract(f.graph, f.index, a, {}, {});
    EXPECT_EQ(sub.entity_ids(), (std::set<std::string>{"egg_1", "pan_1", "stove_burner_1"})) << n;
    if (!first) first = sub.serialized;
    EXPECT_EQ(sub.serialized, *first) << n;
  }
}

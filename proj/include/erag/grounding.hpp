#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "erag/abstraction.hpp"
#include "erag/catalog.hpp"
#include "erag/embedding_index.hpp"
#include "erag/scene_graph.hpp"

namespace erag {

/// A retrieval term contributed by self-query feedback.
struct FeedbackTerm {
  std::string term;
  /// Attributes to expose on entities this term retrieves.
  std::set<std::string> unlocks;
  /// Applied to this term's retrievals only.
  std::vector<MetadataFilter> filters;

  bool operator==(const FeedbackTerm&) const = default;
};

/// Feedback terms accumulated over an episode, oldest first. The base terms
/// come from the episode's Abstraction.
struct QueryTermSet {
  static constexpr std::size_t kMaxFeedbackTerms = 16;

  std::vector<FeedbackTerm> feedback_terms;

  const FeedbackTerm* find(const std::string& term) const;
  bool empty() const { return feedback_terms.empty(); }
  bool operator==(const QueryTermSet&) const = default;
};

struct RetrievedSubgraph {
  SceneGraph graph;
  AttributeView attribute_view;
  /// Entity id -> terms that retrieved it, in query order.
  std::map<std::string, std::vector<std::string>> provenance;
  std::string serialized;
  std::size_t token_count = 0;

  std::set<std::string> entity_ids() const;
};

/// Union of the attribute subsets of every term that retrieved the entity;
/// the full catalog when that union is empty. Throws NotFoundError when the
/// entity has no provenance.
std::set<std::string> attribute_view_for(
    const std::string& entity_id, const std::map<std::string, std::vector<std::string>>& provenance,
    const Abstraction& abstraction, const QueryTermSet& feedback, const AttributeCatalog& catalog);

/// Task-relevant subgraph: thresholded top-k retrieval per term (base terms
/// from the abstraction, then feedback terms with their own filters), union
/// of the hits, induced subgraph over that union, per-entity attribute
/// filtering, serialization and token count. Pure over its inputs.
RetrievedSubgraph extract(const SceneGraph& graph, const EmbeddingIndex& index,
                          const Abstraction& abstraction, const QueryTermSet& feedback,
                          const RetrievalParams& params,
                          const AttributeCatalog& catalog = household_attribute_catalog());

}  // namespace erag

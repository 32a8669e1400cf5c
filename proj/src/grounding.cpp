#include "erag/grounding.hpp"

#include <algorithm>

#include "erag/errors.hpp"
#include "erag/llm_gateway.hpp"

namespace erag {

const FeedbackTerm* QueryTermSet::find(const std::string& term) const {
  auto it = std::find_if(feedback_terms.begin(), feedback_terms.end(),
                         [&](const FeedbackTerm& f) { return f.term == term; });
  return it == feedback_terms.end() ? nullptr : &*it;
}

std::set<std::string> RetrievedSubgraph::entity_ids() const {
  std::set<std::string> ids;
  for (const auto& [id, entity] : graph.entities()) ids.insert(id);
  return ids;
}

std::set<std::string> attribute_view_for(
    const std::string& entity_id, const std::map<std::string, std::vector<std::string>>& provenance,
    const Abstraction& abstraction, const QueryTermSet& feedback, const AttributeCatalog& catalog) {
  auto it = provenance.find(entity_id);
  if (it == provenance.end()) throw NotFoundError("no provenance for entity '" + entity_id + "'");

  std::set<std::string> view;
  for (const auto& term : it->second) {
    if (auto a = abstraction.attribute_map.find(term); a != abstraction.attribute_map.end()) {
      view.insert(a->second.begin(), a->second.end());
    }
    if (const FeedbackTerm* f = feedback.find(term)) view.insert(f->unlocks.begin(), f->unlocks.end());
  }
  if (view.empty()) view.insert(catalog.begin(), catalog.end());
  return view;
}

RetrievedSubgraph extract(const SceneGraph& graph, const EmbeddingIndex& index,
                          const Abstraction& abstraction, const QueryTermSet& feedback,
                          const RetrievalParams& params, const AttributeCatalog& catalog) {
  params.validate();
  RetrievedSubgraph out;

  auto retrieve = [&](const std::string& term, const RetrievalParams& p) {
    std::vector<ScoredDocument> hits;
    try {
      hits = index.query(term, p);
    } catch (const ValidationError&) {
      return;  // unembeddable term
    }
    for (const auto& hit : hits) {
      auto& terms = out.provenance[hit.doc_id];
      if (std::find(terms.begin(), terms.end(), term) == terms.end()) terms.push_back(term);
    }
  };

  for (const auto& term : abstraction.entities) retrieve(term, params);
  for (const auto& f : feedback.feedback_terms) {
    RetrievalParams p = params;
    p.metadata_filter.insert(p.metadata_filter.end(), f.filters.begin(), f.filters.end());
    retrieve(f.term, p);
  }

  std::set<std::string> nodes;
  for (const auto& [id, terms] : out.provenance) nodes.insert(id);
  out.graph = graph.induced_subgraph(nodes);

  // Hits for entities the graph no longer has are dropped with them.
  for (auto it = out.provenance.begin(); it != out.provenance.end();) {
    it = out.graph.contains(it->first) ? std::next(it) : out.provenance.erase(it);
  }
  for (const auto& [id, terms] : out.provenance) {
    out.attribute_view[id] = attribute_view_for(id, out.provenance, abstraction, feedback, catalog);
  }
  out.serialized = out.graph.serialize(out.attribute_view);
  out.token_count = llm::count_tokens(out.serialized);
  return out;
}

}  // namespace erag

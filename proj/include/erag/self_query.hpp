#pragma once

#include <set>
#include <string>
#include <vector>

#include "erag/catalog.hpp"
#include "erag/grounding.hpp"
#include "erag/llm_gateway.hpp"
#include "erag/prompts.hpp"

namespace erag {

/// Retrieval request distilled from one planner thought.
struct StructuredQuery {
  std::vector<std::string> search_terms;
  std::vector<MetadataFilter> attribute_filters;
  std::set<std::string> attribute_unlocks;

  bool empty() const {
    return search_terms.empty() && attribute_filters.empty() && attribute_unlocks.empty();
  }
  bool operator==(const StructuredQuery&) const = default;
};

std::string build_self_query_prompt(const PromptTemplates& templates, const std::string& thought,
                                    const AttributeCatalog& catalog);

/// Parses {"terms": [...], "filters": [[name, "eq"|"neq", value], ...],
/// "unlocks": [...]} out of an LLM reply (surrounding prose is ignored).
/// Attribute names are matched case-insensitively to the catalog; unknown
/// names, bad comparators and non-scalar values are dropped. Anything
/// unparseable yields an empty query.
StructuredQuery parse_structured_query(const std::string& reply, const AttributeCatalog& catalog);

/// Best-effort: gateway failures produce an empty query instead of
/// propagating. Throws ValidationError only for an empty thought.
StructuredQuery generate_query(const std::string& thought, const AttributeCatalog& catalog,
                               llm::Gateway& llm,
                               const PromptTemplates& templates = PromptTemplates::shipped());

/// Adds the query's terms (deduplicated) with its unlocks and filters
/// attached to each of them. Existing terms keep their position and gain the
/// new unlocks/filters. At most QueryTermSet::kMaxFeedbackTerms are kept;
/// the oldest are evicted first.
QueryTermSet merge_feedback(QueryTermSet accumulated, const StructuredQuery& query);

}  // namespace erag

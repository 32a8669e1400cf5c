#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "erag/catalog.hpp"
#include "erag/llm_gateway.hpp"
#include "erag/prompts.hpp"

namespace erag {

/// Entity hypotheses elicited from the task text alone, before any scene
/// knowledge exists.
struct Abstraction {
  std::string task;
  /// Normalized (trimmed, lowercase, deduplicated) entity terms.
  std::vector<std::string> entities;
  /// Entity term -> relevant attribute names (catalog spelling). Missing or
  /// empty entries mean "no preference".
  std::map<std::string, std::set<std::string>> attribute_map;

  bool operator==(const Abstraction&) const = default;
};

/// Splits an LLM list reply: commas separate items, each item is trimmed,
/// stripped of wrapping quotes and a trailing period, and lowercased; empty
/// items are dropped and duplicates keep their first position. A leading
/// "Answer:"-style label (or a whole first line ending in ':') is removed.
std::vector<std::string> parse_comma_list(std::string_view text);

/// Normalizes a single term the way parse_comma_list normalizes items.
std::string normalize_term(std::string_view term);

std::string build_entities_prompt(const PromptTemplates& templates, const std::string& task);
std::string build_attributes_prompt(const PromptTemplates& templates, const std::string& task,
                                    const std::string& entity_term, const AttributeCatalog& catalog);

/// Asks for the task-relevant entity set. Retries once on an empty reply,
/// then throws PreRetrievalError.
std::vector<std::string> propose_entities(const std::string& task, llm::Gateway& llm,
                                          const PromptTemplates& templates = PromptTemplates::shipped());

/// Asks which catalog attributes matter for `entity_term`. The reply is
/// matched case-insensitively against the catalog and unknown names are
/// dropped. Retries once on an empty reply, then throws PreRetrievalError.
std::set<std::string> propose_attributes(const std::string& task, const std::string& entity_term,
                                         const AttributeCatalog& catalog, llm::Gateway& llm,
                                         const PromptTemplates& templates = PromptTemplates::shipped());

/// Full pre-retrieval pass. Failures degrade instead of throwing: a failed
/// entity proposal yields an empty abstraction and a failed attribute
/// proposal leaves that entity with an empty subset.
Abstraction build_abstraction(const std::string& task, const AttributeCatalog& catalog,
                              llm::Gateway& llm,
                              const PromptTemplates& templates = PromptTemplates::shipped());

}  // namespace erag

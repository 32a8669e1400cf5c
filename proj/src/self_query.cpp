#include "erag/self_query.hpp"

#include <algorithm>
#include <cctype>
#include <optional>

#include <nlohmann/json.hpp>

#include "erag/abstraction.hpp"
#include "erag/errors.hpp"

namespace erag {
namespace {

using nlohmann::json;

std::optional<std::string> catalog_name(const std::string& name, const AttributeCatalog& catalog) {
  auto eq = [&](const std::string& c) {
    return c.size() == name.size() &&
           std::equal(c.begin(), c.end(), name.begin(), [](char a, char b) {
             return std::tolower(static_cast<unsigned char>(a)) ==
                    std::tolower(static_cast<unsigned char>(b));
           });
  };
  auto it = std::find_if(catalog.begin(), catalog.end(), eq);
  if (it == catalog.end()) return std::nullopt;
  return *it;
}

std::optional<MetadataFilter> parse_filter(const json& f, const AttributeCatalog& catalog) {
  json name, cmp, value;
  if (f.is_array() && f.size() == 3) {
    name = f[0];
    cmp = f[1];
    value = f[2];
  } else if (f.is_object()) {
    name = f.value("attribute", json());
    cmp = f.value("comparator", json());
    value = f.value("value", json());
  } else {
    return std::nullopt;
  }
  if (!name.is_string() || !cmp.is_string()) return std::nullopt;
  if (!(value.is_boolean() || value.is_number() || value.is_string())) return std::nullopt;
  auto attr = catalog_name(name.get<std::string>(), catalog);
  if (!attr) return std::nullopt;
  try {
    return MetadataFilter{*attr, comparator_from_string(cmp.get<std::string>()),
                          attribute_from_json(value)};
  } catch (const ValidationError&) {
    return std::nullopt;
  }
}

}  // namespace

std::string build_self_query_prompt(const PromptTemplates& templates, const std::string& thought,
                                    const AttributeCatalog& catalog) {
  return fill_template(templates.self_query,
                       {{"attributes", json(catalog).dump()}, {"thought", thought}});
}

StructuredQuery parse_structured_query(const std::string& reply, const AttributeCatalog& catalog) {
  StructuredQuery q;
  const auto open = reply.find('{');
  const auto close = reply.rfind('}');
  if (open == std::string::npos || close == std::string::npos || close < open) return q;
  json j;
  try {
    j = json::parse(reply.substr(open, close - open + 1));
  } catch (const json::parse_error&) {
    return q;
  }
  if (!j.is_object()) return q;

  if (auto t = j.find("terms"); t != j.end() && t->is_array()) {
    for (const auto& term : *t) {
      if (!term.is_string()) continue;
      std::string norm = normalize_term(term.get<std::string>());
      if (!norm.empty() && std::find(q.search_terms.begin(), q.search_terms.end(), norm) ==
                               q.search_terms.end()) {
        q.search_terms.push_back(std::move(norm));
      }
    }
  }
  if (auto fs = j.find("filters"); fs != j.end() && fs->is_array()) {
    for (const auto& f : *fs) {
      auto filter = parse_filter(f, catalog);
      if (filter && std::find(q.attribute_filters.begin(), q.attribute_filters.end(), *filter) ==
                        q.attribute_filters.end()) {
        q.attribute_filters.push_back(std::move(*filter));
      }
    }
  }
  if (auto us = j.find("unlocks"); us != j.end() && us->is_array()) {
    for (const auto& u : *us) {
      if (!u.is_string()) continue;
      if (auto attr = catalog_name(u.get<std::string>(), catalog)) q.attribute_unlocks.insert(*attr);
    }
  }
  return q;
}

StructuredQuery generate_query(const std::string& thought, const AttributeCatalog& catalog,
                               llm::Gateway& llm, const PromptTemplates& templates) {
  if (thought.empty()) throw ValidationError("self-query needs a nonempty thought");
  llm::CompletionRequest request;
  request.messages.push_back({llm::Role::kUser, build_self_query_prompt(templates, thought, catalog)});
  request.temperature = 0.0;
  try {
    return parse_structured_query(llm.complete(request), catalog);
  } catch (const Error&) {
    return {};
  }
}

QueryTermSet merge_feedback(QueryTermSet accumulated, const StructuredQuery& query) {
  for (const auto& term : query.search_terms) {
    auto it = std::find_if(accumulated.feedback_terms.begin(), accumulated.feedback_terms.end(),
                           [&](const FeedbackTerm& f) { return f.term == term; });
    if (it == accumulated.feedback_terms.end()) {
      accumulated.feedback_terms.push_back({term, {}, {}});
      it = std::prev(accumulated.feedback_terms.end());
    }
    it->unlocks.insert(query.attribute_unlocks.begin(), query.attribute_unlocks.end());
    for (const auto& f : query.attribute_filters) {
      if (std::find(it->filters.begin(), it->filters.end(), f) == it->filters.end()) {
        it->filters.push_back(f);
      }
    }
    std::sort(it->filters.begin(), it->filters.end());
  }
  auto& terms = accumulated.feedback_terms;
  if (terms.size() > QueryTermSet::kMaxFeedbackTerms) {
    terms.erase(terms.begin(),
                terms.begin() + static_cast<std::ptrdiff_t>(terms.size() - QueryTermSet::kMaxFeedbackTerms));
  }
  return accumulated;
}

}  // namespace erag

#include "erag/abstraction.hpp"

#include <algorithm>
#include <cctype>

#include "erag/errors.hpp"

namespace erag {
namespace {

constexpr std::size_t kMaxLabelLength = 40;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Drops "Answer:" / "Here are the objects:" labels ahead of the list.
std::string_view strip_label(std::string_view text) {
  for (;;) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos || colon > kMaxLabelLength) return text;
    const auto comma = text.find(',');
    if (comma != std::string_view::npos && comma < colon) return text;
    const std::string_view label = text.substr(0, colon);
    const bool words_only = std::all_of(label.begin(), label.end(), [](unsigned char c) {
      return std::isalpha(c) || c == ' ' || c == '\t' || c == '\n' || c == '\r';
    });
    if (!words_only) return text;
    text.remove_prefix(colon + 1);
  }
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string join(const AttributeCatalog& catalog) {
  std::string out;
  for (const auto& name : catalog) {
    if (!out.empty()) out += ", ";
    out += name;
  }
  return out;
}

std::string ask(llm::Gateway& llm, const std::string& prompt) {
  llm::CompletionRequest request;
  request.messages.push_back({llm::Role::kUser, prompt});
  request.temperature = 0.0;
  return llm.complete(request);
}

}  // namespace

std::string normalize_term(std::string_view term) {
  for (;;) {
    const std::string_view before = term;
    term = trim(term);
    if (!term.empty() && term.back() == '.') term.remove_suffix(1);
    if (term.size() >= 2 && (term.front() == '"' || term.front() == '\'') &&
        term.back() == term.front()) {
      term = term.substr(1, term.size() - 2);
    }
    if (term == before) break;
  }
  return lower(term);
}

std::vector<std::string> parse_comma_list(std::string_view text) {
  text = strip_label(text);
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    std::string item = normalize_term(text.substr(start, end - start));
    if (!item.empty() && std::find(out.begin(), out.end(), item) == out.end()) {
      out.push_back(std::move(item));
    }
    start = end + 1;
  }
  return out;
}

std::string build_entities_prompt(const PromptTemplates& templates, const std::string& task) {
  return fill_template(templates.pre_retrieval_entities, {{"task", task}});
}

std::string build_attributes_prompt(const PromptTemplates& templates, const std::string& task,
                                    const std::string& entity_term,
                                    const AttributeCatalog& catalog) {
  return fill_template(templates.pre_retrieval_attributes,
                       {{"object", entity_term}, {"task", task}, {"attributes", join(catalog)}});
}

std::vector<std::string> propose_entities(const std::string& task, llm::Gateway& llm,
                                          const PromptTemplates& templates) {
  if (trim(task).empty()) throw ValidationError("task text must be nonempty");
  const std::string prompt = build_entities_prompt(templates, task);
  for (int attempt = 0; attempt < 2; ++attempt) {
    auto entities = parse_comma_list(ask(llm, prompt));
    if (!entities.empty()) return entities;
  }
  throw PreRetrievalError("no entities proposed for task '" + task + "'");
}

std::set<std::string> propose_attributes(const std::string& task, const std::string& entity_term,
                                         const AttributeCatalog& catalog, llm::Gateway& llm,
                                         const PromptTemplates& templates) {
  if (catalog.empty()) throw ValidationError("attribute catalog must be nonempty");
  const std::string prompt = build_attributes_prompt(templates, task, entity_term, catalog);
  for (int attempt = 0; attempt < 2; ++attempt) {
    const auto names = parse_comma_list(ask(llm, prompt));
    if (names.empty()) continue;
    std::set<std::string> subset;
    for (const auto& name : names) {
      auto it = std::find_if(catalog.begin(), catalog.end(),
                             [&](const std::string& c) { return lower(c) == name; });
      if (it != catalog.end()) subset.insert(*it);
    }
    return subset;
  }
  throw PreRetrievalError("no attributes proposed for '" + entity_term + "'");
}

Abstraction build_abstraction(const std::string& task, const AttributeCatalog& catalog,
                              llm::Gateway& llm, const PromptTemplates& templates) {
  Abstraction abstraction;
  abstraction.task = task;
  try {
    abstraction.entities = propose_entities(task, llm, templates);
  } catch (const PreRetrievalError&) {
    return abstraction;
  }
  for (const auto& term : abstraction.entities) {
    try {
      abstraction.attribute_map[term] = propose_attributes(task, term, catalog, llm, templates);
    } catch (const PreRetrievalError&) {
      abstraction.attribute_map[term] = {};
    }
  }
  return abstraction;
}

}  // namespace erag

#pragma once

#include <map>
#include <string>

namespace erag {

/// Root of the shipped data (prompts/, data/). ERAG_DATA_DIR overrides the
/// compiled-in source directory.
std::string default_data_dir();

/// Reads a whole file; throws NotFoundError when it cannot be opened.
std::string read_text_file(const std::string& path);

/// Replaces every `{name}` placeholder with its value in a single pass, so
/// substituted text is never re-expanded. Unknown placeholders are kept.
std::string fill_template(const std::string& tmpl, const std::map<std::string, std::string>& values);

struct PromptTemplates {
  std::string pre_retrieval_entities;    // {task}
  std::string pre_retrieval_attributes;  // {object} {task} {attributes}
  std::string self_query;                // {attributes} {thought}
  std::string react_system;              // {actions} {action_names}

  /// Loads the four template files from `<dir>/prompts/`.
  static PromptTemplates load(const std::string& data_dir);
  static const PromptTemplates& shipped();
};

}  // namespace erag

#include "erag/prompts.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "erag/errors.hpp"

namespace erag {

std::string default_data_dir() {
  if (const char* dir = std::getenv("ERAG_DATA_DIR"); dir != nullptr && *dir != '\0') return dir;
  return ERAG_SOURCE_DIR;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fill_template(const std::string& tmpl, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      const auto close = tmpl.find('}', i + 1);
      if (close != std::string::npos) {
        auto it = values.find(tmpl.substr(i + 1, close - i - 1));
        if (it != values.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += tmpl[i++];
  }
  return out;
}

PromptTemplates PromptTemplates::load(const std::string& data_dir) {
  const std::string dir = data_dir + "/prompts/";
  return {read_text_file(dir + "pre_retrieval_entities.txt"),
          read_text_file(dir + "pre_retrieval_attributes.txt"),
          read_text_file(dir + "self_query.txt"), read_text_file(dir + "react_system.txt")};
}

const PromptTemplates& PromptTemplates::shipped() {
  static const PromptTemplates templates = load(default_data_dir());
  return templates;
}

}  // namespace erag

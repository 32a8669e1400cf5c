#include "erag/agent.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>

#include <nlohmann/json.hpp>

#include "erag/errors.hpp"

namespace erag {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool starts_with_ci(std::string_view line, std::string_view prefix) {
  if (line.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(line[i])) !=
        std::tolower(static_cast<unsigned char>(prefix[i]))) {
      return false;
    }
  }
  return true;
}

enum class LineKind { kThought, kAction, kActionInput, kObservation, kText };

LineKind classify(std::string_view line) {
  if (starts_with_ci(line, "thought:")) return LineKind::kThought;
  if (starts_with_ci(line, "action input:")) return LineKind::kActionInput;
  if (starts_with_ci(line, "action:")) return LineKind::kAction;
  if (starts_with_ci(line, "observation:")) return LineKind::kObservation;
  return LineKind::kText;
}

std::string_view after_colon(std::string_view line) {
  return trim(line.substr(line.find(':') + 1));
}

std::string join_words(const std::vector<std::string_view>& parts) {
  std::string out;
  for (auto p : parts) {
    p = trim(p);
    if (p.empty()) continue;
    if (!out.empty()) out += ' ';
    out += p;
  }
  return out;
}

std::string render_ids(const std::vector<std::string>& ids) { return nlohmann::json(ids).dump(); }

}  // namespace

const char* to_string(AgentVariant variant) {
  switch (variant) {
    case AgentVariant::kReact:
      return "react";
    case AgentVariant::kFullMem:
      return "full_mem";
    case AgentVariant::kErag:
      return "erag";
    case AgentVariant::kEragStrict:
      return "erag_strict";
    case AgentVariant::kEragFeedback:
      return "erag_feedback";
  }
  return "react";
}

AgentVariant variant_from_string(const std::string& text) {
  for (AgentVariant v : all_variants()) {
    if (text == to_string(v)) return v;
  }
  throw ValidationError("unknown agent variant '" + text + "'");
}

const std::vector<AgentVariant>& all_variants() {
  static const std::vector<AgentVariant> variants = {
      AgentVariant::kReact, AgentVariant::kFullMem, AgentVariant::kErag, AgentVariant::kEragStrict,
      AgentVariant::kEragFeedback};
  return variants;
}

VariantTraits traits(AgentVariant variant) {
  switch (variant) {
    case AgentVariant::kReact:
      return {false, false, true, false, false};
    case AgentVariant::kFullMem:
      return {false, true, true, false, false};
    case AgentVariant::kErag:
      return {true, false, true, false, false};
    case AgentVariant::kEragStrict:
      return {true, false, false, false, true};
    case AgentVariant::kEragFeedback:
      return {true, false, false, true, true};
  }
  return {};
}

std::string normalize_action(std::string_view name) {
  std::string out;
  for (unsigned char c : name) {
    if (std::isalnum(c)) out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

// ---------------------------------------------------------------------------

ActionRegistry::ActionRegistry(std::vector<std::pair<std::string, std::string>> actions) {
  for (auto& [name, description] : actions) {
    actions_.emplace_back(normalize_action(name), std::move(description));
  }
}

ActionRegistry ActionRegistry::household(AgentVariant variant) {
  std::vector<std::pair<std::string, std::string>> actions = {
      {"randomlyexplore", "randomlyexplore(): walk to another room and look around"},
      {"getdiscoveredobjects", "getdiscoveredobjects(): return every object discovered so far"},
      {"getvisibleobjects", "getvisibleobjects(): list the objects you can currently see"},
      {"moveto", "moveto(object): move next to an object"},
      {"inspect", "inspect(object): report all attributes of an object"},
      {"pickup", "pickup(object): pick up an object you are next to (one at a time)"},
      {"placeon", "placeon(object): put the held object on or in a receptacle you are next to"},
      {"open", "open(object): open an object you are next to"},
      {"close", "close(object): close an object you are next to"},
      {"toggleon", "toggleon(object): switch on an object you are next to"},
      {"toggleoff", "toggleoff(object): switch off an object you are next to"},
      {"search", "search(object): look inside an open receptacle you are next to"},
      {"fillheldobjectwithwater", "fillheldobjectwithwater(): fill the held object at a running faucet"},
      {"pourwaterinto", "pourwaterinto(object): pour the held object's water into another object"},
      {"adjustpositioning", "adjustpositioning(): shift your position within the room"}};
  if (!traits(variant).full_graph_tool) {
    actions.erase(actions.begin() + 1);
  }
  return ActionRegistry(std::move(actions));
}

bool ActionRegistry::contains(const std::string& normalized_name) const {
  if (normalized_name == kFinish) return true;
  return std::any_of(actions_.begin(), actions_.end(),
                     [&](const auto& a) { return a.first == normalized_name; });
}

std::string ActionRegistry::describe() const {
  std::string out;
  for (const auto& [name, description] : actions_) {
    out += "- " + description + "\n";
  }
  out += "- finish(): declare the task complete";
  return out;
}

std::string ActionRegistry::names() const {
  std::string out;
  for (const auto& [name, description] : actions_) out += name + ", ";
  return out + kFinish;
}

// ---------------------------------------------------------------------------

ReactParse parse_react(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    lines.push_back(trim(text.substr(start, end - start)));
    start = end + 1;
  }

  std::size_t action_line = lines.size();
  for (std::size_t i = lines.size(); i-- > 0;) {
    if (classify(lines[i]) == LineKind::kAction) {
      action_line = i;
      break;
    }
  }
  if (action_line == lines.size()) throw ParseError("reply has no 'Action:' line");

  ReactParse out;
  std::string_view action = after_colon(lines[action_line]);
  if (auto paren = action.find('('); paren != std::string_view::npos) {
    const auto close = action.rfind(')');
    if (close != std::string_view::npos && close > paren) {
      out.action_input = std::string(trim(action.substr(paren + 1, close - paren - 1)));
    }
    action = action.substr(0, paren);
  }
  out.action = normalize_action(action);
  if (out.action.empty()) throw ParseError("reply has an empty action");

  for (std::size_t i = action_line + 1; i < lines.size(); ++i) {
    const LineKind kind = classify(lines[i]);
    if (kind == LineKind::kActionInput) {
      out.action_input = std::string(after_colon(lines[i]));
      break;
    }
    if (kind != LineKind::kText) break;
  }

  // The thought runs from the block's "Thought:" (or the previous block's
  // end) up to the action line.
  std::size_t first = 0;
  std::vector<std::string_view> parts;
  for (std::size_t i = action_line; i-- > 0;) {
    const LineKind kind = classify(lines[i]);
    if (kind == LineKind::kThought) {
      first = i;
      break;
    }
    if (kind != LineKind::kText) {
      first = i + 1;
      break;
    }
  }
  for (std::size_t i = first; i < action_line; ++i) {
    parts.push_back(classify(lines[i]) == LineKind::kThought ? after_colon(lines[i]) : lines[i]);
  }
  out.thought = join_words(parts);
  return out;
}

std::size_t ContextWindow::serialized_size() const {
  std::size_t size = task.size() + system_prompt.size();
  for (const auto& e : history) size += e.observation.size() + e.step.raw.size();
  return size;
}

// ---------------------------------------------------------------------------

ReactAgent::ReactAgent(std::string task, ActionRegistry actions, llm::Gateway& llm,
                       const PromptTemplates& templates)
    : actions_(std::move(actions)), llm_(llm) {
  context_.task = std::move(task);
  context_.system_prompt = fill_template(
      templates.react_system, {{"actions", actions_.describe()}, {"action_names", actions_.names()}});
}

std::vector<llm::ChatMessage> ReactAgent::messages_for(const std::string& observation) const {
  std::vector<llm::ChatMessage> messages;
  messages.reserve(2 * context_.history.size() + 2);
  messages.push_back({llm::Role::kSystem, context_.system_prompt});
  for (const auto& e : context_.history) {
    messages.push_back({llm::Role::kUser, e.observation});
    messages.push_back({llm::Role::kAssistant, e.step.raw.empty() ? std::string("(no reply)") : e.step.raw});
  }
  messages.push_back({llm::Role::kUser, observation});
  return messages;
}

bool ReactAgent::try_parse(const std::string& reply, AgentStep* step) const {
  try {
    ReactParse p = parse_react(reply);
    if (!actions_.contains(p.action)) return false;
    *step = {std::move(p.thought), std::move(p.action), std::move(p.action_input), reply, false};
    return true;
  } catch (const ParseError&) {
    return false;
  }
}

AgentStep ReactAgent::plan_step(const std::string& observation) {
  if (context_.history.size() >= kMaxSteps) {
    throw ValidationError("planning step cap of " + std::to_string(kMaxSteps) + " reached");
  }
  const auto start = std::chrono::steady_clock::now();
  llm::CompletionRequest request;
  request.messages = messages_for(observation);
  std::string reply = llm_.complete(request);

  AgentStep step;
  if (!try_parse(reply, &step)) {
    request.messages.push_back(
        {llm::Role::kAssistant, reply.empty() ? std::string("(no reply)") : reply});
    request.messages.push_back({llm::Role::kUser, kFormatReminder});
    reply = llm_.complete(request);
    if (!try_parse(reply, &step)) step = {"", "noop", "", reply, true};
  }
  last_llm_seconds_ =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  context_.history.push_back({observation, step});
  return step;
}

// ---------------------------------------------------------------------------

Observation build_observation(AgentVariant variant, const std::string& task, bool first_step,
                              const ToolOutcome& tool, const SceneGraph& graph,
                              const RetrievedSubgraph* subgraph) {
  const VariantTraits t = traits(variant);
  Observation obs;
  if (first_step) {
    obs.text = "Question: " + task;
  } else {
    obs.text = "Observation: " + tool.message;
    if (tool.full_graph_request) {
      const std::string full = graph.serialize();
      obs.text += " " + full;
      obs.graph_tokens += llm::count_tokens(full);
    } else if (!tool.listed_ids.empty()) {
      if (t.strict_listings) {
        std::vector<std::string> kept;
        for (const auto& id : tool.listed_ids) {
          if (subgraph != nullptr && subgraph->graph.contains(id)) kept.push_back(id);
        }
        obs.text += " " + render_ids(kept);
      } else {
        obs.text += " " + render_ids(tool.listed_ids);
      }
    }
  }

  if (t.full_graph_observation && !t.retrieval && variant == AgentVariant::kFullMem) {
    const std::string full = graph.serialize();
    obs.text += "\nHere is the full scene graph of observed objects: " + full;
    obs.graph_tokens += llm::count_tokens(full);
  } else if (t.retrieval && subgraph != nullptr) {
    obs.text += "\nHere is a potentially relevant subset of observed objects so far: " +
                subgraph->serialized;
    obs.graph_tokens += subgraph->token_count;
  }
  return obs;
}

}  // namespace erag

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "erag/grounding.hpp"
#include "erag/llm_gateway.hpp"
#include "erag/prompts.hpp"
#include "erag/scene_graph.hpp"

namespace erag {

enum class AgentVariant { kReact, kFullMem, kErag, kEragStrict, kEragFeedback };

const char* to_string(AgentVariant variant);
AgentVariant variant_from_string(const std::string& text);
const std::vector<AgentVariant>& all_variants();

/// How a variant builds observations and which tools it may call.
struct VariantTraits {
  bool retrieval = false;             // observation carries the retrieved subgraph
  bool full_graph_observation = false;  // observation carries the whole graph
  bool full_graph_tool = false;       // getdiscoveredobjects is available
  bool self_query = false;            // thoughts feed back into retrieval
  bool strict_listings = false;       // tool listings limited to retrieved ids
};

VariantTraits traits(AgentVariant variant);

/// Lowercase-alphanumeric form used for action names ("Locate by ID" ->
/// "locatebyid").
std::string normalize_action(std::string_view name);

class ActionRegistry {
 public:
  static constexpr const char* kFinish = "finish";

  ActionRegistry() = default;
  explicit ActionRegistry(std::vector<std::pair<std::string, std::string>> actions);

  /// The simulator's actions as offered to `variant`.
  static ActionRegistry household(AgentVariant variant);

  /// True for registered actions and for "finish".
  bool contains(const std::string& normalized_name) const;
  std::string describe() const;
  std::string names() const;
  const std::vector<std::pair<std::string, std::string>>& actions() const { return actions_; }

 private:
  std::vector<std::pair<std::string, std::string>> actions_;  // (name, description)
};

struct AgentStep {
  std::string thought;
  std::string action;  // normalized; "noop" for a doubly malformed reply
  std::string action_input;
  std::string raw;
  bool malformed = false;

  bool operator==(const AgentStep&) const = default;
};

struct ReactParse {
  std::string thought;
  std::string action;
  std::string action_input;
};

/// Extracts the last Thought / Action / Action Input block. Throws
/// ParseError when the reply has no usable Action line.
ReactParse parse_react(std::string_view text);

struct ContextWindow {
  struct Entry {
    std::string observation;
    AgentStep step;
  };

  std::string task;
  std::string system_prompt;
  std::vector<Entry> history;

  std::size_t serialized_size() const;
};

/// ReAct planner: one LLM call per step over the full, untruncated history.
class ReactAgent {
 public:
  static constexpr std::size_t kMaxSteps = 40;
  static constexpr const char* kFormatReminder =
      "Your reply could not be used. Reply using exactly this format, with an action from the tool "
      "list:\nThought: <your reasoning>\nAction: <tool name>\nAction Input: <argument>";

  ReactAgent(std::string task, ActionRegistry actions, llm::Gateway& llm,
             const PromptTemplates& templates = PromptTemplates::shipped());

  /// Plans one step for `observation`. A reply that does not parse, or names
  /// an unknown action, gets one corrective re-prompt; a second failure is
  /// recorded as a malformed no-op step. Throws ValidationError once the
  /// step cap is reached.
  AgentStep plan_step(const std::string& observation);

  const ContextWindow& context() const { return context_; }
  /// Wall-clock seconds spent in the LLM for the last plan_step.
  double last_llm_seconds() const { return last_llm_seconds_; }

 private:
  std::vector<llm::ChatMessage> messages_for(const std::string& observation) const;
  bool try_parse(const std::string& reply, AgentStep* step) const;

  ContextWindow context_;
  ActionRegistry actions_;
  llm::Gateway& llm_;
  double last_llm_seconds_ = 0.0;
};

/// Outcome of the previous action as shown to the planner.
struct ToolOutcome {
  std::string message;
  std::vector<std::string> listed_ids;
  bool full_graph_request = false;
};

struct Observation {
  std::string text;
  /// Tokens of the scene-graph text (subgraph, full graph, or full-graph
  /// tool output) contained in `text`.
  std::size_t graph_tokens = 0;
};

/// Builds the planner's observation for one step. `subgraph` may be null for
/// variants without retrieval. On the first step the task is echoed as
/// "Question: ..." and `tool` is ignored.
Observation build_observation(AgentVariant variant, const std::string& task, bool first_step,
                              const ToolOutcome& tool, const SceneGraph& graph,
                              const RetrievedSubgraph* subgraph);

}  // namespace erag

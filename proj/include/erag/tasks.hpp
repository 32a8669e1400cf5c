#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "erag/llm_gateway.hpp"
#include "erag/simulator.hpp"

namespace erag {

/// One scripted planner turn of a task's reference solution.
struct SolutionStep {
  std::string thought;
  std::string action;
  std::string input;
  /// Structured request returned when this step's thought is self-queried.
  std::optional<nlohmann::json> self_query;
};

struct TaskSolution {
  /// Reply to the entity prompt.
  std::string entities;
  /// Entity term -> reply to its attribute prompt.
  std::map<std::string, std::string> attributes;
  std::vector<SolutionStep> steps;
};

struct Task {
  std::string id;
  std::string difficulty;  // "easy" or "hard"
  std::string text;
  std::string scene;  // scene id
  sim::GoalSpec goal;
  TaskSolution solution;
};

Task task_from_json(const nlohmann::json& j);
/// {"tasks": [...]} or a bare array.
std::vector<Task> load_tasks(const std::string& path);
const Task& find_task(const std::vector<Task>& tasks, const std::string& id);

/// "Thought: ...\nAction: ...\nAction Input: ..."; the Thought line is
/// omitted for an empty thought.
std::string format_react_reply(const SolutionStep& step);

/// Scripted rules that answer the pre-retrieval, self-query and planning
/// prompts with the task's reference solution.
std::vector<llm::ScriptRule> solution_rules(const TaskSolution& solution);
std::shared_ptr<llm::ChatBackend> solution_backend(const Task& task);

/// Loads every *.json scene under `dir`, keyed by scene id.
std::map<std::string, sim::Scene> load_scenes(const std::string& dir);

}  // namespace erag

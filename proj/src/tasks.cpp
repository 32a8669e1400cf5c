#include "erag/tasks.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "erag/abstraction.hpp"
#include "erag/errors.hpp"

namespace erag {

using nlohmann::json;

Task task_from_json(const json& j) {
  Task t;
  t.id = j.at("id").get<std::string>();
  t.difficulty = j.value("difficulty", "easy");
  if (t.difficulty != "easy" && t.difficulty != "hard") {
    throw ValidationError("task '" + t.id + "' has unknown difficulty '" + t.difficulty + "'");
  }
  t.text = j.at("text").get<std::string>();
  t.scene = j.at("scene").get<std::string>();
  t.goal = sim::goal_from_json(j.at("goal"));
  if (j.contains("solution")) {
    const json& s = j.at("solution");
    t.solution.entities = s.value("entities", "");
    t.solution.attributes =
        s.value("attributes", json::object()).get<std::map<std::string, std::string>>();
    for (const auto& st : s.value("steps", json::array())) {
      SolutionStep step;
      step.thought = st.value("thought", "");
      step.action = st.at("action").get<std::string>();
      step.input = st.value("input", "");
      if (st.contains("self_query")) step.self_query = st.at("self_query");
      t.solution.steps.push_back(std::move(step));
    }
  }
  return t;
}

std::vector<Task> load_tasks(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open task file '" + path + "'");
  std::vector<Task> tasks;
  try {
    const json j = json::parse(in);
    const json& list = j.is_array() ? j : j.at("tasks");
    for (const auto& t : list) tasks.push_back(task_from_json(t));
  } catch (const json::exception& e) {
    throw ValidationError("task file '" + path + "': " + e.what());
  }
  return tasks;
}

const Task& find_task(const std::vector<Task>& tasks, const std::string& id) {
  auto it = std::find_if(tasks.begin(), tasks.end(), [&](const Task& t) { return t.id == id; });
  if (it == tasks.end()) throw NotFoundError("unknown task '" + id + "'");
  return *it;
}

std::string format_react_reply(const SolutionStep& step) {
  std::string out;
  if (!step.thought.empty()) out += "Thought: " + step.thought + "\n";
  out += "Action: " + step.action + "\nAction Input: " + step.input;
  return out;
}

std::vector<llm::ScriptRule> solution_rules(const TaskSolution& solution) {
  std::vector<llm::ScriptRule> rules;
  rules.push_back({"Strictly return a comma separated list of objects only.", {solution.entities}, true});
  for (const auto& [term, reply] : solution.attributes) {
    rules.push_back({"attributes about a " + normalize_term(term) + " are important", {reply}, true});
  }
  // Terms without a scripted subset get an empty reply (no preference).
  rules.push_back({"Possible attributes:", {""}, true});
  for (const auto& step : solution.steps) {
    if (step.thought.empty() || !step.self_query) continue;
    rules.push_back({"<< Thought >>\n" + step.thought, {step.self_query->dump()}, true});
  }
  rules.push_back({"<< Structured Request Schema >>", {"{}"}, true});
  llm::ScriptRule planner{"", {}, false};
  for (const auto& step : solution.steps) planner.replies.push_back(format_react_reply(step));
  rules.push_back(std::move(planner));
  return rules;
}

std::shared_ptr<llm::ChatBackend> solution_backend(const Task& task) {
  return std::make_shared<llm::ScriptedBackend>(solution_rules(task.solution));
}

std::map<std::string, sim::Scene> load_scenes(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw NotFoundError("scene directory '" + dir + "' does not exist");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::map<std::string, sim::Scene> scenes;
  for (const auto& f : files) {
    sim::Scene s = sim::load_scene(f.string());
    const std::string id = s.id;
    if (!scenes.emplace(id, std::move(s)).second) {
      throw ValidationError("duplicate scene id '" + id + "'");
    }
  }
  return scenes;
}

}  // namespace erag

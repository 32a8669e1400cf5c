#include "erag/harness.hpp"

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "erag/abstraction.hpp"
#include "erag/errors.hpp"
#include "erag/grounding.hpp"
#include "erag/self_query.hpp"

namespace erag {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json EpisodeResult::to_json(bool with_latency) const {
  ordered_json j;
  j["task_id"] = task_id;
  j["scene_id"] = scene_id;
  j["variant"] = variant;
  j["seed"] = seed;
  j["distractors"] = distractors;
  j["difficulty"] = difficulty;
  j["repetition"] = repetition;
  j["success"] = success;
  j["steps"] = steps;
  j["failure_mode"] = failure_mode;
  if (with_latency) j["avg_step_latency_s"] = avg_step_latency_s;
  j["cumulative_observation_tokens"] = cumulative_observation_tokens;
  j["full_graph_requests"] = full_graph_requests;
  return j;
}

EpisodeResult EpisodeResult::from_json(const json& j) {
  EpisodeResult r;
  r.task_id = j.at("task_id").get<std::string>();
  r.scene_id = j.at("scene_id").get<std::string>();
  r.variant = j.at("variant").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.distractors = j.at("distractors").get<std::size_t>();
  r.difficulty = j.value("difficulty", "easy");
  r.repetition = j.value("repetition", 0);
  r.success = j.at("success").get<bool>();
  r.steps = j.at("steps").get<std::size_t>();
  r.failure_mode = j.at("failure_mode").get<std::string>();
  r.avg_step_latency_s = j.value("avg_step_latency_s", 0.0);
  r.cumulative_observation_tokens = j.at("cumulative_observation_tokens").get<std::size_t>();
  r.full_graph_requests = j.value("full_graph_requests", std::size_t{0});
  if (r.steps > ReactAgent::kMaxSteps) throw ValidationError("result has more than 40 steps");
  if (r.success && r.failure_mode != failure::kNone) {
    throw ValidationError("successful result with failure mode '" + r.failure_mode + "'");
  }
  return r;
}

std::string EpisodeRun::log_jsonl(bool with_latency) const {
  std::string out;
  for (ordered_json record : log) {
    if (!with_latency) {
      record.erase("latency_ms");
      record.erase("avg_step_latency_s");
    }
    out += record.dump() + "\n";
  }
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::shared_ptr<llm::ChatBackend> backend_for(const EpisodeConfig& config) {
  std::shared_ptr<llm::ChatBackend> backend = config.backend;
  if (!backend) {
    backend = config.gateway.kind == llm::BackendKind::kSolution ? solution_backend(config.task)
                                                                 : llm::make_backend(config.gateway);
  }
  if (config.record) backend = std::make_shared<llm::RecordingBackend>(backend, config.record);
  return backend;
}

void check_mirror(const sim::World& world, const SceneGraph& graph, const EmbeddingIndex& index) {
  if (!(world.rebuild_graph() == graph)) {
    throw std::logic_error("scene graph diverged from the discovered world");
  }
  if (!index.mirrors(graph)) throw std::logic_error("embedding index diverged from the scene graph");
}

}  // namespace

EpisodeRun run_episode(const EpisodeConfig& config) {
  config.retrieval.validate();
  const PromptTemplates& templates =
      config.templates != nullptr ? *config.templates : PromptTemplates::shipped();
  const AttributeCatalog& catalog = household_attribute_catalog();
  const VariantTraits vt = traits(config.variant);

  EpisodeRun run;
  EpisodeResult& result = run.result;
  result.task_id = config.task.id;
  result.scene_id = config.scene.id;
  result.variant = to_string(config.variant);
  result.seed = config.seed;
  result.distractors = config.distractors;
  result.difficulty = config.task.difficulty;
  result.repetition = config.repetition;

  sim::World world(sim::inject_distractors(config.scene, config.distractors, config.seed), config.seed);
  SceneGraph graph;
  EmbeddingIndex index(std::make_shared<HashingEmbedder>());
  index.apply_graph_delta(graph, world.observe_graph(graph));

  llm::RetryPolicy policy;
  policy.retries = config.gateway.retries;
  llm::Gateway gateway(backend_for(config), policy, config.max_input_tokens);

  Abstraction abstraction;
  abstraction.task = config.task.text;
  QueryTermSet feedback;
  std::unique_ptr<ReactAgent> agent;
  double total_latency = 0.0;
  std::size_t malformed = 0;

  try {
    if (vt.retrieval) abstraction = build_abstraction(config.task.text, catalog, gateway, templates);
    agent = std::make_unique<ReactAgent>(config.task.text, ActionRegistry::household(config.variant),
                                         gateway, templates);

    ToolOutcome tool;
    bool done = false;
    while (!done && result.steps < ReactAgent::kMaxSteps) {
      const auto step_start = Clock::now();
      std::optional<RetrievedSubgraph> subgraph;
      if (vt.retrieval) {
        subgraph = extract(graph, index, abstraction, feedback, config.retrieval, catalog);
      }
      const Observation obs = build_observation(config.variant, config.task.text, result.steps == 0,
                                                tool, graph, subgraph ? &*subgraph : nullptr);
      const AgentStep step = agent->plan_step(obs.text);
      if (vt.self_query && !step.thought.empty()) {
        feedback = merge_feedback(std::move(feedback),
                                  generate_query(step.thought, catalog, gateway, templates));
      }
      const double latency = seconds_since(step_start);
      total_latency += latency;
      ++result.steps;
      result.cumulative_observation_tokens += obs.graph_tokens;
      run.steps.push_back(step);

      tool = ToolOutcome{};
      bool ok = true;
      if (step.action == ActionRegistry::kFinish) {
        tool.message = "Task declared complete.";
        done = true;
      } else if (step.malformed) {
        ++malformed;
        ok = false;
        tool.message = "Your reply could not be parsed; no action was taken.";
      } else {
        const sim::ActionResult r = world.step(step.action, step.action_input);
        ok = r.ok;
        tool.message = r.message;
        tool.listed_ids = r.listed_ids;
        if (step.action == "getdiscoveredobjects") {
          tool.full_graph_request = true;
          ++result.full_graph_requests;
        }
      }
      world.dynamics_tick();
      index.apply_graph_delta(graph, world.observe_graph(graph));
      if (config.check_mirror) check_mirror(world, graph, index);

      ordered_json record;
      record["step"] = result.steps;
      record["thought"] = step.thought;
      record["action"] = step.action;
      record["input"] = step.action_input;
      record["malformed"] = step.malformed;
      record["ok"] = ok;
      record["message"] = tool.message;
      record["observation_tokens"] = obs.graph_tokens;
      record["latency_ms"] = latency * 1000.0;
      record["full_graph_request"] = tool.full_graph_request;
      run.log.push_back(std::move(record));

      if (world.check_goal(config.task.goal)) {
        result.success = true;
        done = true;
      }
    }
    if (!done) {
      result.failure_mode =
          2 * malformed >= result.steps ? failure::kMalformedPlanning : failure::kStepLimit;
    }
  } catch (const TokenLimitError&) {
    result.failure_mode = failure::kTokenLimit;
  } catch (const ScriptExhaustedError&) {
    result.failure_mode = failure::kScriptExhausted;
  } catch (const GatewayError&) {
    result.failure_mode = failure::kGatewayError;
  }
  if (result.failure_mode != failure::kNone) result.success = false;
  result.avg_step_latency_s = result.steps == 0 ? 0.0 : total_latency / static_cast<double>(result.steps);

  ordered_json final_record;
  final_record["final"] = true;
  final_record["success"] = result.success;
  final_record["failure_mode"] = result.failure_mode;
  final_record["steps"] = result.steps;
  final_record["cumulative_observation_tokens"] = result.cumulative_observation_tokens;
  final_record["full_graph_requests"] = result.full_graph_requests;
  final_record["avg_step_latency_s"] = result.avg_step_latency_s;
  run.log.push_back(std::move(final_record));

  if (!config.log_path.empty()) {
    std::ofstream out(config.log_path);
    if (!out) throw Error("cannot write episode log '" + config.log_path + "'");
    out << run.log_jsonl();
  }
  return run;
}

// ---------------------------------------------------------------------------

SuiteRun run_suite(const SuiteConfig& config) {
  if (config.tasks.empty() || config.variants.empty() || config.distractor_levels.empty() ||
      config.repetitions < 1) {
    throw ValidationError("suite grid is empty");
  }
  config.retrieval.validate();
  for (const auto& task : config.tasks) {
    if (!config.scenes.count(task.scene)) {
      throw NotFoundError("task '" + task.id + "' references unknown scene '" + task.scene + "'");
    }
  }

  struct Cell {
    const Task* task;
    AgentVariant variant;
    std::size_t distractors;
    int repetition;
  };
  std::vector<Cell> cells;
  for (int rep = 0; rep < config.repetitions; ++rep) {
    for (std::size_t level : config.distractor_levels) {
      for (const auto& task : config.tasks) {
        for (AgentVariant v : config.variants) cells.push_back({&task, v, level, rep});
      }
    }
  }

  namespace fs = std::filesystem;
  if (!config.output_dir.empty()) fs::create_directories(fs::path(config.output_dir) / "logs");

  SuiteRun run;
  run.results.resize(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const Cell& c = cells[i];
      EpisodeConfig ec;
      ec.task = *c.task;
      ec.scene = config.scenes.at(c.task->scene);
      ec.variant = c.variant;
      ec.distractors = c.distractors;
      ec.seed = config.base_seed + static_cast<std::uint64_t>(c.repetition);
      ec.repetition = c.repetition;
      ec.retrieval = config.retrieval;
      ec.gateway = config.gateway;
      ec.max_input_tokens = config.max_input_tokens;
      ec.check_mirror = config.check_mirror;
      if (!config.output_dir.empty()) {
        ec.log_path = (fs::path(config.output_dir) / "logs" /
                       (c.task->id + "__" + to_string(c.variant) + "__n" +
                        std::to_string(c.distractors) + "__r" + std::to_string(c.repetition) +
                        ".jsonl"))
                          .string();
      }
      EpisodeResult& r = run.results[i];
      try {
        r = run_episode(ec).result;
      } catch (const std::exception&) {
        r = EpisodeResult{};
        r.task_id = c.task->id;
        r.scene_id = c.task->scene;
        r.variant = to_string(c.variant);
        r.seed = ec.seed;
        r.distractors = c.distractors;
        r.difficulty = c.task->difficulty;
        r.repetition = c.repetition;
        r.failure_mode = failure::kError;
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(config.parallelism, cells.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  run.summary = summarize(run.results);
  if (!config.output_dir.empty()) {
    std::ofstream results(fs::path(config.output_dir) / "results.jsonl");
    for (const auto& r : run.results) results << r.to_json().dump() << "\n";
    std::ofstream summary(fs::path(config.output_dir) / "summary.txt");
    summary << run.summary.render();
  }
  return run;
}

}  // namespace erag

// erag: run episodes and suites, summarize results, replay recordings.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "erag/errors.hpp"
#include "erag/harness.hpp"

namespace {

struct CommonOptions {
  std::string data_dir;
  std::string task_file;
  std::string scene_dir;
  std::size_t k = erag::RetrievalParams::kDefaultK;
  double threshold = erag::RetrievalParams::kDefaultThreshold;
  std::uint64_t seed = 0;
  std::string gateway_config;
  std::string backend;
  std::string script;
  std::string replay;
  std::string record;
  std::size_t max_input_tokens = 0;
};

void add_common(CLI::App* app, CommonOptions& o) {
  app->add_option("--data-dir", o.data_dir, "Root holding prompts/ and data/ (default: ERAG_DATA_DIR or the source tree)");
  app->add_option("--task-file", o.task_file, "Task file (default: <data-dir>/data/tasks/tasks.json)");
  app->add_option("--scene-dir", o.scene_dir, "Scene directory (default: <data-dir>/data/scenes)");
  app->add_option("-k,--k", o.k, "Top-k per retrieval term")->check(CLI::PositiveNumber);
  app->add_option("--threshold", o.threshold, "Similarity threshold")->check(CLI::Range(-1.0, 1.0));
  app->add_option("--seed", o.seed, "Seed for distractors and the simulator");
  app->add_option("--gateway-config", o.gateway_config, "Gateway config JSON file");
  app->add_option("--backend", o.backend, "remote | scripted | replay | solution");
  app->add_option("--script", o.script, "Script file for the scripted backend");
  app->add_option("--replay", o.replay, "Replay store (JSONL) for the replay backend");
  app->add_option("--record", o.record, "Record every LLM exchange to this JSONL file");
  app->add_option("--max-input-tokens", o.max_input_tokens, "Per-request input-token ceiling (0: none)");
}

std::string data_dir(const CommonOptions& o) {
  return o.data_dir.empty() ? erag::default_data_dir() : o.data_dir;
}

erag::llm::GatewayConfig gateway_config(const CommonOptions& o) {
  erag::llm::GatewayConfig cfg;
  if (!o.gateway_config.empty()) cfg = erag::llm::GatewayConfig::from_file(o.gateway_config);
  cfg.apply_env_overrides();
  if (!o.backend.empty()) cfg.kind = erag::llm::backend_kind_from_string(o.backend);
  if (!o.script.empty()) cfg.script_path = o.script;
  if (!o.replay.empty()) cfg.replay_path = o.replay;
  return cfg;
}

erag::RetrievalParams retrieval(const CommonOptions& o) {
  erag::RetrievalParams p;
  p.k = static_cast<int>(o.k);
  p.threshold = o.threshold;
  p.validate();
  return p;
}

std::vector<erag::Task> tasks(const CommonOptions& o) {
  return erag::load_tasks(o.task_file.empty() ? data_dir(o) + "/data/tasks/tasks.json" : o.task_file);
}

std::map<std::string, erag::sim::Scene> scenes(const CommonOptions& o) {
  return erag::load_scenes(o.scene_dir.empty() ? data_dir(o) + "/data/scenes" : o.scene_dir);
}

struct EpisodeOptions {
  std::string task_id;
  std::string variant = "erag_strict";
  std::size_t distractors = 0;
  std::string log_path;
  std::string expect_log;
};

erag::EpisodeRun run_one(const CommonOptions& o, const EpisodeOptions& e,
                         const erag::llm::GatewayConfig& gw) {
  const auto all = tasks(o);
  const erag::Task& task = erag::find_task(all, e.task_id);
  const auto scene_map = scenes(o);
  auto it = scene_map.find(task.scene);
  if (it == scene_map.end()) throw erag::NotFoundError("unknown scene '" + task.scene + "'");

  erag::PromptTemplates templates = erag::PromptTemplates::load(data_dir(o));
  erag::EpisodeConfig cfg;
  cfg.task = task;
  cfg.scene = it->second;
  cfg.variant = erag::variant_from_string(e.variant);
  cfg.distractors = e.distractors;
  cfg.seed = o.seed;
  cfg.retrieval = retrieval(o);
  cfg.gateway = gw;
  cfg.max_input_tokens = o.max_input_tokens;
  cfg.log_path = e.log_path;
  cfg.templates = &templates;
  std::shared_ptr<erag::llm::ReplayStore> store;
  if (!o.record.empty()) {
    store = std::make_shared<erag::llm::ReplayStore>();
    cfg.record = store;
  }
  erag::EpisodeRun run = erag::run_episode(cfg);
  if (store) store->save(o.record);
  return run;
}

void add_episode(CLI::App* app, EpisodeOptions& e) {
  app->add_option("--task", e.task_id, "Task id")->required();
  app->add_option("--variant", e.variant, "react | full_mem | erag | erag_strict | erag_feedback");
  app->add_option("--distractors", e.distractors, "Injected distractor count");
  app->add_option("--log", e.log_path, "Write the step log (JSONL) here");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Embodied retrieval-augmented planning harness"};
  app.require_subcommand(1);

  CommonOptions run_opts, suite_opts, replay_opts;
  EpisodeOptions run_ep, replay_ep;

  CLI::App* run = app.add_subcommand("run", "Run a single episode and print its result record");
  add_common(run, run_opts);
  add_episode(run, run_ep);

  CLI::App* replay = app.add_subcommand("replay", "Re-run an episode from a recorded replay store");
  add_common(replay, replay_opts);
  add_episode(replay, replay_ep);
  replay->add_option("--expect-log", replay_ep.expect_log,
                     "Compare the step log with this one (latency fields ignored)");

  CLI::App* suite = app.add_subcommand("suite", "Run a grid of episodes");
  add_common(suite, suite_opts);
  std::vector<std::string> suite_tasks;
  std::vector<std::string> suite_variants = {"react", "full_mem", "erag", "erag_strict", "erag_feedback"};
  std::vector<std::size_t> suite_levels = {0};
  int repetitions = 1;
  std::size_t parallelism = 1;
  std::string output_dir = "results";
  suite->add_option("--tasks", suite_tasks, "Task ids (default: all)");
  suite->add_option("--variants", suite_variants, "Agent variants");
  suite->add_option("--distractors", suite_levels, "Distractor levels");
  suite->add_option("--repetitions", repetitions, "Repetitions (seeds seed..seed+n-1)")->check(CLI::PositiveNumber);
  suite->add_option("-j,--parallelism", parallelism, "Concurrent episodes")->check(CLI::PositiveNumber);
  suite->add_option("-o,--output-dir", output_dir, "Output directory");

  CLI::App* summarize = app.add_subcommand("summarize", "Summarize results JSONL files");
  std::vector<std::string> result_files;
  summarize->add_option("files", result_files, "results.jsonl files")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const auto r = run_one(run_opts, run_ep, gateway_config(run_opts));
      std::cout << r.result.to_json().dump() << "\n";
      return 0;
    }
    if (replay->parsed()) {
      if (replay_opts.replay.empty()) throw erag::ValidationError("replay needs --replay");
      auto gw = gateway_config(replay_opts);
      gw.kind = erag::llm::BackendKind::kReplay;
      const auto r = run_one(replay_opts, replay_ep, gw);
      std::cout << r.result.to_json().dump() << "\n";
      if (!replay_ep.expect_log.empty()) {
        std::ifstream in(replay_ep.expect_log);
        if (!in) throw erag::NotFoundError("cannot open '" + replay_ep.expect_log + "'");
        std::string expected;
        std::string line;
        while (std::getline(in, line)) {
          auto j = nlohmann::ordered_json::parse(line);
          j.erase("latency_ms");
          j.erase("avg_step_latency_s");
          expected += j.dump() + "\n";
        }
        if (expected != r.log_jsonl(false)) {
          std::cerr << "replayed episode differs from " << replay_ep.expect_log << "\n";
          return 1;
        }
        std::cerr << "replay matches " << replay_ep.expect_log << "\n";
      }
      return 0;
    }
    if (suite->parsed()) {
      erag::SuiteConfig cfg;
      const auto all = tasks(suite_opts);
      if (suite_tasks.empty()) {
        cfg.tasks = all;
      } else {
        for (const auto& id : suite_tasks) cfg.tasks.push_back(erag::find_task(all, id));
      }
      cfg.scenes = scenes(suite_opts);
      for (const auto& v : suite_variants) cfg.variants.push_back(erag::variant_from_string(v));
      cfg.distractor_levels = suite_levels;
      cfg.repetitions = repetitions;
      cfg.base_seed = suite_opts.seed;
      cfg.retrieval = retrieval(suite_opts);
      cfg.gateway = gateway_config(suite_opts);
      cfg.max_input_tokens = suite_opts.max_input_tokens;
      cfg.parallelism = parallelism;
      cfg.output_dir = output_dir;
      const auto result = erag::run_suite(cfg);
      std::cout << result.summary.render();
      std::cerr << result.results.size() << " episodes written to " << output_dir << "\n";
      return 0;
    }
    if (summarize->parsed()) {
      const auto summary = erag::summarize_files(result_files);
      std::cout << summary.render();
      if (summary.warnings > 0) std::cerr << "warning: " << summary.warnings << " corrupt record(s) skipped\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "erag: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

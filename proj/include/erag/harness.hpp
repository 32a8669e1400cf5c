#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "erag/agent.hpp"
#include "erag/embedding_index.hpp"
#include "erag/llm_gateway.hpp"
#include "erag/prompts.hpp"
#include "erag/simulator.hpp"
#include "erag/tasks.hpp"

namespace erag {

/// none, step-limit, token-limit, malformed-planning, script-exhausted,
/// gateway-error, error.
namespace failure {
inline constexpr const char* kNone = "none";
inline constexpr const char* kStepLimit = "step-limit";
inline constexpr const char* kTokenLimit = "token-limit";
inline constexpr const char* kMalformedPlanning = "malformed-planning";
inline constexpr const char* kScriptExhausted = "script-exhausted";
inline constexpr const char* kGatewayError = "gateway-error";
inline constexpr const char* kError = "error";
}  // namespace failure

struct EpisodeResult {
  std::string task_id;
  std::string scene_id;
  std::string variant;
  std::uint64_t seed = 0;
  std::size_t distractors = 0;
  std::string difficulty;
  int repetition = 0;
  bool success = false;
  std::size_t steps = 0;
  std::string failure_mode = failure::kNone;
  double avg_step_latency_s = 0.0;
  std::size_t cumulative_observation_tokens = 0;
  std::size_t full_graph_requests = 0;

  /// Key order is fixed; latency is left out when `with_latency` is false.
  nlohmann::ordered_json to_json(bool with_latency = true) const;
  static EpisodeResult from_json(const nlohmann::json& j);
};

struct EpisodeConfig {
  Task task;
  sim::Scene scene;
  AgentVariant variant = AgentVariant::kEragStrict;
  std::size_t distractors = 0;
  std::uint64_t seed = 0;
  int repetition = 0;
  RetrievalParams retrieval;
  llm::GatewayConfig gateway;
  /// Per-request input-token ceiling; 0 disables it.
  std::size_t max_input_tokens = 0;
  /// Used instead of the gateway config's backend when set.
  std::shared_ptr<llm::ChatBackend> backend;
  /// Every exchange is appended here when set.
  std::shared_ptr<llm::ReplayStore> record;
  /// Step log destination (JSONL); nothing is written when empty.
  std::string log_path;
  /// Compare graph and index against a from-scratch rebuild after each step.
  bool check_mirror = true;
  const PromptTemplates* templates = nullptr;
};

struct EpisodeRun {
  EpisodeResult result;
  std::vector<AgentStep> steps;
  /// Step records followed by the final record.
  std::vector<nlohmann::ordered_json> log;

  /// The log as JSONL, optionally without latency fields.
  std::string log_jsonl(bool with_latency = true) const;
};

/// Runs one episode to success, finish, the step cap or a gateway failure.
/// Throws only for configuration errors (unknown backend, bad params) and
/// for a broken graph mirror.
EpisodeRun run_episode(const EpisodeConfig& config);

// ---------------------------------------------------------------------------
// Suites

struct SuiteConfig {
  std::vector<Task> tasks;
  std::map<std::string, sim::Scene> scenes;
  std::vector<AgentVariant> variants;
  std::vector<std::size_t> distractor_levels = {0};
  int repetitions = 1;
  std::uint64_t base_seed = 0;
  RetrievalParams retrieval;
  llm::GatewayConfig gateway;
  std::size_t max_input_tokens = 0;
  std::size_t parallelism = 1;
  /// results.jsonl, summary.txt and logs/ are written here when nonempty.
  std::string output_dir;
  bool check_mirror = false;
};

struct SummaryStat {
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t n = 0;
};

struct SummaryRow {
  std::string variant;
  std::size_t distractors = 0;
  std::size_t episodes = 0;
  std::size_t completed = 0;  // episodes not ended by the token limit
  std::size_t token_limited = 0;
  SummaryStat success;
  SummaryStat easy_success;
  SummaryStat hard_success;
  SummaryStat step_latency_s;
  SummaryStat cumulative_tokens;
  SummaryStat full_graph_requests;
};

struct SuiteSummary {
  std::vector<SummaryRow> rows;
  std::size_t warnings = 0;

  std::string render() const;
};

struct SuiteRun {
  std::vector<EpisodeResult> results;
  SuiteSummary summary;
};

/// Cells in repetition, distractor level, task, variant order. Episodes run
/// on up to `parallelism` threads; results keep cell order.
SuiteRun run_suite(const SuiteConfig& config);

/// Mean and sample standard deviation (0 for fewer than two values).
SummaryStat mean_std(const std::vector<double>& values);

/// Groups by (variant, distractors). Each statistic is computed per
/// repetition first, then averaged across repetitions. Latency, tokens and
/// full-graph requests use completed episodes only.
SuiteSummary summarize(const std::vector<EpisodeResult>& results);
/// Reads results JSONL files; unreadable lines are skipped and counted.
SuiteSummary summarize_files(const std::vector<std::string>& paths);

/// "0.133 ± 0.012"
std::string format_stat(const SummaryStat& stat, int decimals = 3);

}  // namespace erag

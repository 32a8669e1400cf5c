#pragma once

#include <chrono>
#include <cstddef>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace erag::llm {

enum class Role { kSystem, kUser, kAssistant };

const char* to_string(Role role);
Role role_from_string(const std::string& text);

struct ChatMessage {
  Role role = Role::kUser;
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

struct CompletionRequest {
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  int max_output = 1024;
  std::string model_tag;

  void validate() const;
  /// Text of the last user message, or empty when there is none.
  const std::string& last_user_message() const;
};

/// Token proxy: ceil(UTF-8 byte length / 4).
std::size_t count_tokens(std::string_view text);
std::size_t count_tokens(const CompletionRequest& request);

/// Hex FNV-1a 64 of the canonical request JSON (model, temperature, cap,
/// messages). Used as the replay key.
std::string request_hash(const CompletionRequest& request);
/// Hex FNV-1a 64 of the messages alone.
std::string messages_digest(const CompletionRequest& request);

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  /// Returns the assistant text. May throw TransientError, GatewayError,
  /// TokenLimitError or ScriptExhaustedError.
  virtual std::string complete(const CompletionRequest& request) = 0;
};

// ---------------------------------------------------------------------------
// Scripted backend

/// A reply rule. `pattern` is matched as a substring of the request's last
/// user message; an empty pattern matches everything. Replies are handed out
/// in order; once they are used up the rule stops matching unless `repeat`
/// is set, in which case the last reply is returned forever.
struct ScriptRule {
  std::string pattern;
  std::vector<std::string> replies;
  bool repeat = false;
};

class ScriptedBackend final : public ChatBackend {
 public:
  explicit ScriptedBackend(std::vector<ScriptRule> rules);
  /// {"rules": [{"pattern": ..., "replies": [...], "repeat": bool}]}
  static std::unique_ptr<ScriptedBackend> from_json(const nlohmann::json& j);
  static std::unique_ptr<ScriptedBackend> from_file(const std::string& path);

  std::string complete(const CompletionRequest& request) override;

 private:
  struct RuleState {
    ScriptRule rule;
    std::size_t next = 0;
  };
  std::mutex mutex_;
  std::vector<RuleState> rules_;
};

// ---------------------------------------------------------------------------
// Record / replay

struct ReplayRecord {
  std::string request_hash;
  std::string messages_digest;
  std::string response;
};

/// JSONL store, one ReplayRecord per line. Append-only while recording.
class ReplayStore {
 public:
  ReplayStore() = default;
  static ReplayStore load(const std::string& path);

  void append(ReplayRecord record);
  const std::vector<ReplayRecord>& records() const { return records_; }
  void save(const std::string& path) const;
  std::string to_jsonl() const;

 private:
  std::vector<ReplayRecord> records_;
};

/// Serves recorded responses keyed by request hash, in recording order for
/// repeated identical requests.
class ReplayBackend final : public ChatBackend {
 public:
  explicit ReplayBackend(const ReplayStore& store);
  std::string complete(const CompletionRequest& request) override;

 private:
  std::mutex mutex_;
  std::map<std::string, std::deque<std::string>> responses_;
};

/// Forwards to `inner` and appends every successful exchange to a store.
class RecordingBackend final : public ChatBackend {
 public:
  RecordingBackend(std::shared_ptr<ChatBackend> inner, std::shared_ptr<ReplayStore> store);
  std::string complete(const CompletionRequest& request) override;

 private:
  std::shared_ptr<ChatBackend> inner_;
  std::shared_ptr<ReplayStore> store_;
  std::mutex mutex_;
};

// ---------------------------------------------------------------------------
// Remote backend

struct RemoteEndpoint {
  std::string url;  // e.g. https://api.openai.com/v1/chat/completions
  std::string model;
  std::string api_key;
  std::chrono::seconds timeout{60};
};

/// One HTTP POST per call with the standard chat-completions body; returns
/// choices[0].message.content.
class RemoteChatBackend final : public ChatBackend {
 public:
  explicit RemoteChatBackend(RemoteEndpoint endpoint);
  std::string complete(const CompletionRequest& request) override;

 private:
  RemoteEndpoint endpoint_;
};

// ---------------------------------------------------------------------------
// Gateway

struct RetryPolicy {
  int retries = 2;
  std::chrono::milliseconds backoff_base{500};
};

struct GatewayTelemetry {
  std::size_t requests = 0;
  std::size_t retries = 0;
  std::size_t last_request_retries = 0;
};

/// Front door used by the pipeline: retries transient failures with
/// exponential backoff and enforces an optional input-token ceiling.
class Gateway {
 public:
  explicit Gateway(std::shared_ptr<ChatBackend> backend, RetryPolicy policy = {},
                   std::size_t max_input_tokens = 0);

  std::string complete(const CompletionRequest& request);

  GatewayTelemetry telemetry() const;
  void set_max_input_tokens(std::size_t limit) { max_input_tokens_ = limit; }
  std::size_t max_input_tokens() const { return max_input_tokens_; }

 private:
  std::shared_ptr<ChatBackend> backend_;
  RetryPolicy policy_;
  std::size_t max_input_tokens_;
  mutable std::mutex mutex_;
  GatewayTelemetry telemetry_;
};

// ---------------------------------------------------------------------------
// Configuration

enum class BackendKind { kRemote, kScripted, kReplay, kSolution };

const char* to_string(BackendKind kind);
BackendKind backend_kind_from_string(const std::string& text);

struct GatewayConfig {
  BackendKind kind = BackendKind::kSolution;
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string model = "gpt-4o-mini";
  std::string api_key_env = "OPENAI_API_KEY";
  int timeout_seconds = 60;
  int retries = 2;
  std::string script_path;
  std::string replay_path;
  std::string record_path;

  static GatewayConfig from_json(const nlohmann::json& j);
  static GatewayConfig from_file(const std::string& path);
  /// ERAG_LLM_BACKEND, ERAG_LLM_ENDPOINT, ERAG_LLM_MODEL,
  /// ERAG_LLM_API_KEY_ENV, ERAG_LLM_TIMEOUT, ERAG_LLM_RETRIES.
  void apply_env_overrides();
  nlohmann::json to_json() const;
};

/// Builds the backend for remote, scripted and replay kinds. The solution
/// kind is resolved by the harness from the task's shipped solution.
std::shared_ptr<ChatBackend> make_backend(const GatewayConfig& config);

}  // namespace erag::llm

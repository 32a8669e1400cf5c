#include "erag/llm_gateway.hpp"

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "erag/errors.hpp"

namespace erag::llm {

using nlohmann::json;

const char* to_string(Role role) {
  switch (role) {
    case Role::kSystem:
      return "system";
    case Role::kUser:
      return "user";
    case Role::kAssistant:
      return "assistant";
  }
  return "user";
}

Role role_from_string(const std::string& text) {
  if (text == "system") return Role::kSystem;
  if (text == "user") return Role::kUser;
  if (text == "assistant") return Role::kAssistant;
  throw ValidationError("unknown chat role '" + text + "'");
}

void CompletionRequest::validate() const {
  if (messages.empty()) throw ValidationError("completion request has no messages");
  if (temperature < 0.0) throw ValidationError("temperature must be >= 0");
  for (std::size_t i = 0; i < messages.size(); ++i) {
    const auto& m = messages[i];
    if (m.role == Role::kSystem && i != 0) {
      throw ValidationError("system message allowed only in first position");
    }
    if (m.role != Role::kSystem && m.content.empty()) {
      throw ValidationError("user/assistant message content must be nonempty");
    }
  }
}

const std::string& CompletionRequest::last_user_message() const {
  static const std::string kEmpty;
  for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
    if (it->role == Role::kUser) return it->content;
  }
  return kEmpty;
}

std::size_t count_tokens(std::string_view text) { return (text.size() + 3) / 4; }

std::size_t count_tokens(const CompletionRequest& request) {
  std::size_t total = 0;
  for (const auto& m : request.messages) total += count_tokens(m.content);
  return total;
}

namespace {

class Fnv64 {
 public:
  void update(std::string_view bytes) {
    for (unsigned char c : bytes) {
      hash_ ^= c;
      hash_ *= 1099511628211ull;
    }
  }
  std::string hex() const {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash_));
    return buf;
  }

 private:
  std::uint64_t hash_ = 14695981039346656037ull;
};

// Length-prefixed so that message boundaries cannot alias.
void hash_messages(Fnv64& h, const CompletionRequest& request) {
  for (const auto& m : request.messages) {
    h.update(to_string(m.role));
    h.update(std::to_string(m.content.size()));
    h.update(":");
    h.update(m.content);
  }
}

}  // namespace

std::string request_hash(const CompletionRequest& request) {
  Fnv64 h;
  json header = {{"model", request.model_tag},
                 {"temperature", request.temperature},
                 {"max_output", request.max_output}};
  h.update(header.dump());
  hash_messages(h, request);
  return h.hex();
}

std::string messages_digest(const CompletionRequest& request) {
  Fnv64 h;
  hash_messages(h, request);
  return h.hex();
}

// ---------------------------------------------------------------------------

ScriptedBackend::ScriptedBackend(std::vector<ScriptRule> rules) {
  rules_.reserve(rules.size());
  for (auto& r : rules) {
    if (r.replies.empty()) throw ValidationError("script rule '" + r.pattern + "' has no replies");
    rules_.push_back({std::move(r), 0});
  }
}

std::unique_ptr<ScriptedBackend> ScriptedBackend::from_json(const json& j) {
  std::vector<ScriptRule> rules;
  for (const auto& r : j.at("rules")) {
    ScriptRule rule;
    rule.pattern = r.value("pattern", "");
    if (r.contains("reply")) rule.replies.push_back(r.at("reply").get<std::string>());
    if (r.contains("replies")) {
      for (const auto& s : r.at("replies")) rule.replies.push_back(s.get<std::string>());
    }
    rule.repeat = r.value("repeat", false);
    rules.push_back(std::move(rule));
  }
  return std::make_unique<ScriptedBackend>(std::move(rules));
}

std::unique_ptr<ScriptedBackend> ScriptedBackend::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open script file '" + path + "'");
  return from_json(json::parse(in));
}

std::string ScriptedBackend::complete(const CompletionRequest& request) {
  const std::string& text = request.last_user_message();
  std::lock_guard lock(mutex_);
  for (auto& state : rules_) {
    if (!state.rule.pattern.empty() && text.find(state.rule.pattern) == std::string::npos) continue;
    if (state.next < state.rule.replies.size()) return state.rule.replies[state.next++];
    if (state.rule.repeat) return state.rule.replies.back();
  }
  throw ScriptExhaustedError("no script rule matches request: " + text.substr(0, 120));
}

// ---------------------------------------------------------------------------

ReplayStore ReplayStore::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open replay store '" + path + "'");
  ReplayStore store;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    store.records_.push_back({j.at("request_hash").get<std::string>(),
                              j.value("messages_digest", ""),
                              j.at("response").get<std::string>()});
  }
  return store;
}

void ReplayStore::append(ReplayRecord record) { records_.push_back(std::move(record)); }

std::string ReplayStore::to_jsonl() const {
  std::string out;
  for (const auto& r : records_) {
    json j = {{"request_hash", r.request_hash},
              {"messages_digest", r.messages_digest},
              {"response", r.response}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

void ReplayStore::save(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write replay store '" + path + "'");
  out << to_jsonl();
}

ReplayBackend::ReplayBackend(const ReplayStore& store) {
  for (const auto& r : store.records()) responses_[r.request_hash].push_back(r.response);
}

std::string ReplayBackend::complete(const CompletionRequest& request) {
  const std::string key = request_hash(request);
  std::lock_guard lock(mutex_);
  auto it = responses_.find(key);
  if (it == responses_.end() || it->second.empty()) {
    throw ScriptExhaustedError("replay store has no response for request " + key);
  }
  std::string reply = std::move(it->second.front());
  it->second.pop_front();
  return reply;
}

RecordingBackend::RecordingBackend(std::shared_ptr<ChatBackend> inner,
                                   std::shared_ptr<ReplayStore> store)
    : inner_(std::move(inner)), store_(std::move(store)) {}

std::string RecordingBackend::complete(const CompletionRequest& request) {
  std::string reply = inner_->complete(request);
  std::lock_guard lock(mutex_);
  store_->append({request_hash(request), messages_digest(request), reply});
  return reply;
}

// ---------------------------------------------------------------------------

Gateway::Gateway(std::shared_ptr<ChatBackend> backend, RetryPolicy policy,
                 std::size_t max_input_tokens)
    : backend_(std::move(backend)), policy_(policy), max_input_tokens_(max_input_tokens) {
  if (!backend_) throw ValidationError("gateway needs a backend");
}

std::string Gateway::complete(const CompletionRequest& request) {
  request.validate();
  if (max_input_tokens_ != 0) {
    const std::size_t tokens = count_tokens(request);
    if (tokens > max_input_tokens_) {
      throw TokenLimitError("request of " + std::to_string(tokens) +
                            " tokens exceeds the input limit of " +
                            std::to_string(max_input_tokens_));
    }
  }
  std::size_t attempt = 0;
  for (;;) {
    try {
      std::string reply = backend_->complete(request);
      std::lock_guard lock(mutex_);
      ++telemetry_.requests;
      telemetry_.retries += attempt;
      telemetry_.last_request_retries = attempt;
      return reply;
    } catch (const TransientError& e) {
      if (attempt >= static_cast<std::size_t>(policy_.retries)) {
        std::lock_guard lock(mutex_);
        ++telemetry_.requests;
        telemetry_.retries += attempt;
        telemetry_.last_request_retries = attempt;
        throw GatewayError(std::string("giving up after retries: ") + e.what());
      }
      std::this_thread::sleep_for(policy_.backoff_base * (1 << attempt));
      ++attempt;
    }
  }
}

GatewayTelemetry Gateway::telemetry() const {
  std::lock_guard lock(mutex_);
  return telemetry_;
}

// ---------------------------------------------------------------------------

const char* to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::kRemote:
      return "remote";
    case BackendKind::kScripted:
      return "scripted";
    case BackendKind::kReplay:
      return "replay";
    case BackendKind::kSolution:
      return "solution";
  }
  return "solution";
}

BackendKind backend_kind_from_string(const std::string& text) {
  if (text == "remote") return BackendKind::kRemote;
  if (text == "scripted") return BackendKind::kScripted;
  if (text == "replay") return BackendKind::kReplay;
  if (text == "solution") return BackendKind::kSolution;
  throw ValidationError("unknown gateway backend '" + text + "'");
}

GatewayConfig GatewayConfig::from_json(const json& j) {
  GatewayConfig c;
  if (j.contains("backend")) c.kind = backend_kind_from_string(j.at("backend").get<std::string>());
  c.endpoint = j.value("endpoint", c.endpoint);
  c.model = j.value("model", c.model);
  c.api_key_env = j.value("api_key_env", c.api_key_env);
  c.timeout_seconds = j.value("timeout_seconds", c.timeout_seconds);
  c.retries = j.value("retries", c.retries);
  c.script_path = j.value("script", c.script_path);
  c.replay_path = j.value("replay", c.replay_path);
  c.record_path = j.value("record", c.record_path);
  return c;
}

GatewayConfig GatewayConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open gateway config '" + path + "'");
  return from_json(json::parse(in));
}

namespace {
const char* env(const char* name) {
  const char* v = std::getenv(name);
  return (v != nullptr && *v != '\0') ? v : nullptr;
}
}  // namespace

void GatewayConfig::apply_env_overrides() {
  if (const char* v = env("ERAG_LLM_BACKEND")) kind = backend_kind_from_string(v);
  if (const char* v = env("ERAG_LLM_ENDPOINT")) endpoint = v;
  if (const char* v = env("ERAG_LLM_MODEL")) model = v;
  if (const char* v = env("ERAG_LLM_API_KEY_ENV")) api_key_env = v;
  if (const char* v = env("ERAG_LLM_TIMEOUT")) timeout_seconds = std::atoi(v);
  if (const char* v = env("ERAG_LLM_RETRIES")) retries = std::atoi(v);
}

json GatewayConfig::to_json() const {
  return {{"backend", llm::to_string(kind)}, {"endpoint", endpoint}, {"model", model},
          {"api_key_env", api_key_env},    {"timeout_seconds", timeout_seconds},
          {"retries", retries},            {"script", script_path},
          {"replay", replay_path},         {"record", record_path}};
}

std::shared_ptr<ChatBackend> make_backend(const GatewayConfig& config) {
  switch (config.kind) {
    case BackendKind::kRemote: {
      RemoteEndpoint ep{config.endpoint, config.model, "", std::chrono::seconds(config.timeout_seconds)};
      if (const char* key = env(config.api_key_env.c_str())) ep.api_key = key;
      return std::make_shared<RemoteChatBackend>(std::move(ep));
    }
    case BackendKind::kScripted:
      return ScriptedBackend::from_file(config.script_path);
    case BackendKind::kReplay:
      return std::make_shared<ReplayBackend>(ReplayStore::load(config.replay_path));
    case BackendKind::kSolution:
      break;
  }
  throw ValidationError("the solution backend is built per task by the harness");
}

}  // namespace erag::llm

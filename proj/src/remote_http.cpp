// HTTP transport for the remote chat and embedding backends.

#include <httplib.h>

#include <cmath>
#include <nlohmann/json.hpp>

#include "erag/embedding.hpp"
#include "erag/errors.hpp"
#include "erag/llm_gateway.hpp"

namespace erag {
namespace {

using nlohmann::json;

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ValidationError("endpoint URL lacks a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

/// Posts `body` and returns the parsed JSON reply, mapping transport and
/// status failures onto the gateway error types.
json post_json(const std::string& url, const std::string& api_key, std::chrono::seconds timeout,
               const json& body) {
  const SplitUrl target = split_url(url);
  httplib::Client client(target.origin);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers headers;
  if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);

  auto res = client.Post(target.path, headers, body.dump(), "application/json");
  if (!res) {
    throw TransientError("HTTP request to " + url + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status == 429 || res->status >= 500) {
    throw TransientError("HTTP " + std::to_string(res->status) + " from " + url);
  }
  if (res->status != 200) {
    if (res->body.find("context_length") != std::string::npos ||
        res->body.find("maximum context") != std::string::npos) {
      throw TokenLimitError("endpoint rejected request length: " + res->body.substr(0, 200));
    }
    throw GatewayError("HTTP " + std::to_string(res->status) + " from " + url + ": " +
                       res->body.substr(0, 200));
  }
  try {
    return json::parse(res->body);
  } catch (const json::parse_error& e) {
    throw GatewayError(std::string("malformed JSON from endpoint: ") + e.what());
  }
}

}  // namespace

namespace llm {

RemoteChatBackend::RemoteChatBackend(RemoteEndpoint endpoint) : endpoint_(std::move(endpoint)) {
  split_url(endpoint_.url);
}

std::string RemoteChatBackend::complete(const CompletionRequest& request) {
  json messages = json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  }
  json body = {{"model", request.model_tag.empty() ? endpoint_.model : request.model_tag},
               {"messages", std::move(messages)},
               {"temperature", request.temperature},
               {"max_tokens", request.max_output}};
  const json reply = post_json(endpoint_.url, endpoint_.api_key, endpoint_.timeout, body);
  try {
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw GatewayError(std::string("chat reply lacks choices[0].message.content: ") + e.what());
  }
}

}  // namespace llm

RemoteEmbedder::RemoteEmbedder(RemoteEmbeddingEndpoint endpoint, std::size_t expected_dimension)
    : endpoint_(std::move(endpoint)), dimension_(expected_dimension) {
  split_url(endpoint_.url);
}

std::size_t RemoteEmbedder::dimension() const {
  std::lock_guard lock(mutex_);
  return dimension_;
}

EmbeddingVector RemoteEmbedder::embed(std::string_view text) const {
  if (text.empty()) throw ValidationError("cannot embed empty text");
  const json body = {{"model", endpoint_.model}, {"input", json::array({std::string(text)})}};
  const json reply = post_json(endpoint_.url, endpoint_.api_key, endpoint_.timeout, body);

  EmbeddingVector vec;
  try {
    vec.values = reply.at("data").at(0).at("embedding").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw GatewayError(std::string("embedding reply lacks data[0].embedding: ") + e.what());
  }
  {
    std::lock_guard lock(mutex_);
    if (dimension_ == 0) dimension_ = vec.dimension();
    if (vec.dimension() != dimension_) {
      throw GatewayError("embedding endpoint returned dimension " +
                         std::to_string(vec.dimension()) + ", expected " +
                         std::to_string(dimension_));
    }
  }
  double sq = 0.0;
  for (double v : vec.values) sq += v * v;
  if (sq > 0.0) {
    const double n = std::sqrt(sq);
    for (double& v : vec.values) v /= n;
  }
  return vec;
}

}  // namespace erag

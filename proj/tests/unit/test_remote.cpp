#include <atomic>
#include <thread>

#include <httplib.h>
#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "erag/embedding.hpp"
#include "erag/errors.hpp"
#include "erag/llm_gateway.hpp"

using namespace erag;
using namespace std::chrono_literals;
using nlohmann::json;

namespace {

// Local chat/embedding endpoint with scripted failure behaviour.
class LocalServer {
 public:
  std::atomic<int> chat_calls{0};
  std::atomic<int> fail_first{0};
  std::atomic<int> embed_dim{4};
  json last_body;

  LocalServer() {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      last_body = json::parse(req.body);
      if (chat_calls++ < fail_first) {
        res.status = 503;
        return;
      }
      const std::string text = last_body["messages"].back()["content"];
      if (text == "too long") {
        res.status = 400;
        res.set_content(R"({"error":{"code":"context_length_exceeded"}})", "application/json");
        return;
      }
      if (text == "forbidden") {
        res.status = 403;
        return;
      }
      res.set_content(json{{"choices", {{{"message", {{"role", "assistant"}, {"content", "echo:" + text}}}}}}}.dump(),
                      "application/json");
    });
    server_.Post("/v1/embeddings", [this](const httplib::Request&, httplib::Response& res) {
      std::vector<double> v(static_cast<std::size_t>(embed_dim.load()), 0.0);
      v[0] = 3.0;
      v[1] = 4.0;
      res.set_content(json{{"data", {{{"embedding", v}}}}}.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalServer() {
    server_.stop();
    thread_.join();
  }
  std::string url(const std::string& path) const { return "http://127.0.0.1:" + std::to_string(port_) + path; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

llm::CompletionRequest user(const std::string& text) {
  llm::CompletionRequest r;
  r.messages.push_back({llm::Role::kUser, text});
  return r;
}

}  // namespace

TEST(RemoteChat, PostsStandardSchema) {
  LocalServer s;
  llm::RemoteChatBackend b({s.url("/v1/chat/completions"), "test-model", "key", 5s});
  EXPECT_EQ(b.complete(user("hi")), "echo:hi");
  EXPECT_EQ(s.last_body["model"], "test-model");
  EXPECT_EQ(s.last_body["messages"][0]["role"], "user");
  EXPECT_EQ(s.last_body["temperature"], 0.0);
}

TEST(RemoteChat, TransientFailuresAreRetried) {
  LocalServer s;
  s.fail_first = 2;
  auto b = std::make_shared<llm::RemoteChatBackend>(llm::RemoteEndpoint{s.url("/v1/chat/completions"), "m", "", 5s});
  llm::Gateway gw(b, {2, 0ms});
  EXPECT_EQ(gw.complete(user("hi")), "echo:hi");
  EXPECT_EQ(gw.telemetry().last_request_retries, 2u);
}

TEST(RemoteChat, MapsErrors) {
  LocalServer s;
  llm::RemoteChatBackend b({s.url("/v1/chat/completions"), "m", "", 5s});
  EXPECT_THROW(b.complete(user("too long")), TokenLimitError);
  EXPECT_THROW(b.complete(user("forbidden")), GatewayError);
  llm::RemoteChatBackend dead({"http://127.0.0.1:1/v1/chat/completions", "m", "", 1s});
  EXPECT_THROW(dead.complete(user("x")), TransientError);
  EXPECT_THROW(llm::RemoteChatBackend({"no-scheme", "m", "", 1s}), ValidationError);
}

TEST(RemoteEmbedder, NormalizesAndChecksDimension) {
  LocalServer s;
  RemoteEmbedder e({s.url("/v1/embeddings"), "m", "", 5s});
  const auto v = e.embed("egg");
  EXPECT_EQ(e.dimension(), 4u);
  EXPECT_NEAR(v.values[0], 0.6, 1e-12);
  EXPECT_NEAR(v.values[1], 0.8, 1e-12);
  s.embed_dim = 5;
  EXPECT_THROW(e.embed("egg"), GatewayError);
  EXPECT_THROW(e.embed(""), ValidationError);
}

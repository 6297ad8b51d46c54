#include "acps/remote_backend.hpp"

#include "support.hpp"

#include <doctest.h>

#include <atomic>
#include <thread>

using namespace acps;

TEST_SUITE_BEGIN("remote");

namespace {

/// Local OpenAI-shaped endpoint for exercising the wire protocol.
class LocalServer {
 public:
  LocalServer() {
    port_ = server_.bind_to_any_port("127.0.0.1");
    REQUIRE(port_ > 0);
  }
  ~LocalServer() { stop(); }

  void start() {
    thread_ = std::thread([this]() { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  void stop() {
    if (thread_.joinable()) {
      server_.stop();
      thread_.join();
    }
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  httplib::Server& server() { return server_; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

RetryPolicy fast_retry() {
  RetryPolicy retry;
  retry.max_attempts = 3;
  retry.backoff_base_ms = 1;
  return retry;
}

}  // namespace

TEST_CASE("remote completion speaks the chat wire protocol") {
  LocalServer server;
  nlohmann::json seen_body;
  std::string seen_auth;
  server.server().Post("/v1/chat/completions",
                       [&](const httplib::Request& req, httplib::Response& res) {
                         seen_body = nlohmann::json::parse(req.body);
                         if (req.has_header("Authorization"))
                           seen_auth = req.get_header_value("Authorization");
                         nlohmann::json out;
                         out["choices"] = {{{"finish_reason", "stop"},
                                            {"message",
                                             {{"role", "assistant"},
                                              {"content", "<think>\nok\n</think>\n\\boxed{4}"}}}}};
                         out["usage"] = {{"completion_tokens", 21}, {"prompt_tokens", 100}};
                         res.set_content(out.dump(), "application/json");
                       });
  server.start();

  RemoteBackendConfig config;
  config.base_url = server.url() + "/v1";
  config.model = "test-model";
  config.api_key = "sk-test";
  config.retry = fast_retry();
  RemoteBackend backend(config);

  CompletionRequest request{"what is 2 + 2?", 0.5, 0.9, 256, 0};
  CompletionResult result = backend.complete(request);
  CHECK(result.text == "<think>\nok\n</think>\n\\boxed{4}");
  CHECK(result.completion_tokens == 21);
  CHECK(result.prompt_tokens == 100);

  CHECK(seen_body["model"] == "test-model");
  CHECK(seen_body["temperature"] == 0.5);
  CHECK(seen_body["top_p"] == 0.9);
  CHECK(seen_body["max_tokens"] == 256);
  CHECK(seen_body["messages"][0]["role"] == "user");
  CHECK(seen_body["messages"][0]["content"] == "what is 2 + 2?");
  CHECK(seen_auth == "Bearer sk-test");
}

TEST_CASE("remote retries transient failures with bounded attempts") {
  LocalServer server;
  std::atomic<int> hits{0};
  server.server().Post("/v1/chat/completions",
                       [&](const httplib::Request&, httplib::Response& res) {
                         int n = ++hits;
                         if (n < 3) {
                           res.status = 503;
                           res.set_content("overloaded", "text/plain");
                           return;
                         }
                         nlohmann::json out;
                         out["choices"] = {{{"finish_reason", "stop"},
                                            {"message", {{"content", "recovered"}}}}};
                         res.set_content(out.dump(), "application/json");
                       });
  server.start();

  RemoteBackendConfig config;
  config.base_url = server.url() + "/v1";
  config.model = "m";
  config.retry = fast_retry();
  RemoteBackend backend(config);
  CompletionResult result = backend.complete({"p", 0.0, 0.9, 10, 0});
  CHECK(result.text == "recovered");
  CHECK(hits == 3);

  SUBCASE("retries exhaust into RemoteError") {
    hits = -100;  // stay under the success threshold for all attempts
    try {
      backend.complete({"p", 0.0, 0.9, 10, 0});
      FAIL("expected RemoteError");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::RemoteError);
    }
  }
}

TEST_CASE("non-retryable statuses fail immediately") {
  LocalServer server;
  std::atomic<int> hits{0};
  server.server().Post("/v1/chat/completions",
                       [&](const httplib::Request&, httplib::Response& res) {
                         ++hits;
                         res.status = 404;
                         res.set_content("no such model", "text/plain");
                       });
  server.start();

  RemoteBackendConfig config;
  config.base_url = server.url() + "/v1";
  config.model = "m";
  config.retry = fast_retry();
  RemoteBackend backend(config);
  CHECK_THROWS_AS(backend.complete({"p", 0.0, 0.9, 10, 0}), Error);
  CHECK(hits == 1);
}

TEST_CASE("content filter surfaces as SafetyRefusal and is never retried") {
  LocalServer server;
  std::atomic<int> hits{0};
  server.server().Post("/v1/chat/completions",
                       [&](const httplib::Request&, httplib::Response& res) {
                         ++hits;
                         nlohmann::json out;
                         out["choices"] = {{{"finish_reason", "content_filter"},
                                            {"message", {{"content", ""}}}}};
                         res.set_content(out.dump(), "application/json");
                       });
  server.start();

  RemoteBackendConfig config;
  config.base_url = server.url() + "/v1";
  config.model = "m";
  config.retry = fast_retry();
  RemoteBackend backend(config);
  try {
    backend.complete({"p", 0.0, 0.9, 10, 0});
    FAIL("expected SafetyRefusal");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SafetyRefusal);
  }
  CHECK(hits == 1);
}

TEST_CASE("remote embeddings preserve order") {
  LocalServer server;
  server.server().Post("/v1/embeddings", [&](const httplib::Request& req, httplib::Response& res) {
    nlohmann::json body = nlohmann::json::parse(req.body);
    nlohmann::json data = nlohmann::json::array();
    // return entries deliberately out of order; the client must reorder
    for (std::size_t i = body["input"].size(); i-- > 0;) {
      data.push_back({{"index", i},
                      {"embedding", {static_cast<double>(i) + 1.0, 0.0, 0.0}}});
    }
    res.set_content(nlohmann::json{{"data", data}}.dump(), "application/json");
  });
  server.start();

  RemoteBackendConfig config;
  config.base_url = server.url() + "/v1";
  config.model = "m";
  config.retry = fast_retry();
  RemoteBackend backend(config);
  auto vectors = backend.embed({"first", "second", "third"});
  REQUIRE(vectors.size() == 3);
  CHECK(vectors[0].components[0] == 1.0);
  CHECK(vectors[1].components[0] == 2.0);
  CHECK(vectors[2].components[0] == 3.0);
}

TEST_CASE("remote router returns logits-driven decisions") {
  LocalServer server;
  server.server().Post("/classify", [&](const httplib::Request& req, httplib::Response& res) {
    nlohmann::json body = nlohmann::json::parse(req.body);
    CHECK(body.contains("question"));
    nlohmann::json out;
    out["logits"] = {{"CC", 2.0}, {"CS", 0.0}, {"EL", 0.0}};
    res.set_content(out.dump(), "application/json");
  });
  server.start();

  RemoteRouter router(server.url() + "/classify", Paradigm::CS, fast_retry());
  auto decision = router.classify("Which driver lost?");
  CHECK(decision.chosen == Paradigm::CC);
  CHECK(decision.source == RouterSource::remote);
  REQUIRE(decision.logits.has_value());
  CHECK((*decision.logits)[Paradigm::CC] == 2.0);
}

TEST_CASE("unreachable classifier degrades to the fallback") {
  RemoteRouter router("http://127.0.0.1:1/classify", Paradigm::EL, fast_retry());
  auto decision = router.classify("anything");
  CHECK(decision.chosen == Paradigm::EL);
  CHECK(decision.source == RouterSource::fallback);
  CHECK_FALSE(decision.logits.has_value());
}

TEST_SUITE_END();

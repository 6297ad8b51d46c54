#pragma once

/**
 * Remote HTTP surface: an OpenAI-compatible chat-completions /
 * embeddings client and the remote paradigm-classifier client.
 *
 * Transport failures, 5xx, 429, and 408 are retried with exponential
 * backoff (default 3 attempts, base 500 ms). A content-filter refusal is
 * never retried; it surfaces as SafetyRefusal so the trace engine can
 * drop the sample.
 */

#include "acps/backend.hpp"
#include "acps/core.hpp"
#include "acps/errors.hpp"
#include "acps/router.hpp"

#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <memory>
#include <string>
#include <thread>

namespace acps {

struct RetryPolicy {
  int max_attempts = 3;
  int backoff_base_ms = 500;
};

namespace detail {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path prefix, possibly empty
};

inline SplitUrl split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    fail(ErrorCode::ConfigError, "URL missing scheme: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, ""};
  std::string prefix = url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {url.substr(0, path_start), prefix};
}

inline bool retryable_status(int status) {
  return status >= 500 || status == 429 || status == 408;
}

/// POSTs JSON with bounded retry; returns the parsed body.
inline nlohmann::json post_json(const std::string& base_url, const std::string& path,
                                const nlohmann::json& body, const std::string& api_key,
                                const RetryPolicy& retry, int timeout_sec = 120) {
  SplitUrl url = split_url(base_url);
  std::string payload = body.dump();
  std::string last_error;

  for (int attempt = 1; attempt <= retry.max_attempts; ++attempt) {
    if (attempt > 1) {
      std::this_thread::sleep_for(
          std::chrono::milliseconds(static_cast<long long>(retry.backoff_base_ms) << (attempt - 2)));
    }
    httplib::Client client(url.origin);
    client.set_connection_timeout(timeout_sec, 0);
    client.set_read_timeout(timeout_sec, 0);
    httplib::Headers headers;
    if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);

    std::string full_path = url.prefix + path;
    if (full_path.empty()) full_path = "/";
    auto res = client.Post(full_path, headers, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) {
      try {
        return nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::RemoteError, std::string("unparseable response body: ") + e.what());
      }
    }
    // content filtering is a refusal, not a transport problem
    if (res->status == 400 && res->body.find("content_filter") != std::string::npos)
      fail(ErrorCode::SafetyRefusal, "endpoint declined the request");
    last_error = "status " + std::to_string(res->status) + ": " + res->body;
    if (!retryable_status(res->status)) break;
  }
  fail(ErrorCode::RemoteError, last_error.empty() ? "request failed" : last_error);
}

}  // namespace detail

struct RemoteBackendConfig {
  std::string base_url;             // e.g. https://api.openai.com/v1
  std::string model;
  std::string embedding_base_url;   // defaults to base_url when empty
  std::string embedding_model;     // defaults to model when empty
  std::string api_key;             // usually from ACPS_API_KEY
  RetryPolicy retry;
  int timeout_sec = 120;
};

class RemoteBackend : public Backend {
 public:
  explicit RemoteBackend(RemoteBackendConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty()) fail(ErrorCode::ConfigError, "remote backend needs a base URL");
    if (config_.embedding_base_url.empty()) config_.embedding_base_url = config_.base_url;
    if (config_.embedding_model.empty()) config_.embedding_model = config_.model;
  }

  CompletionResult complete(const CompletionRequest& request) override {
    validate_request(request);
    nlohmann::json body;
    body["model"] = config_.model;
    body["messages"] = nlohmann::json::array({
        nlohmann::json{{"role", "user"}, {"content", request.prompt}},
    });
    body["temperature"] = request.temperature;
    body["top_p"] = request.top_p;
    body["max_tokens"] = request.max_tokens;

    nlohmann::json response = detail::post_json(config_.base_url, "/chat/completions", body,
                                                config_.api_key, config_.retry,
                                                config_.timeout_sec);
    if (!response.contains("choices") || response["choices"].empty())
      fail(ErrorCode::RemoteError, "response has no choices: " + response.dump());
    const auto& choice = response["choices"][0];
    if (choice.contains("finish_reason") && choice["finish_reason"] == "content_filter")
      fail(ErrorCode::SafetyRefusal, "completion stopped by content filter");

    CompletionResult result;
    if (choice.contains("message") && choice["message"].contains("content") &&
        choice["message"]["content"].is_string()) {
      result.text = choice["message"]["content"].get<std::string>();
    }
    if (response.contains("usage")) {
      const auto& usage = response["usage"];
      if (usage.contains("completion_tokens") && usage["completion_tokens"].is_number())
        result.completion_tokens = usage["completion_tokens"].get<long long>();
      if (usage.contains("prompt_tokens") && usage["prompt_tokens"].is_number())
        result.prompt_tokens = usage["prompt_tokens"].get<long long>();
    }
    result.backend_id = id();
    return result;
  }

  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override {
    if (texts.empty()) fail(ErrorCode::EmptyInput, "embed requires at least one text");
    for (const auto& t : texts) {
      if (t.empty()) fail(ErrorCode::EmptyInput, "embed input text is empty");
    }
    nlohmann::json body;
    body["model"] = config_.embedding_model;
    body["input"] = texts;

    nlohmann::json response =
        detail::post_json(config_.embedding_base_url, "/embeddings", body, config_.api_key,
                          config_.retry, config_.timeout_sec);
    if (!response.contains("data") || response["data"].size() != texts.size())
      fail(ErrorCode::RemoteError, "embedding response cardinality mismatch");

    std::vector<EmbeddingVector> out(texts.size());
    for (const auto& item : response["data"]) {
      std::size_t index = item.at("index").get<std::size_t>();
      if (index >= out.size()) fail(ErrorCode::RemoteError, "embedding index out of range");
      out[index].components = item.at("embedding").get<std::vector<double>>();
    }
    std::size_t dim = out[0].dim();
    for (const auto& v : out) {
      if (v.dim() != dim || dim == 0) fail(ErrorCode::RemoteError, "ragged embedding dimensions");
    }
    return out;
  }

  std::string id() const override { return "remote:" + config_.model; }

 private:
  RemoteBackendConfig config_;
};

/**
 * Classifier endpoint client: POST {"question": ...} returns
 * {"logits": {"CC": r, "CS": r, "EL": r}}. Every failure mode degrades to
 * the configured fallback paradigm with source = fallback; classify never
 * throws.
 */
class RemoteRouter : public Router {
 public:
  RemoteRouter(std::string endpoint_url, Paradigm fallback, RetryPolicy retry = {})
      : endpoint_url_(std::move(endpoint_url)), fallback_(fallback), retry_(retry) {}

  ParadigmDecision classify(const std::string& question) override {
    try {
      nlohmann::json body;
      body["question"] = question;
      nlohmann::json response = detail::post_json(endpoint_url_, "", body, "", retry_, 30);
      const auto& logits_json = response.at("logits");
      std::map<Paradigm, double> logits;
      logits[Paradigm::CC] = logits_json.at("CC").get<double>();
      logits[Paradigm::CS] = logits_json.at("CS").get<double>();
      logits[Paradigm::EL] = logits_json.at("EL").get<double>();
      return decision_from_logits(logits, RouterSource::remote);
    } catch (const std::exception&) {
      ParadigmDecision d;
      d.chosen = fallback_;
      d.source = RouterSource::fallback;
      return d;
    }
  }

 private:
  std::string endpoint_url_;
  Paradigm fallback_;
  RetryPolicy retry_;
};

}  // namespace acps

#pragma once

/**
 * Backend gateway: uniform access to a text-completion capability and an
 * embedding capability.
 *
 * Three interchangeable implementations:
 *  - RemoteBackend (remote_backend.hpp): OpenAI-compatible HTTP endpoints.
 *  - ReplayBackend: deterministic fixtures keyed by
 *    (prompt SHA-256, temperature, sample_index). A missing key is fatal:
 *    fixtures never fabricate text.
 *  - MockBackend: scripted, deterministic function of the same key. Used
 *    for fully offline runs and determinism tests.
 *
 * Replay and mock backends perform no I/O after load and are safe for any
 * number of in-flight calls.
 */

#include "acps/core.hpp"
#include "acps/errors.hpp"
#include "acps/sha256.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

namespace acps {

struct CompletionRequest {
  std::string prompt;
  double temperature = 0.0;
  double top_p = 0.9;
  int max_tokens = 500;
  int sample_index = 0;
};

struct CompletionResult {
  std::string text;
  std::optional<long long> completion_tokens;
  std::optional<long long> prompt_tokens;
  std::string backend_id;
};

inline void validate_request(const CompletionRequest& req) {
  if (!(req.temperature >= 0.0 && req.temperature <= 2.0))
    fail(ErrorCode::InvalidRequest, "temperature out of [0, 2]");
  if (!(req.top_p > 0.0 && req.top_p <= 1.0)) fail(ErrorCode::InvalidRequest, "top_p out of (0, 1]");
  if (req.max_tokens <= 0) fail(ErrorCode::InvalidRequest, "max_tokens must be positive");
  if (req.sample_index < 0) fail(ErrorCode::InvalidRequest, "sample_index must be >= 0");
}

class Backend {
 public:
  virtual ~Backend() = default;

  virtual CompletionResult complete(const CompletionRequest& request) = 0;

  /// One vector per input, order-preserving, uniform dimension.
  virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) = 0;

  virtual std::string id() const = 0;
};

// ============================================================================
// Deterministic mock embedder
// ============================================================================

/**
 * Maps text to a fixed-dimension vector through a seeded hash expansion,
 * so identical texts always get identical embeddings and distinct texts
 * get (almost surely) distinct ones.
 */
class MockEmbedder {
 public:
  explicit MockEmbedder(std::size_t dim = 16, std::uint64_t seed = 0)
      : dim_(dim), seed_(seed) {}

  EmbeddingVector embed_one(std::string_view text) const {
    std::uint64_t state = seed_ ^ sha256_prefix64(text);
    EmbeddingVector v;
    v.components.reserve(dim_);
    for (std::size_t i = 0; i < dim_; ++i) {
      double u = static_cast<double>(splitmix64(state) >> 11) * (1.0 / 9007199254740992.0);
      v.components.push_back(2.0 * u - 1.0);
    }
    if (l2_norm(v) == 0.0) v.components[0] = 1.0;
    return v;
  }

  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) const {
    if (texts.empty()) fail(ErrorCode::EmptyInput, "embed requires at least one text");
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
      if (t.empty()) fail(ErrorCode::EmptyInput, "embed input text is empty");
      out.push_back(embed_one(t));
    }
    return out;
  }

  std::size_t dim() const { return dim_; }

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

// ============================================================================
// Mock backend
// ============================================================================

class MockBackend : public Backend {
 public:
  explicit MockBackend(std::uint64_t seed = 0, std::size_t embedding_dim = 16)
      : seed_(seed), embedder_(embedding_dim, seed) {}

  CompletionResult complete(const CompletionRequest& request) override {
    validate_request(request);
    std::string digest = sha256_hex(request.prompt);
    std::uint64_t state = seed_ ^ sha256_prefix64(digest + "|" + format_temperature(request.temperature) +
                                                  "|" + std::to_string(request.sample_index));
    std::uint64_t h1 = splitmix64(state);
    std::uint64_t h2 = splitmix64(state);
    std::uint64_t h3 = splitmix64(state);

    std::ostringstream text;
    text << "<think>\n"
         << "Let's think through this step by step\n"
         << "#cue_" << (h1 % 97) << " → #link_" << (h2 % 89) << " → #answer\n"
         << "</think>\n"
         << "\\boxed{ans_" << (h3 % 8) << "}";

    CompletionResult result;
    result.text = text.str();
    result.completion_tokens = approx_token_count(result.text);
    result.prompt_tokens = approx_token_count(request.prompt);
    result.backend_id = id();
    return result;
  }

  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override {
    return embedder_.embed(texts);
  }

  std::string id() const override { return "mock"; }

  /// Fixture keys quantize temperature to 6 decimals so float round-trips
  /// through JSON can never miss.
  static std::string format_temperature(double temperature) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", temperature);
    return buf;
  }

 private:
  std::uint64_t seed_;
  MockEmbedder embedder_;
};

// ============================================================================
// Replay backend
// ============================================================================

struct ReplayRecord {
  std::string prompt_sha256;
  double temperature = 0.0;
  int sample_index = 0;
  std::string text;
  std::optional<long long> completion_tokens;
  std::optional<long long> prompt_tokens;
};

inline std::string replay_key(std::string_view prompt_sha256, double temperature, int sample_index) {
  std::string key(prompt_sha256);
  key += '|';
  key += MockBackend::format_temperature(temperature);
  key += '|';
  key += std::to_string(sample_index);
  return key;
}

inline nlohmann::json replay_record_to_json(const ReplayRecord& rec) {
  nlohmann::json j;
  j["prompt_sha256"] = rec.prompt_sha256;
  j["temperature"] = rec.temperature;
  j["sample_index"] = rec.sample_index;
  j["text"] = rec.text;
  j["completion_tokens"] = rec.completion_tokens ? nlohmann::json(*rec.completion_tokens)
                                                 : nlohmann::json(nullptr);
  j["prompt_tokens"] =
      rec.prompt_tokens ? nlohmann::json(*rec.prompt_tokens) : nlohmann::json(nullptr);
  return j;
}

inline void write_replay_fixture(const std::string& path, const std::vector<ReplayRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot open fixture for writing: " + path);
  for (const auto& rec : records) out << replay_record_to_json(rec).dump() << '\n';
}

class ReplayBackend : public Backend {
 public:
  ReplayBackend(std::vector<ReplayRecord> records, std::size_t embedding_dim = 16,
                std::uint64_t embedding_seed = 0)
      : embedder_(embedding_dim, embedding_seed) {
    for (std::size_t i = 0; i < records.size(); ++i) insert(records[i], i + 1);
  }

  static ReplayBackend load(const std::string& path, std::size_t embedding_dim = 16,
                            std::uint64_t embedding_seed = 0) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot open fixture: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    std::string raw = buffer.str();

    ReplayBackend backend({}, embedding_dim, embedding_seed);
    backend.fixture_sha256_ = sha256_hex(raw);

    std::istringstream lines(raw);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(lines, line)) {
      ++line_no;
      if (line.empty()) continue;
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::ParseError, path + ":" + std::to_string(line_no) + ": " + e.what());
      }
      ReplayRecord rec;
      try {
        rec.prompt_sha256 = j.at("prompt_sha256").get<std::string>();
        rec.temperature = j.at("temperature").get<double>();
        rec.sample_index = j.at("sample_index").get<int>();
        rec.text = j.at("text").get<std::string>();
        if (j.contains("completion_tokens") && !j["completion_tokens"].is_null())
          rec.completion_tokens = j["completion_tokens"].get<long long>();
        if (j.contains("prompt_tokens") && !j["prompt_tokens"].is_null())
          rec.prompt_tokens = j["prompt_tokens"].get<long long>();
      } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::ParseError, path + ":" + std::to_string(line_no) + ": " + e.what());
      }
      backend.insert(rec, line_no);
    }
    return backend;
  }

  CompletionResult complete(const CompletionRequest& request) override {
    validate_request(request);
    std::string digest = sha256_hex(request.prompt);
    auto it = entries_.find(replay_key(digest, request.temperature, request.sample_index));
    if (it == entries_.end()) {
      fail(ErrorCode::FixtureMiss,
           "no fixture entry for prompt " + digest + " at temperature " +
               MockBackend::format_temperature(request.temperature) + ", sample " +
               std::to_string(request.sample_index));
    }
    CompletionResult result;
    result.text = it->second.text;
    result.completion_tokens = it->second.completion_tokens;
    result.prompt_tokens = it->second.prompt_tokens;
    result.backend_id = id();
    return result;
  }

  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override {
    // No fixture schema exists for embeddings; replay runs use the
    // deterministic mock embedder.
    return embedder_.embed(texts);
  }

  std::string id() const override { return "replay"; }

  std::size_t size() const { return entries_.size(); }
  const std::string& fixture_sha256() const { return fixture_sha256_; }

 private:
  void insert(const ReplayRecord& rec, std::size_t line_no) {
    if (rec.prompt_sha256.size() != 64 ||
        rec.prompt_sha256.find_first_not_of("0123456789abcdef") != std::string::npos) {
      fail(ErrorCode::ParseError,
           "line " + std::to_string(line_no) + ": prompt_sha256 is not 64 lowercase hex chars");
    }
    if (rec.completion_tokens && *rec.completion_tokens < 0)
      fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": negative completion_tokens");
    std::string key = replay_key(rec.prompt_sha256, rec.temperature, rec.sample_index);
    auto [it, inserted] = entries_.emplace(std::move(key), rec);
    if (!inserted) {
      fail(ErrorCode::ParseError,
           "line " + std::to_string(line_no) + ": duplicate fixture key for prompt " +
               rec.prompt_sha256);
    }
  }

  std::unordered_map<std::string, ReplayRecord> entries_;
  MockEmbedder embedder_;
  std::string fixture_sha256_;
};

}  // namespace acps

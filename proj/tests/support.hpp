#pragma once

// Shared test scaffolding: a scripted backend, temp directories, and the
// exhaustive clustering oracle used by both the unit and acceptance suites.

#include "acps/backend.hpp"
#include "acps/core.hpp"

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <unistd.h>
#include <vector>

namespace acps_test {

/// Backend whose behavior the test scripts with lambdas. Defaults: mock
/// embeddings, an echo completion.
class ScriptedBackend : public acps::Backend {
 public:
  std::function<acps::CompletionResult(const acps::CompletionRequest&)> on_complete;
  std::function<std::vector<acps::EmbeddingVector>(const std::vector<std::string>&)> on_embed;
  std::atomic<int> complete_calls{0};
  std::atomic<int> embed_calls{0};

  acps::CompletionResult complete(const acps::CompletionRequest& request) override {
    ++complete_calls;
    if (on_complete) return on_complete(request);
    acps::CompletionResult result;
    result.text = "<think>\necho\n</think>\n\\boxed{echo}";
    result.backend_id = id();
    return result;
  }

  std::vector<acps::EmbeddingVector> embed(const std::vector<std::string>& texts) override {
    ++embed_calls;
    if (on_embed) return on_embed(texts);
    return embedder_.embed(texts);
  }

  std::string id() const override { return "scripted"; }

 private:
  acps::MockEmbedder embedder_{16, 0};
};

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("acps_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::string str(const std::string& name = "") const {
    return name.empty() ? path_.string() : (path_ / name).string();
  }

 private:
  std::filesystem::path path_;
};

/// Minimum within-cluster SSE over every assignment of n points into at
/// most k groups (empty groups contribute nothing), centroids at group
/// means. Exponential; only for desk-scale inputs.
inline double brute_force_sse(const std::vector<acps::EmbeddingVector>& points, std::size_t k) {
  const std::size_t n = points.size();
  const std::size_t dim = points[0].dim();
  std::vector<std::size_t> assignment(n, 0);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    double sse = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      std::vector<double> mean(dim, 0.0);
      std::size_t count = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (assignment[i] != c) continue;
        for (std::size_t d = 0; d < dim; ++d) mean[d] += points[i].components[d];
        ++count;
      }
      if (count == 0) continue;
      for (auto& m : mean) m /= static_cast<double>(count);
      for (std::size_t i = 0; i < n; ++i) {
        if (assignment[i] != c) continue;
        for (std::size_t d = 0; d < dim; ++d) {
          double diff = points[i].components[d] - mean[d];
          sse += diff * diff;
        }
      }
    }
    best = std::min(best, sse);

    std::size_t pos = 0;
    while (pos < n && assignment[pos] == k - 1) assignment[pos++] = 0;
    if (pos == n) break;
    ++assignment[pos];
  }
  return best;
}

/// Normalized copies, matching the kmeans preprocessing.
inline std::vector<acps::EmbeddingVector> normalized_copy(
    const std::vector<acps::EmbeddingVector>& vectors) {
  std::vector<acps::EmbeddingVector> out;
  out.reserve(vectors.size());
  for (const auto& v : vectors) out.push_back(acps::l2_normalized(v));
  return out;
}

}  // namespace acps_test

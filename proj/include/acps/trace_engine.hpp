#pragma once

/**
 * Trace engine: generates the diverse sketch set across the temperature
 * sweep, embeds and clusters it, and produces cluster representatives and
 * weights, the empirical P(r | Q, e) factor.
 *
 * K-means contract: inputs are L2-normalized, initialization is seeded
 * greedy farthest-point selection, Lloyd iterations run until assignments
 * stabilize (cap 100), and empty clusters are repaired by reseeding with
 * the point farthest from its centroid. The whole procedure is
 * deterministic for fixed (inputs, K, seed). Several deterministic
 * restarts with rotated start points are run and the lowest-SSE result
 * kept; when K^n is small enough to enumerate (desk scale), an
 * exhaustive-partition candidate joins the pool, making the result
 * provably optimal there.
 */

#include "acps/backend.hpp"
#include "acps/core.hpp"
#include "acps/errors.hpp"
#include "acps/parallel.hpp"
#include "acps/prompts.hpp"
#include "acps/router.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace acps {

// ============================================================================
// Temperature schedule
// ============================================================================

struct TemperatureSchedule {
  std::vector<double> values;

  /// 0.0 through 2.0 in increments of 0.25: nine sweep points.
  static TemperatureSchedule default_sweep() {
    TemperatureSchedule s;
    for (int i = 0; i <= 8; ++i) s.values.push_back(0.25 * i);
    return s;
  }
};

inline void validate_schedule(const TemperatureSchedule& schedule) {
  if (schedule.values.empty()) fail(ErrorCode::ConfigError, "temperature schedule is empty");
  double prev = -1.0;
  for (double t : schedule.values) {
    if (!(t >= 0.0 && t <= 2.0))
      fail(ErrorCode::ConfigError, "schedule temperature out of [0, 2]");
    if (t <= prev) fail(ErrorCode::ConfigError, "schedule temperatures must be strictly increasing");
    prev = t;
  }
}

// ============================================================================
// Trace generation
// ============================================================================

inline std::optional<std::string> extract_delimited(std::string_view text,
                                                    std::string_view open,
                                                    std::string_view close) {
  std::size_t start = text.find(open);
  if (start == std::string_view::npos) return std::nullopt;
  start += open.size();
  std::size_t end = text.find(close, start);
  if (end == std::string_view::npos) return std::nullopt;
  return std::string(text.substr(start, end - start));
}

inline SketchTrace parse_completion(const CompletionResult& result, double temperature,
                                    int schedule_index) {
  SketchTrace trace;
  trace.text = result.text;
  trace.think_block = extract_delimited(result.text, "<think>", "</think>");
  trace.boxed_answer = extract_boxed(result.text);
  trace.temperature = temperature;
  trace.schedule_index = schedule_index;
  if (result.completion_tokens) {
    trace.completion_tokens = *result.completion_tokens;
    trace.tokens_estimated = false;
  } else {
    trace.completion_tokens = approx_token_count(result.text);
    trace.tokens_estimated = true;
  }
  trace.step_count = trace.think_block ? count_reasoning_steps(*trace.think_block) : 0;
  return trace;
}

struct TraceGenOptions {
  double top_p = 0.9;
  int max_tokens = 500;
  unsigned parallelism = 4;
};

struct TraceGenerationResult {
  std::vector<SketchTrace> traces;  // schedule order; M = traces.size()
  int dropped = 0;                  // refusals + empty completions
};

/**
 * One completion per schedule temperature over the paradigm's sketch
 * prompt. Refused and empty completions are dropped (never retried), so
 * the surviving count M becomes the renormalization denominator
 * downstream. Transport errors propagate; all-dropped is fatal.
 */
inline TraceGenerationResult generate_traces(const Query& query, Paradigm paradigm,
                                             const TemperatureSchedule& schedule,
                                             Backend& backend,
                                             const TraceGenOptions& options = {}) {
  validate_schedule(schedule);
  const std::string prompt = build_sketch_prompt(query, paradigm);
  const std::size_t n = schedule.values.size();

  std::vector<std::optional<SketchTrace>> slots(n);
  parallel_for(n, options.parallelism, [&](std::size_t i) {
    CompletionRequest request;
    request.prompt = prompt;
    request.temperature = schedule.values[i];
    request.top_p = options.top_p;
    request.max_tokens = options.max_tokens;
    request.sample_index = 0;
    CompletionResult result;
    try {
      result = backend.complete(request);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::SafetyRefusal) return;  // drop, do not retry
      throw;
    }
    if (normalize_text(result.text).empty()) return;  // empty completion: drop
    slots[i] = parse_completion(result, schedule.values[i], static_cast<int>(i));
  });

  TraceGenerationResult out;
  for (auto& slot : slots) {
    if (slot) out.traces.push_back(std::move(*slot));
    else ++out.dropped;
  }
  if (out.traces.empty())
    fail(ErrorCode::AllTracesFailed, "all " + std::to_string(n) + " generations were dropped");
  return out;
}

// ============================================================================
// K-means
// ============================================================================

struct KMeansResult {
  std::vector<int> assignments;           // one per input vector
  std::vector<EmbeddingVector> centroids; // k centroids over normalized inputs
  std::vector<double> sse_history;        // per Lloyd iteration, non-increasing
  double sse = 0.0;
  int iterations = 0;
};

namespace detail {

inline double clustering_sse(const std::vector<EmbeddingVector>& points,
                             const std::vector<int>& assignments,
                             const std::vector<EmbeddingVector>& centroids) {
  double sse = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i)
    sse += squared_distance(points[i], centroids[assignments[i]]);
  return sse;
}

inline KMeansResult lloyd_from_start(const std::vector<EmbeddingVector>& points, std::size_t k,
                                     std::size_t start_index) {
  const std::size_t n = points.size();
  const std::size_t dim = points[0].dim();

  // greedy farthest-point initialization
  std::vector<EmbeddingVector> centroids;
  centroids.push_back(points[start_index]);
  std::vector<double> nearest(n);
  while (centroids.size() < k) {
    std::size_t farthest = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      double d = std::numeric_limits<double>::infinity();
      for (const auto& c : centroids) d = std::min(d, squared_distance(points[i], c));
      if (d > best) {
        best = d;
        farthest = i;
      }
    }
    centroids.push_back(points[farthest]);
  }

  KMeansResult result;
  result.assignments.assign(n, -1);
  std::vector<int> previous(n, -1);

  for (int iter = 0; iter < 100; ++iter) {
    // assignment step; ties go to the lowest cluster index
    for (std::size_t i = 0; i < n; ++i) {
      int best_c = 0;
      double best_d = squared_distance(points[i], centroids[0]);
      for (std::size_t c = 1; c < k; ++c) {
        double d = squared_distance(points[i], centroids[c]);
        if (d < best_d) {
          best_d = d;
          best_c = static_cast<int>(c);
        }
      }
      result.assignments[i] = best_c;
    }

    // empty-cluster repair: reseed with the point farthest from its centroid,
    // never stealing the last member of another cluster
    std::vector<std::size_t> sizes(k, 0);
    for (int a : result.assignments) ++sizes[static_cast<std::size_t>(a)];
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] != 0) continue;
      std::size_t victim = n;
      double best = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        auto owner = static_cast<std::size_t>(result.assignments[i]);
        if (sizes[owner] <= 1) continue;
        double d = squared_distance(points[i], centroids[owner]);
        if (d > best) {
          best = d;
          victim = i;
        }
      }
      if (victim == n) continue;  // k <= n guarantees this never triggers
      --sizes[static_cast<std::size_t>(result.assignments[victim])];
      result.assignments[victim] = static_cast<int>(c);
      ++sizes[c];
      centroids[c] = points[victim];
    }

    // update step
    for (std::size_t c = 0; c < k; ++c) {
      EmbeddingVector mean;
      mean.components.assign(dim, 0.0);
      std::size_t count = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (static_cast<std::size_t>(result.assignments[i]) != c) continue;
        for (std::size_t d = 0; d < dim; ++d) mean.components[d] += points[i].components[d];
        ++count;
      }
      for (std::size_t d = 0; d < dim; ++d) mean.components[d] /= static_cast<double>(count);
      centroids[c] = std::move(mean);
    }

    result.sse_history.push_back(clustering_sse(points, result.assignments, centroids));
    result.iterations = iter + 1;
    if (result.assignments == previous) break;
    previous = result.assignments;
  }

  result.centroids = std::move(centroids);
  result.sse = result.sse_history.back();
  return result;
}

/// Builds a result directly from fixed assignments: repairs empty
/// clusters with the standard policy, then computes means and SSE.
inline KMeansResult result_from_assignments(const std::vector<EmbeddingVector>& points,
                                            std::size_t k, std::vector<int> assignments) {
  const std::size_t n = points.size();
  const std::size_t dim = points[0].dim();

  auto compute_centroids = [&](const std::vector<int>& assign) {
    std::vector<EmbeddingVector> centroids(k);
    std::vector<std::size_t> sizes(k, 0);
    for (auto& c : centroids) c.components.assign(dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      auto c = static_cast<std::size_t>(assign[i]);
      for (std::size_t d = 0; d < dim; ++d) centroids[c].components[d] += points[i].components[d];
      ++sizes[c];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] == 0) continue;
      for (std::size_t d = 0; d < dim; ++d)
        centroids[c].components[d] /= static_cast<double>(sizes[c]);
    }
    return std::pair(std::move(centroids), std::move(sizes));
  };

  auto [centroids, sizes] = compute_centroids(assignments);
  for (std::size_t c = 0; c < k; ++c) {
    if (sizes[c] != 0) continue;
    std::size_t victim = n;
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      auto owner = static_cast<std::size_t>(assignments[i]);
      if (sizes[owner] <= 1) continue;
      double d = squared_distance(points[i], centroids[owner]);
      if (d > best) {
        best = d;
        victim = i;
      }
    }
    --sizes[static_cast<std::size_t>(assignments[victim])];
    assignments[victim] = static_cast<int>(c);
    ++sizes[c];
    std::tie(centroids, sizes) = compute_centroids(assignments);
  }

  KMeansResult result;
  result.assignments = std::move(assignments);
  result.centroids = std::move(centroids);
  result.sse = clustering_sse(points, result.assignments, result.centroids);
  result.sse_history = {result.sse};
  result.iterations = 0;
  return result;
}

/// Exhaustively enumerates every assignment of n points into at most k
/// groups when K^n is small; absent otherwise. Empty groups are allowed
/// during the search and repaired afterwards.
inline std::optional<std::vector<int>> exhaustive_optimal_assignments(
    const std::vector<EmbeddingVector>& points, std::size_t k, std::size_t max_states = 20000) {
  const std::size_t n = points.size();
  double states = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    states *= static_cast<double>(k);
    if (states > static_cast<double>(max_states)) return std::nullopt;
  }

  std::vector<int> assignment(n, 0);
  std::vector<int> best_assignment;
  double best_sse = std::numeric_limits<double>::infinity();
  const std::size_t dim = points[0].dim();
  while (true) {
    double sse = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      std::vector<double> mean(dim, 0.0);
      std::size_t count = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (static_cast<std::size_t>(assignment[i]) != c) continue;
        for (std::size_t d = 0; d < dim; ++d) mean[d] += points[i].components[d];
        ++count;
      }
      if (count == 0) continue;
      for (auto& m : mean) m /= static_cast<double>(count);
      for (std::size_t i = 0; i < n; ++i) {
        if (static_cast<std::size_t>(assignment[i]) != c) continue;
        for (std::size_t d = 0; d < dim; ++d) {
          double diff = points[i].components[d] - mean[d];
          sse += diff * diff;
        }
      }
    }
    if (sse < best_sse) {
      best_sse = sse;
      best_assignment = assignment;
    }
    std::size_t pos = 0;
    while (pos < n && assignment[pos] == static_cast<int>(k) - 1) assignment[pos++] = 0;
    if (pos == n) break;
    ++assignment[pos];
  }
  return best_assignment;
}

}  // namespace detail

inline KMeansResult kmeans(const std::vector<EmbeddingVector>& vectors, std::size_t k,
                           std::uint64_t seed) {
  const std::size_t n = vectors.size();
  if (k < 1 || k > n) {
    fail(ErrorCode::KTooLarge,
         "k = " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  }
  const std::size_t dim = vectors[0].dim();
  for (const auto& v : vectors) {
    if (v.dim() != dim) fail(ErrorCode::DimensionMismatch, "embedding dimensions differ");
  }

  std::vector<EmbeddingVector> points;
  points.reserve(n);
  for (const auto& v : vectors) points.push_back(l2_normalized(v));

  const std::size_t restarts = std::min<std::size_t>(n, 10);
  std::optional<KMeansResult> best;
  for (std::size_t r = 0; r < restarts; ++r) {
    std::size_t start = (static_cast<std::size_t>(seed) + r) % n;
    KMeansResult candidate = detail::lloyd_from_start(points, k, start);
    if (!best || candidate.sse < best->sse) best = std::move(candidate);
  }
  if (auto optimal = detail::exhaustive_optimal_assignments(points, k)) {
    KMeansResult candidate = detail::result_from_assignments(points, k, std::move(*optimal));
    if (candidate.sse < best->sse) best = std::move(candidate);
  }
  return *best;
}

/// Per cluster, the member closest (Euclidean, over normalized inputs) to
/// the centroid; ties go to the smallest member index, which equals the
/// smallest schedule index because traces stay in schedule order.
inline std::vector<int> select_representatives(const KMeansResult& clustering,
                                               const std::vector<EmbeddingVector>& vectors) {
  std::vector<EmbeddingVector> points;
  points.reserve(vectors.size());
  for (const auto& v : vectors) points.push_back(l2_normalized(v));

  std::vector<int> reps(clustering.centroids.size(), -1);
  std::vector<double> best(clustering.centroids.size(),
                           std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto c = static_cast<std::size_t>(clustering.assignments[i]);
    double d = squared_distance(points[i], clustering.centroids[c]);
    if (d < best[c]) {
      best[c] = d;
      reps[c] = static_cast<int>(i);
    }
  }
  return reps;
}

inline std::vector<std::size_t> cluster_sizes(const std::vector<int>& assignments, std::size_t k) {
  std::vector<std::size_t> sizes(k, 0);
  for (int a : assignments) ++sizes[static_cast<std::size_t>(a)];
  return sizes;
}

/// weight_k = |C_k| / M.
inline std::vector<double> cluster_weights(const std::vector<std::size_t>& sizes, std::size_t m) {
  std::size_t total = 0;
  for (std::size_t s : sizes) total += s;
  if (total != m) {
    fail(ErrorCode::InconsistentM,
         "cluster sizes sum to " + std::to_string(total) + ", not M = " + std::to_string(m));
  }
  std::vector<double> weights;
  weights.reserve(sizes.size());
  for (std::size_t s : sizes) weights.push_back(static_cast<double>(s) / static_cast<double>(m));
  return weights;
}

// ============================================================================
// Composite clustering
// ============================================================================

struct TraceCluster {
  std::vector<int> members;  // ascending trace indices
  EmbeddingVector centroid;
  int representative = -1;
  double weight = 0.0;
};

struct TraceClustering {
  std::vector<TraceCluster> clusters;
  std::size_t total_traces = 0;
  std::uint64_t seed = 0;
  std::size_t requested_k = 0;
  bool k_clamped = false;  // true when M < requested K forced K down to M
};

inline TraceClustering cluster_traces(const std::vector<EmbeddingVector>& embeddings,
                                      std::size_t k, std::uint64_t seed) {
  TraceClustering out;
  out.total_traces = embeddings.size();
  out.seed = seed;
  out.requested_k = k;
  std::size_t effective_k = k;
  if (effective_k > embeddings.size()) {
    effective_k = embeddings.size();
    out.k_clamped = true;
  }

  KMeansResult km = kmeans(embeddings, effective_k, seed);
  std::vector<int> reps = select_representatives(km, embeddings);
  std::vector<std::size_t> sizes = cluster_sizes(km.assignments, effective_k);
  std::vector<double> weights = cluster_weights(sizes, embeddings.size());

  out.clusters.resize(effective_k);
  for (std::size_t c = 0; c < effective_k; ++c) {
    out.clusters[c].centroid = km.centroids[c];
    out.clusters[c].representative = reps[c];
    out.clusters[c].weight = weights[c];
  }
  for (std::size_t i = 0; i < km.assignments.size(); ++i) {
    out.clusters[static_cast<std::size_t>(km.assignments[i])].members.push_back(
        static_cast<int>(i));
  }
  return out;
}

}  // namespace acps

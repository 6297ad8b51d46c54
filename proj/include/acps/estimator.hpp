#pragma once

/**
 * Causal estimator: samples S answers per cluster prompt, estimates
 * per-cluster answer distributions, and aggregates the final causal
 * effect
 *
 *   score[a] = P(E) * sum_k  weight_k * P(a | r_k, q, e)
 *
 * with weight_k = |C_k| / M and P(a | r_k, q, e) the relative frequency
 * of a among the cluster's parseable samples. The majority-vote baseline
 * over the flat sample pool is computed alongside for comparison.
 */

#include "acps/backend.hpp"
#include "acps/core.hpp"
#include "acps/demo_bank.hpp"
#include "acps/errors.hpp"
#include "acps/parallel.hpp"
#include "acps/trace_engine.hpp"

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace acps {

struct AnswerSample {
  std::string raw_text;
  std::optional<std::string> canonical;  // absent: unparseable, excluded from the denominator
  std::optional<std::string> improved_trace;  // logged, never scored
  int sample_index = 0;
  long long completion_tokens = 0;
  bool tokens_estimated = false;
};

struct ClusterEvidence {
  int cluster_index = 0;
  double weight = 0.0;
  std::vector<AnswerSample> samples;
  std::map<std::string, double> distribution;  // canonical value -> relative frequency
  int unparseable = 0;
};

struct ExternalFactor {
  std::vector<double> per_element;
  double product = 1.0;
};

struct CausalEstimate {
  std::map<std::string, double> scores;  // canonical value -> estimated causal effect
  double external_factor = 1.0;
  std::string chosen;
  TaskKind kind = TaskKind::open;
  std::vector<ClusterEvidence> per_cluster;
};

// ============================================================================
// Sampling
// ============================================================================

struct SampleOptions {
  double top_p = 0.9;
  int max_tokens = 500;
  unsigned parallelism = 4;
};

/**
 * S completions of the intervention prompt at the answer temperature,
 * sample indices 0..S-1. Each is parsed through extract_boxed and
 * canonicalize_answer; samples whose box is missing or unmappable stay in
 * the record with no canonical value and shrink the distribution
 * denominator.
 */
inline std::vector<AnswerSample> sample_answers(const InterventionPrompt& prompt, std::size_t s,
                                                Backend& backend, double answer_temperature,
                                                const Query& query,
                                                const SampleOptions& options = {}) {
  if (s < 1) fail(ErrorCode::InvalidRequest, "S must be at least 1");
  std::vector<AnswerSample> samples(s);
  parallel_for(s, options.parallelism, [&](std::size_t i) {
    CompletionRequest request;
    request.prompt = prompt.text;
    request.temperature = answer_temperature;
    request.top_p = options.top_p;
    request.max_tokens = options.max_tokens;
    request.sample_index = static_cast<int>(i);
    CompletionResult result = backend.complete(request);

    AnswerSample& sample = samples[i];
    sample.sample_index = static_cast<int>(i);
    sample.raw_text = result.text;
    sample.improved_trace = extract_delimited(result.text, "<improved_rs>", "</improved_rs>");
    if (result.completion_tokens) {
      sample.completion_tokens = *result.completion_tokens;
    } else {
      sample.completion_tokens = approx_token_count(result.text);
      sample.tokens_estimated = true;
    }
    if (auto boxed = extract_boxed(result.text)) {
      try {
        sample.canonical =
            canonicalize_answer(*boxed, query.task_kind,
                                query.choices.empty() ? nullptr : &query.choices)
                .value;
      } catch (const Error&) {
        // EmptyAnswer / UnmappableChoice: leave the sample unparseable
      }
    }
  });

  bool any = false;
  for (const auto& sample : samples) any = any || sample.canonical.has_value();
  if (!any)
    fail(ErrorCode::AllSamplesUnparseable,
         "none of the " + std::to_string(s) + " samples produced a usable answer");
  return samples;
}

/// Relative frequency over the parseable samples.
inline std::map<std::string, double> answer_distribution(const std::vector<AnswerSample>& samples) {
  std::map<std::string, long long> counts;
  long long parseable = 0;
  for (const auto& sample : samples) {
    if (!sample.canonical) continue;
    ++counts[*sample.canonical];
    ++parseable;
  }
  if (parseable == 0) fail(ErrorCode::NoParseableSamples, "no parseable samples");
  std::map<std::string, double> dist;
  for (const auto& [value, count] : counts)
    dist[value] = static_cast<double>(count) / static_cast<double>(parseable);
  return dist;
}

// ============================================================================
// External knowledge factor
// ============================================================================

/// P(E) = product of per-element weights. Evidence is held fixed, so the
/// default weight is 1.0 per element and the product degenerates to 1.
inline ExternalFactor external_factor(const Query& query,
                                      const std::optional<std::vector<double>>& weights =
                                          std::nullopt) {
  ExternalFactor factor;
  std::size_t n = query.external_knowledge.size();
  if (weights) {
    if (weights->size() != n) {
      fail(ErrorCode::WeightCountMismatch,
           std::to_string(weights->size()) + " weights for " + std::to_string(n) +
               " evidence items");
    }
    for (double w : *weights) {
      if (!(w > 0.0 && w <= 1.0)) fail(ErrorCode::WeightOutOfRange, "evidence weight outside (0, 1]");
    }
    factor.per_element = *weights;
  } else {
    factor.per_element.assign(n, 1.0);
  }
  factor.product = 1.0;
  for (double w : factor.per_element) factor.product *= w;
  return factor;
}

// ============================================================================
// Aggregation and selection
// ============================================================================

inline CausalEstimate aggregate(const std::vector<double>& weights,
                                const std::vector<std::map<std::string, double>>& distributions,
                                double external_factor_product = 1.0) {
  if (weights.size() != distributions.size()) {
    fail(ErrorCode::LengthMismatch, std::to_string(weights.size()) + " weights vs " +
                                        std::to_string(distributions.size()) + " distributions");
  }
  double total = 0.0;
  for (double w : weights) total += w;
  if (std::abs(total - 1.0) > 1e-9)
    fail(ErrorCode::InvalidWeights, "cluster weights sum to " + std::to_string(total));

  CausalEstimate estimate;
  estimate.external_factor = external_factor_product;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    for (const auto& [value, p] : distributions[k])
      estimate.scores[value] += external_factor_product * weights[k] * p;
  }
  return estimate;
}

inline CausalEstimate aggregate(std::vector<ClusterEvidence> per_cluster,
                                const ExternalFactor& factor, TaskKind kind) {
  std::vector<double> weights;
  std::vector<std::map<std::string, double>> distributions;
  weights.reserve(per_cluster.size());
  distributions.reserve(per_cluster.size());
  for (const auto& cluster : per_cluster) {
    weights.push_back(cluster.weight);
    distributions.push_back(cluster.distribution);
  }
  CausalEstimate estimate = aggregate(weights, distributions, factor.product);
  estimate.kind = kind;
  estimate.per_cluster = std::move(per_cluster);
  return estimate;
}

namespace detail {

inline std::map<std::string, long long> pooled_counts(const std::vector<ClusterEvidence>& clusters) {
  std::map<std::string, long long> counts;
  for (const auto& cluster : clusters) {
    for (const auto& sample : cluster.samples) {
      if (sample.canonical) ++counts[*sample.canonical];
    }
  }
  return counts;
}

}  // namespace detail

/**
 * Argmax over scores. Exact ties break toward the answer with the higher
 * raw sample count across clusters, then the lexicographically smallest
 * canonical value.
 */
inline std::string select_answer(const CausalEstimate& estimate) {
  if (estimate.scores.empty()) fail(ErrorCode::EmptyScores, "no scores to select from");
  std::map<std::string, long long> counts = detail::pooled_counts(estimate.per_cluster);

  const std::string* best = nullptr;
  double best_score = 0.0;
  long long best_count = 0;
  for (const auto& [value, score] : estimate.scores) {
    long long count = 0;
    if (auto it = counts.find(value); it != counts.end()) count = it->second;
    // map iteration is lexicographic, so on full ties the first seen wins
    if (best == nullptr || score > best_score ||
        (score == best_score && count > best_count)) {
      best = &value;
      best_score = score;
      best_count = count;
    }
  }
  return *best;
}

/// Modal canonical answer over a flat sample pool; ties break toward the
/// lexicographically smallest value. This is the self-consistency
/// baseline the causal weighting is compared against.
inline std::string majority_vote(const std::vector<std::string>& pool) {
  if (pool.empty()) fail(ErrorCode::NoParseableSamples, "empty sample pool");
  std::map<std::string, long long> counts;
  for (const auto& value : pool) ++counts[value];
  const std::string* best = nullptr;
  long long best_count = -1;
  for (const auto& [value, count] : counts) {
    if (count > best_count) {
      best = &value;
      best_count = count;
    }
  }
  return *best;
}

inline std::string majority_vote(const std::vector<ClusterEvidence>& clusters) {
  std::vector<std::string> pool;
  for (const auto& cluster : clusters) {
    for (const auto& sample : cluster.samples) {
      if (sample.canonical) pool.push_back(*sample.canonical);
    }
  }
  return majority_vote(pool);
}

}  // namespace acps

#include "acps/estimator.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace acps;

TEST_SUITE_BEGIN("estimator");

namespace {

InterventionPrompt fake_prompt(int cluster_index = 0) {
  InterventionPrompt prompt;
  prompt.text = "prompt for cluster " + std::to_string(cluster_index);
  prompt.cluster_index = cluster_index;
  return prompt;
}

Query mc_query() {
  Query query;
  query.id = "glue";
  query.question = "Where do adults use glue sticks?";
  query.choices = {{"A", "classroom"}, {"B", "desk drawer"}, {"C", "at school"},
                   {"D", "office"},    {"E", "kitchen drawer"}};
  query.task_kind = TaskKind::multiple_choice;
  return query;
}

std::vector<AnswerSample> samples_of(const std::vector<std::string>& canonicals) {
  std::vector<AnswerSample> samples;
  for (std::size_t i = 0; i < canonicals.size(); ++i) {
    AnswerSample sample;
    sample.sample_index = static_cast<int>(i);
    sample.raw_text = "\\boxed{" + canonicals[i] + "}";
    if (!canonicals[i].empty()) sample.canonical = canonicals[i];
    samples.push_back(std::move(sample));
  }
  return samples;
}

ClusterEvidence cluster_of(int index, double weight, const std::vector<std::string>& canonicals) {
  ClusterEvidence cluster;
  cluster.cluster_index = index;
  cluster.weight = weight;
  cluster.samples = samples_of(canonicals);
  for (const auto& sample : cluster.samples) {
    if (!sample.canonical) ++cluster.unparseable;
  }
  cluster.distribution = answer_distribution(cluster.samples);
  return cluster;
}

}  // namespace

// ----------------------------------------------------------------------------
// sample_answers
// ----------------------------------------------------------------------------

TEST_CASE("sample_answers issues S indexed completions and canonicalizes") {
  acps_test::ScriptedBackend backend;
  std::mutex mu;
  std::vector<CompletionRequest> seen;
  backend.on_complete = [&](const CompletionRequest& request) {
    {
      std::lock_guard<std::mutex> lock(mu);
      seen.push_back(request);
    }
    static const char* answers[] = {"D", "D", "office"};
    CompletionResult result;
    result.text = "<improved_rs>\n#glue → #office\n</improved_rs>\n\\boxed{" +
                  std::string(answers[request.sample_index]) + "}";
    return result;
  };

  auto samples = sample_answers(fake_prompt(), 3, backend, 0.7, mc_query());
  REQUIRE(samples.size() == 3);
  CHECK(backend.complete_calls == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(samples[i].sample_index == i);
    REQUIRE(samples[i].canonical.has_value());
    CHECK(*samples[i].canonical == "D");  // "office" maps to choice D
    REQUIRE(samples[i].improved_trace.has_value());
    CHECK(samples[i].improved_trace->find("#glue") != std::string::npos);
  }
  std::set<int> indices;
  for (const auto& request : seen) {
    CHECK(request.temperature == 0.7);
    indices.insert(request.sample_index);
  }
  CHECK(indices == std::set<int>{0, 1, 2});

  SUBCASE("same backend twice gives identical samples") {
    auto again = sample_answers(fake_prompt(), 3, backend, 0.7, mc_query());
    for (int i = 0; i < 3; ++i) {
      CHECK(again[i].raw_text == samples[i].raw_text);
      CHECK(again[i].canonical == samples[i].canonical);
    }
  }
}

TEST_CASE("unparseable samples stay recorded but out of the distribution") {
  acps_test::ScriptedBackend backend;
  backend.on_complete = [&](const CompletionRequest& request) {
    CompletionResult result;
    if (request.sample_index == 1) {
      result.text = "no box at all";  // unparseable
    } else if (request.sample_index == 2) {
      result.text = "\\boxed{garage}";  // unmappable choice
    } else {
      result.text = "\\boxed{D}";
    }
    return result;
  };
  auto samples = sample_answers(fake_prompt(), 3, backend, 0.7, mc_query());
  CHECK(samples[0].canonical == "D");
  CHECK_FALSE(samples[1].canonical.has_value());
  CHECK_FALSE(samples[2].canonical.has_value());
  auto dist = answer_distribution(samples);
  CHECK(dist.size() == 1);
  CHECK(dist["D"] == doctest::Approx(1.0));
}

TEST_CASE("all-unparseable sampling is fatal") {
  acps_test::ScriptedBackend backend;
  backend.on_complete = [](const CompletionRequest&) {
    CompletionResult result;
    result.text = "nothing boxed";
    return result;
  };
  try {
    sample_answers(fake_prompt(), 3, backend, 0.7, mc_query());
    FAIL("expected AllSamplesUnparseable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AllSamplesUnparseable);
  }
}

// ----------------------------------------------------------------------------
// answer_distribution
// ----------------------------------------------------------------------------

TEST_CASE("answer distribution is a relative frequency") {
  auto dist = answer_distribution(samples_of({"D", "D", "C"}));
  CHECK(dist["D"] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(dist["C"] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  auto unanimous = answer_distribution(samples_of({"A", "A", "A"}));
  CHECK(unanimous.size() == 1);
  CHECK(unanimous["A"] == doctest::Approx(1.0));

  auto singleton = answer_distribution(samples_of({"X"}));
  CHECK(singleton["X"] == doctest::Approx(1.0));

  try {
    answer_distribution(samples_of({"", ""}));
    FAIL("expected NoParseableSamples");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoParseableSamples);
  }
}

TEST_CASE("answer distributions always sum to one") {
  std::mt19937_64 rng(88);
  const char* answers[] = {"p", "q", "r", ""};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> pool;
    std::size_t s = 1 + rng() % 8;
    for (std::size_t i = 0; i < s; ++i) pool.push_back(answers[rng() % 4]);
    bool any = false;
    for (const auto& a : pool) any = any || !a.empty();
    if (!any) continue;
    auto dist = answer_distribution(samples_of(pool));
    double sum = 0.0;
    for (const auto& [a, p] : dist) {
      CHECK(p > 0.0);
      sum += p;
    }
    CHECK(std::abs(sum - 1.0) < 1e-12);
  }
}

// ----------------------------------------------------------------------------
// external_factor
// ----------------------------------------------------------------------------

TEST_CASE("external factor products") {
  Query no_evidence;
  no_evidence.id = "q";
  no_evidence.question = "?";
  CHECK(external_factor(no_evidence).product == 1.0);

  Query with_evidence = no_evidence;
  with_evidence.external_knowledge = {"e1", "e2", "e3"};
  auto factor = external_factor(with_evidence);
  CHECK(factor.product == 1.0);
  CHECK(factor.per_element == std::vector<double>{1.0, 1.0, 1.0});

  Query two = no_evidence;
  two.external_knowledge = {"e1", "e2"};
  CHECK(external_factor(two, std::vector<double>{0.5, 0.5}).product == doctest::Approx(0.25));

  try {
    external_factor(two, std::vector<double>{0.5});
    FAIL("expected WeightCountMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::WeightCountMismatch);
  }
  try {
    external_factor(two, std::vector<double>{0.5, 1.5});
    FAIL("expected WeightOutOfRange");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::WeightOutOfRange);
  }
  CHECK_THROWS_AS(external_factor(two, std::vector<double>{0.5, 0.0}), Error);
}

// ----------------------------------------------------------------------------
// aggregate
// ----------------------------------------------------------------------------

TEST_CASE("aggregate reproduces the commonsense case study arithmetic") {
  std::vector<double> weights = {1.0 / 3.0, 1.0 / 3.0, 2.0 / 9.0, 1.0 / 9.0};
  std::vector<std::map<std::string, double>> dists = {
      {{"D", 1.0 / 3.0}, {"B", 1.0 / 3.0}, {"E", 1.0 / 3.0}},
      {{"D", 2.0 / 3.0}, {"E", 1.0 / 3.0}},
      {{"C", 2.0 / 3.0}, {"B", 1.0 / 3.0}},
      {{"A", 1.0}},
  };
  auto estimate = aggregate(weights, dists);
  CHECK(estimate.scores["D"] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(estimate.scores["C"] == doctest::Approx(4.0 / 27.0).epsilon(1e-12));
  CHECK(estimate.scores["A"] == doctest::Approx(1.0 / 9.0).epsilon(1e-12));
  CHECK(estimate.scores["D"] == doctest::Approx(0.3333).epsilon(5e-4));
  CHECK(estimate.scores["C"] == doctest::Approx(0.1481).epsilon(5e-4));
  CHECK(estimate.scores["A"] == doctest::Approx(0.1111).epsilon(5e-4));
  CHECK(select_answer(estimate) == "D");
}

TEST_CASE("aggregate reproduces the multihop case study arithmetic at M = 8") {
  std::vector<double> weights = {0.375, 0.25, 0.25, 0.125};
  std::vector<std::map<std::string, double>> dists = {
      {{"kyle busch", 1.0}},
      {{"carl edwards", 2.0 / 3.0}, {"not mentioned", 1.0 / 3.0}},
      {{"kyle busch", 2.0 / 3.0}, {"not mentioned", 1.0 / 3.0}},
      {{"brad keselowski", 2.0 / 3.0}, {"not mentioned", 1.0 / 3.0}},
  };
  auto estimate = aggregate(weights, dists);
  CHECK(estimate.scores["kyle busch"] == doctest::Approx(0.5417).epsilon(5e-4));
  CHECK(estimate.scores["carl edwards"] == doctest::Approx(0.1667).epsilon(5e-4));
  CHECK(estimate.scores["brad keselowski"] == doctest::Approx(0.0833).epsilon(5e-4));
  CHECK(select_answer(estimate) == "kyle busch");
}

TEST_CASE("aggregate identity and errors") {
  auto estimate = aggregate({1.0}, {{{"x", 1.0}}});
  CHECK(estimate.scores.size() == 1);
  CHECK(estimate.scores["x"] == doctest::Approx(1.0));

  try {
    aggregate({0.5, 0.5}, {{{"x", 1.0}}});
    FAIL("expected LengthMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::LengthMismatch);
  }
  try {
    aggregate({0.5, 0.4}, {{{"x", 1.0}}, {{"y", 1.0}}});
    FAIL("expected InvalidWeights");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidWeights);
  }
}

TEST_CASE("aggregate equals the brute-force loop over samples") {
  std::mt19937_64 rng(2024);
  const char* answers[] = {"a", "b", "c", "d", "e"};
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t k = 1 + rng() % 6;
    std::vector<long long> counts(k);
    std::vector<std::vector<std::string>> cluster_samples(k);
    long long total = 0;
    for (std::size_t c = 0; c < k; ++c) {
      counts[c] = 1 + static_cast<long long>(rng() % 5);
      total += counts[c];
    }
    std::vector<double> weights;
    for (std::size_t c = 0; c < k; ++c)
      weights.push_back(static_cast<double>(counts[c]) / static_cast<double>(total));
    std::vector<std::map<std::string, double>> dists(k);
    for (std::size_t c = 0; c < k; ++c) {
      std::size_t s = 1 + rng() % 6;
      for (std::size_t i = 0; i < s; ++i) cluster_samples[c].push_back(answers[rng() % 5]);
      std::map<std::string, double> dist;
      for (const auto& a : cluster_samples[c]) dist[a] += 1.0 / static_cast<double>(s);
      // recompute exactly as count / s to avoid accumulation order effects
      std::map<std::string, long long> cnt;
      for (const auto& a : cluster_samples[c]) ++cnt[a];
      dist.clear();
      for (const auto& [a, n] : cnt)
        dist[a] = static_cast<double>(n) / static_cast<double>(cluster_samples[c].size());
      dists[c] = std::move(dist);
    }
    double ef = 1.0 - static_cast<double>(rng() % 500) / 1000.0;

    auto estimate = aggregate(weights, dists, ef);

    // independent oracle: iterate every (cluster, sample) pair
    std::map<std::string, double> oracle;
    for (std::size_t c = 0; c < k; ++c) {
      double per_sample = ef * weights[c] / static_cast<double>(cluster_samples[c].size());
      for (const auto& a : cluster_samples[c]) oracle[a] += per_sample;
    }
    REQUIRE(estimate.scores.size() == oracle.size());
    for (const auto& [a, score] : oracle)
      CHECK(std::abs(estimate.scores[a] - score) < 1e-12);

    // normalization: scores sum to the external factor
    double sum = 0.0;
    for (const auto& [a, score] : estimate.scores) sum += score;
    CHECK(std::abs(sum - ef) < 1e-9);
  }
}

TEST_CASE("increasing an answer's count never lowers its score") {
  std::mt19937_64 rng(55);
  const char* answers[] = {"a", "b", "c"};
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t k = 1 + rng() % 4;
    std::vector<double> weights;
    std::vector<long long> counts(k);
    long long total = 0;
    for (std::size_t c = 0; c < k; ++c) {
      counts[c] = 1 + static_cast<long long>(rng() % 4);
      total += counts[c];
    }
    for (std::size_t c = 0; c < k; ++c)
      weights.push_back(static_cast<double>(counts[c]) / static_cast<double>(total));

    std::vector<std::vector<std::string>> samples(k);
    for (std::size_t c = 0; c < k; ++c) {
      std::size_t s = 2 + rng() % 4;
      for (std::size_t i = 0; i < s; ++i) samples[c].push_back(answers[rng() % 3]);
    }
    auto dist_of = [](const std::vector<std::string>& pool) {
      std::map<std::string, long long> cnt;
      for (const auto& a : pool) ++cnt[a];
      std::map<std::string, double> dist;
      for (const auto& [a, n] : cnt)
        dist[a] = static_cast<double>(n) / static_cast<double>(pool.size());
      return dist;
    };

    std::size_t target_cluster = rng() % k;
    auto& pool = samples[target_cluster];
    std::size_t swap_at = rng() % pool.size();
    if (pool[swap_at] == "a") continue;  // need a non-"a" slot to swap in

    std::vector<std::map<std::string, double>> before, after;
    for (std::size_t c = 0; c < k; ++c) before.push_back(dist_of(samples[c]));
    pool[swap_at] = "a";
    for (std::size_t c = 0; c < k; ++c) after.push_back(dist_of(samples[c]));

    auto score_before = aggregate(weights, before).scores;
    auto score_after = aggregate(weights, after).scores;
    CHECK(score_after["a"] >= score_before["a"] - 1e-12);
  }
}

// ----------------------------------------------------------------------------
// select_answer and majority_vote
// ----------------------------------------------------------------------------

TEST_CASE("select_answer argmax and tie rules") {
  CausalEstimate estimate;
  estimate.scores = {{"D", 0.3333}, {"C", 0.1481}, {"A", 0.1111}};
  CHECK(select_answer(estimate) == "D");

  SUBCASE("scaling all scores never changes the winner") {
    CausalEstimate scaled = estimate;
    for (auto& [a, score] : scaled.scores) score *= 2.0;
    CHECK(select_answer(scaled) == "D");
  }
  SUBCASE("exact ties prefer the higher sample count") {
    CausalEstimate tied;
    tied.scores = {{"x", 0.5}, {"y", 0.5}};
    tied.per_cluster.push_back(cluster_of(0, 1.0, {"y", "y", "x"}));
    CHECK(select_answer(tied) == "y");
  }
  SUBCASE("tie with equal counts falls back to the smaller value") {
    CausalEstimate tied;
    tied.scores = {{"x", 0.5}, {"y", 0.5}};
    CHECK(select_answer(tied) == "x");
  }
  SUBCASE("empty scores are an error") {
    try {
      select_answer(CausalEstimate{});
      FAIL("expected EmptyScores");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::EmptyScores);
    }
  }
}

TEST_CASE("majority vote is the mode of the flat pool") {
  CHECK(majority_vote(std::vector<std::string>{"A", "A", "B"}) == "A");
  CHECK(majority_vote(std::vector<std::string>{"solo"}) == "solo");
  CHECK(majority_vote(std::vector<std::string>{"b", "a"}) == "a");  // tie: lexicographic
  try {
    majority_vote(std::vector<std::string>{});
    FAIL("expected NoParseableSamples");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoParseableSamples);
  }
}

TEST_CASE("weighted aggregation can disagree with the majority") {
  // synthetic debias fixture, hand-enumerated: weights [0.9, 0.1],
  // cluster pools [A, A, B] and [B, B, B]; flat pool majority is B (4 of 6)
  // while the causal scores are A = 0.6, B = 0.4.
  std::vector<ClusterEvidence> clusters = {
      cluster_of(0, 0.9, {"A", "A", "B"}),
      cluster_of(1, 0.1, {"B", "B", "B"}),
  };
  auto estimate = aggregate(clusters, ExternalFactor{}, TaskKind::open);
  CHECK(estimate.scores["A"] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(estimate.scores["B"] == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(select_answer(estimate) == "A");
  CHECK(majority_vote(clusters) == "B");
}

TEST_SUITE_END();

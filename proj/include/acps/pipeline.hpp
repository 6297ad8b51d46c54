#pragma once

/**
 * Run orchestration: configuration, backend/router construction, the
 * per-query pipeline (classify -> adjust -> sweep -> embed -> cluster ->
 * intervene -> sample -> aggregate -> select), and run-directory output.
 *
 * A run directory holds manifest.json (config snapshot, seed, backend
 * identity, timestamps; the only place timestamps appear), records.jsonl
 * (one full QueryLog per record, in dataset order), report.json and
 * report.csv. With the mock or replay backend the result files are
 * byte-deterministic for a fixed seed.
 */

#include "acps/backend.hpp"
#include "acps/core.hpp"
#include "acps/demo_bank.hpp"
#include "acps/errors.hpp"
#include "acps/estimator.hpp"
#include "acps/eval.hpp"
#include "acps/parallel.hpp"
#include "acps/remote_backend.hpp"
#include "acps/router.hpp"
#include "acps/trace_engine.hpp"
#include "acps/version.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace acps {

// ============================================================================
// Configuration
// ============================================================================

struct BackendConfig {
  std::string kind = "mock";  // mock | replay | remote
  std::string base_url;
  std::string model;
  std::string embedding_base_url;
  std::string embedding_model;
  std::string fixture_path;
  std::size_t embedding_dim = 16;
};

struct PipelineSettings {
  std::vector<double> temperatures = TemperatureSchedule::default_sweep().values;
  std::size_t k = 4;
  std::size_t s = 3;
  std::size_t l = 2;
  double answer_temperature = 0.7;
  double top_p = 0.9;
  int max_tokens = 500;
  unsigned parallelism = 4;
  std::uint64_t seed = 17;
};

struct RouterSettings {
  std::string kind = "heuristic";  // heuristic | fixed | remote
  Paradigm fallback = Paradigm::CS;
  Paradigm fixed = Paradigm::CS;
  std::string endpoint_url;
  std::string rules_path;  // optional override of the built-in table
};

struct PathsConfig {
  std::string dataset;
  std::string demos;
  std::string distractors;
  std::string out = "run";
};

struct RunConfig {
  BackendConfig backend;
  PipelineSettings pipeline;
  RouterSettings router;
  PathsConfig paths;
};

namespace detail {

inline void check_known_keys(const nlohmann::json& j, const std::vector<std::string>& known,
                             const std::string& section) {
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end())
      fail(ErrorCode::ConfigError, "unknown key '" + key + "' in config section '" + section + "'");
  }
}

}  // namespace detail

inline RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig config;
  detail::check_known_keys(j, {"backend", "pipeline", "router", "paths"}, "<root>");

  if (j.contains("backend")) {
    const auto& b = j["backend"];
    detail::check_known_keys(b,
                             {"kind", "base_url", "model", "embedding_base_url", "embedding_model",
                              "fixture_path", "embedding_dim"},
                             "backend");
    if (b.contains("kind")) config.backend.kind = b["kind"].get<std::string>();
    if (b.contains("base_url")) config.backend.base_url = b["base_url"].get<std::string>();
    if (b.contains("model")) config.backend.model = b["model"].get<std::string>();
    if (b.contains("embedding_base_url"))
      config.backend.embedding_base_url = b["embedding_base_url"].get<std::string>();
    if (b.contains("embedding_model"))
      config.backend.embedding_model = b["embedding_model"].get<std::string>();
    if (b.contains("fixture_path")) config.backend.fixture_path = b["fixture_path"].get<std::string>();
    if (b.contains("embedding_dim")) config.backend.embedding_dim = b["embedding_dim"].get<std::size_t>();
  }
  if (j.contains("pipeline")) {
    const auto& p = j["pipeline"];
    detail::check_known_keys(p,
                             {"temperatures", "k", "s", "l", "answer_temperature", "top_p",
                              "max_tokens", "parallelism", "seed"},
                             "pipeline");
    if (p.contains("temperatures"))
      config.pipeline.temperatures = p["temperatures"].get<std::vector<double>>();
    if (p.contains("k")) config.pipeline.k = p["k"].get<std::size_t>();
    if (p.contains("s")) config.pipeline.s = p["s"].get<std::size_t>();
    if (p.contains("l")) config.pipeline.l = p["l"].get<std::size_t>();
    if (p.contains("answer_temperature"))
      config.pipeline.answer_temperature = p["answer_temperature"].get<double>();
    if (p.contains("top_p")) config.pipeline.top_p = p["top_p"].get<double>();
    if (p.contains("max_tokens")) config.pipeline.max_tokens = p["max_tokens"].get<int>();
    if (p.contains("parallelism")) config.pipeline.parallelism = p["parallelism"].get<unsigned>();
    if (p.contains("seed")) config.pipeline.seed = p["seed"].get<std::uint64_t>();
  }
  if (j.contains("router")) {
    const auto& r = j["router"];
    detail::check_known_keys(r, {"kind", "fallback", "fixed", "endpoint_url", "rules_path"},
                             "router");
    if (r.contains("kind")) config.router.kind = r["kind"].get<std::string>();
    if (r.contains("fallback")) config.router.fallback = parse_paradigm(r["fallback"].get<std::string>());
    if (r.contains("fixed")) config.router.fixed = parse_paradigm(r["fixed"].get<std::string>());
    if (r.contains("endpoint_url")) config.router.endpoint_url = r["endpoint_url"].get<std::string>();
    if (r.contains("rules_path")) config.router.rules_path = r["rules_path"].get<std::string>();
  }
  if (j.contains("paths")) {
    const auto& p = j["paths"];
    detail::check_known_keys(p, {"dataset", "demos", "distractors", "out"}, "paths");
    if (p.contains("dataset")) config.paths.dataset = p["dataset"].get<std::string>();
    if (p.contains("demos")) config.paths.demos = p["demos"].get<std::string>();
    if (p.contains("distractors")) config.paths.distractors = p["distractors"].get<std::string>();
    if (p.contains("out")) config.paths.out = p["out"].get<std::string>();
  }
  return config;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::ConfigError, "cannot open config: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ConfigError, path + ": " + e.what());
  }
  try {
    return config_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ConfigError, path + ": " + e.what());
  }
}

inline nlohmann::json config_to_json(const RunConfig& config) {
  nlohmann::json j;
  j["backend"] = {{"kind", config.backend.kind},
                  {"base_url", config.backend.base_url},
                  {"model", config.backend.model},
                  {"embedding_base_url", config.backend.embedding_base_url},
                  {"embedding_model", config.backend.embedding_model},
                  {"fixture_path", config.backend.fixture_path},
                  {"embedding_dim", config.backend.embedding_dim}};
  j["pipeline"] = {{"temperatures", config.pipeline.temperatures},
                   {"k", config.pipeline.k},
                   {"s", config.pipeline.s},
                   {"l", config.pipeline.l},
                   {"answer_temperature", config.pipeline.answer_temperature},
                   {"top_p", config.pipeline.top_p},
                   {"max_tokens", config.pipeline.max_tokens},
                   {"parallelism", config.pipeline.parallelism},
                   {"seed", config.pipeline.seed}};
  j["router"] = {{"kind", config.router.kind},
                 {"fallback", paradigm_name(config.router.fallback)},
                 {"fixed", paradigm_name(config.router.fixed)},
                 {"endpoint_url", config.router.endpoint_url},
                 {"rules_path", config.router.rules_path}};
  j["paths"] = {{"dataset", config.paths.dataset},
                {"demos", config.paths.demos},
                {"distractors", config.paths.distractors},
                {"out", config.paths.out}};
  return j;
}

inline void validate_config(const RunConfig& config, bool require_paths = true) {
  if (config.pipeline.k < 1) fail(ErrorCode::ConfigError, "k must be >= 1");
  if (config.pipeline.s < 1) fail(ErrorCode::ConfigError, "s must be >= 1");
  if (config.pipeline.l < 1) fail(ErrorCode::ConfigError, "l must be >= 1");
  if (!(config.pipeline.answer_temperature >= 0.0 && config.pipeline.answer_temperature <= 2.0))
    fail(ErrorCode::ConfigError, "answer_temperature out of [0, 2]");
  validate_schedule({config.pipeline.temperatures});

  if (config.backend.kind != "mock" && config.backend.kind != "replay" &&
      config.backend.kind != "remote")
    fail(ErrorCode::ConfigError, "backend.kind must be mock, replay, or remote");
  if (config.backend.kind == "replay") {
    if (config.backend.fixture_path.empty())
      fail(ErrorCode::ConfigError, "replay backend requires backend.fixture_path");
    if (require_paths && !std::filesystem::exists(config.backend.fixture_path))
      fail(ErrorCode::ConfigError, "fixture not found: " + config.backend.fixture_path);
  }
  if (config.backend.kind == "remote" && config.backend.base_url.empty())
    fail(ErrorCode::ConfigError, "remote backend requires backend.base_url");

  if (config.router.kind != "heuristic" && config.router.kind != "fixed" &&
      config.router.kind != "remote")
    fail(ErrorCode::ConfigError, "router.kind must be heuristic, fixed, or remote");
  if (config.router.kind == "remote" && config.router.endpoint_url.empty())
    fail(ErrorCode::ConfigError, "remote router requires router.endpoint_url");

  if (require_paths) {
    if (config.paths.dataset.empty() || !std::filesystem::exists(config.paths.dataset))
      fail(ErrorCode::ConfigError, "dataset not found: " + config.paths.dataset);
    if (config.paths.demos.empty() || !std::filesystem::exists(config.paths.demos))
      fail(ErrorCode::ConfigError, "demonstration bank not found: " + config.paths.demos);
    if (config.paths.out.empty()) fail(ErrorCode::ConfigError, "paths.out is empty");
  }
}

inline std::unique_ptr<Backend> make_backend(const BackendConfig& config, std::uint64_t seed) {
  if (config.kind == "mock") return std::make_unique<MockBackend>(seed, config.embedding_dim);
  if (config.kind == "replay") {
    return std::make_unique<ReplayBackend>(
        ReplayBackend::load(config.fixture_path, config.embedding_dim, seed));
  }
  if (config.kind == "remote") {
    RemoteBackendConfig remote;
    remote.base_url = config.base_url;
    remote.model = config.model;
    remote.embedding_base_url = config.embedding_base_url;
    remote.embedding_model = config.embedding_model;
    if (const char* key = std::getenv("ACPS_API_KEY")) remote.api_key = key;
    return std::make_unique<RemoteBackend>(std::move(remote));
  }
  fail(ErrorCode::ConfigError, "unknown backend kind '" + config.kind + "'");
}

inline std::unique_ptr<Router> make_router(const RouterSettings& settings) {
  if (settings.kind == "fixed") return std::make_unique<FixedRouter>(settings.fixed);
  if (settings.kind == "heuristic") {
    auto rules = settings.rules_path.empty() ? default_heuristic_rules()
                                             : load_heuristic_rules(settings.rules_path);
    return std::make_unique<HeuristicRouter>(std::move(rules), settings.fallback);
  }
  if (settings.kind == "remote")
    return std::make_unique<RemoteRouter>(settings.endpoint_url, settings.fallback);
  fail(ErrorCode::ConfigError, "unknown router kind '" + settings.kind + "'");
}

// ============================================================================
// Per-record pipeline
// ============================================================================

/// Deterministic sub-seed so records are independent of processing order.
inline std::uint64_t record_seed(std::uint64_t run_seed, const std::string& record_id) {
  std::uint64_t state = run_seed ^ sha256_prefix64(record_id);
  return splitmix64(state);
}

inline QueryLog process_record(const DatasetRecord& record, const RunConfig& config,
                               Backend& backend, Router& router, const DemoBank& bank) {
  QueryLog log;
  log.id = record.query.id;
  log.gold = record.gold_answer;
  log.kind = task_kind_name(record.query.task_kind);
  try {
    const Query& query = record.query;
    ParadigmDecision decision = router.classify(query.question);
    log.paradigm = paradigm_name(decision.chosen);
    log.router_source = router_source_name(decision.source);
    AdjustmentKind adjustment = select_adjustment(decision.chosen, query.has_external_knowledge());
    log.adjustment = adjustment_name(adjustment);
    log.adjustment_degraded = adjustment_degraded(decision.chosen, query.has_external_knowledge());

    TraceGenOptions gen_options;
    gen_options.top_p = config.pipeline.top_p;
    gen_options.max_tokens = config.pipeline.max_tokens;
    gen_options.parallelism = config.pipeline.parallelism;
    TemperatureSchedule schedule{config.pipeline.temperatures};
    TraceGenerationResult generated =
        generate_traces(query, decision.chosen, schedule, backend, gen_options);
    log.traces = generated.traces;
    log.dropped_traces = generated.dropped;

    std::vector<std::string> trace_texts;
    trace_texts.reserve(log.traces.size());
    for (const auto& trace : log.traces) trace_texts.push_back(trace.text);
    std::vector<EmbeddingVector> embeddings = backend.embed(trace_texts);

    std::uint64_t seed = record_seed(config.pipeline.seed, query.id);
    TraceClustering clustering = cluster_traces(embeddings, config.pipeline.k, seed);
    log.requested_k = clustering.requested_k;
    log.used_k = clustering.clusters.size();

    SampleOptions sample_options;
    sample_options.top_p = config.pipeline.top_p;
    sample_options.max_tokens = config.pipeline.max_tokens;
    sample_options.parallelism = config.pipeline.parallelism;

    std::vector<ClusterLog> cluster_logs(clustering.clusters.size());
    parallel_for(clustering.clusters.size(), config.pipeline.parallelism, [&](std::size_t c) {
      const TraceCluster& cluster = clustering.clusters[c];
      const SketchTrace& representative = log.traces[static_cast<std::size_t>(cluster.representative)];
      std::vector<std::size_t> ranked =
          rank_demos(bank, embeddings[static_cast<std::size_t>(cluster.representative)]);
      InterventionPrompt prompt =
          build_intervention_prompt(bank, ranked, config.pipeline.l, query, representative.text,
                                    parse_paradigm(log.paradigm), static_cast<int>(c));
      std::vector<AnswerSample> samples =
          sample_answers(prompt, config.pipeline.s, backend, config.pipeline.answer_temperature,
                         query, sample_options);

      ClusterLog& entry = cluster_logs[c];
      entry.evidence.cluster_index = static_cast<int>(c);
      entry.evidence.weight = cluster.weight;
      entry.evidence.samples = std::move(samples);
      for (const auto& sample : entry.evidence.samples) {
        if (!sample.canonical) ++entry.evidence.unparseable;
      }
      entry.evidence.distribution = answer_distribution(entry.evidence.samples);
      entry.members = cluster.members;
      entry.representative = cluster.representative;
      entry.demo_ids = prompt.demo_ids;
    });
    log.clusters = std::move(cluster_logs);

    ExternalFactor factor = external_factor(query);
    log.external_per_element = factor.per_element;
    log.external_product = factor.product;

    std::vector<ClusterEvidence> evidence;
    evidence.reserve(log.clusters.size());
    for (const auto& entry : log.clusters) evidence.push_back(entry.evidence);
    CausalEstimate estimate = aggregate(std::move(evidence), factor, query.task_kind);
    estimate.chosen = select_answer(estimate);
    log.scores = estimate.scores;
    log.chosen = estimate.chosen;
    log.majority = majority_vote(estimate.per_cluster);

    const ChoiceMap* choices = query.choices.empty() ? nullptr : &query.choices;
    CanonicalAnswer pred{log.chosen, query.task_kind};
    log.em = exact_match(pred, record.gold_answer, query.task_kind, choices);
    log.f1 = token_f1(log.chosen,
                      canonicalize_answer(record.gold_answer, query.task_kind, choices).value);

    log.total_tokens = 0;
    for (const auto& trace : log.traces) log.total_tokens += trace.completion_tokens;
    for (const auto& cluster : log.clusters) {
      for (const auto& sample : cluster.evidence.samples)
        log.total_tokens += sample.completion_tokens;
    }
  } catch (const std::exception& e) {
    log.failed = true;
    log.error = e.what();
  }
  return log;
}

inline RecordRow row_from_log(const QueryLog& log) {
  RecordRow row;
  row.id = log.id;
  row.gold = log.gold;
  row.failed = log.failed;
  row.error = log.error;
  if (!log.failed) {
    row.pred = log.chosen;
    row.em = log.em;
    row.f1 = log.f1;
    row.tokens = log.total_tokens;
    if (!log.traces.empty()) {
      long long steps = 0;
      for (const auto& trace : log.traces) steps += trace.step_count;
      row.steps = static_cast<double>(steps) / static_cast<double>(log.traces.size());
    }
  }
  return row;
}

// ============================================================================
// Run directory
// ============================================================================

struct RunOverrides {
  std::optional<unsigned> jobs;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> dataset;
};

struct RunResult {
  RunReport report;
  std::vector<QueryLog> logs;
  std::size_t failed = 0;
  std::string run_dir;
};

namespace detail {

inline std::string iso_timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path);
  out << content;
}

}  // namespace detail

inline RunResult run_pipeline(RunConfig config, const RunOverrides& overrides = {},
                              unsigned jobs = 1) {
  if (overrides.out) config.paths.out = *overrides.out;
  if (overrides.seed) config.pipeline.seed = *overrides.seed;
  if (overrides.dataset) config.paths.dataset = *overrides.dataset;
  if (overrides.jobs) jobs = *overrides.jobs;
  validate_config(config);

  std::vector<DatasetRecord> records = load_dataset(config.paths.dataset);
  std::unique_ptr<Backend> backend = make_backend(config.backend, config.pipeline.seed);
  std::unique_ptr<Router> router = make_router(config.router);
  DemoBank bank = DemoBank::load(config.paths.demos, *backend);
  if (bank.size() < config.pipeline.l) {
    fail(ErrorCode::ConfigError, "demonstration bank holds " + std::to_string(bank.size()) +
                                     " demos but l = " + std::to_string(config.pipeline.l));
  }

  std::filesystem::create_directories(config.paths.out);
  std::string run_dir = config.paths.out;

  nlohmann::json manifest;
  manifest["artifact_version"] = ACPS_VERSION_STRING;
  manifest["started_at"] = detail::iso_timestamp();
  manifest["finished_at"] = nullptr;
  manifest["config"] = config_to_json(config);
  manifest["seed"] = config.pipeline.seed;
  manifest["backend_id"] = backend->id();
  if (auto* replay = dynamic_cast<ReplayBackend*>(backend.get()))
    manifest["fixture_sha256"] = replay->fixture_sha256();
  else
    manifest["fixture_sha256"] = nullptr;
  manifest["dataset"] = config.paths.dataset;
  manifest["record_count"] = records.size();
  // manifest lands before any result file
  detail::write_text_file(run_dir + "/manifest.json", manifest.dump(2) + "\n");

  RunResult result;
  result.run_dir = run_dir;
  result.logs.resize(records.size());
  parallel_for(records.size(), jobs, [&](std::size_t i) {
    result.logs[i] = process_record(records[i], config, *backend, *router, bank);
  });

  {
    std::ofstream out(run_dir + "/records.jsonl", std::ios::binary);
    if (!out) fail(ErrorCode::IoError, "cannot write " + run_dir + "/records.jsonl");
    for (const auto& log : result.logs) out << query_log_to_json(log).dump() << '\n';
  }

  for (const auto& log : result.logs) {
    result.report.rows.push_back(row_from_log(log));
    if (log.failed) ++result.failed;
  }
  result.report.aggregates = compute_aggregates(result.report.rows, result.logs);
  if (result.failed < result.logs.size()) {
    result.report.efficiency = efficiency_report(result.logs);
  }
  result.report.config_snapshot = config_to_json(config);
  result.report.seed = config.pipeline.seed;
  write_report(result.report, result.logs, run_dir);

  manifest["finished_at"] = detail::iso_timestamp();
  detail::write_text_file(run_dir + "/manifest.json", manifest.dump(2) + "\n");
  return result;
}

/// Rebuilds report.json / report.csv from an existing run directory's
/// records.jsonl and manifest.
inline RunReport reaggregate_run_dir(const std::string& run_dir) {
  std::ifstream in(run_dir + "/records.jsonl", std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + run_dir + "/records.jsonl");
  std::vector<QueryLog> logs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      logs.push_back(query_log_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::ParseError, run_dir + "/records.jsonl:" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (logs.empty()) fail(ErrorCode::EmptyLog, "run directory has no records");

  RunReport report;
  std::size_t failed = 0;
  for (const auto& log : logs) {
    report.rows.push_back(row_from_log(log));
    if (log.failed) ++failed;
  }
  report.aggregates = compute_aggregates(report.rows, logs);
  if (failed < logs.size()) report.efficiency = efficiency_report(logs);

  std::ifstream manifest_in(run_dir + "/manifest.json", std::ios::binary);
  if (manifest_in) {
    try {
      nlohmann::json manifest = nlohmann::json::parse(manifest_in);
      report.config_snapshot = manifest.value("config", nlohmann::json::object());
      report.seed = manifest.value("seed", std::uint64_t{0});
    } catch (const nlohmann::json::exception&) {
      report.config_snapshot = nlohmann::json::object();
    }
  }
  write_report(report, logs, run_dir);
  return report;
}

// ============================================================================
// Offline evaluation of a predictions file
// ============================================================================

/// Predictions file: JSON Lines of {"id": ..., "prediction": ...}.
inline RunReport evaluate_predictions(const std::string& pred_path, const std::string& gold_path) {
  std::vector<DatasetRecord> gold = load_dataset(gold_path);

  std::ifstream in(pred_path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open predictions: " + pred_path);
  std::map<std::string, std::string> predictions;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      nlohmann::json j = nlohmann::json::parse(line);
      std::string id = j.at("id").get<std::string>();
      if (!predictions.emplace(id, j.at("prediction").get<std::string>()).second)
        fail(ErrorCode::ParseError, pred_path + ":" + std::to_string(line_no) +
                                        ": duplicate prediction for id '" + id + "'");
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::ParseError, pred_path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }

  RunReport report;
  for (const auto& record : gold) {
    RecordRow row;
    row.id = record.query.id;
    row.gold = record.gold_answer;
    auto it = predictions.find(record.query.id);
    if (it == predictions.end()) {
      row.failed = true;
      row.error = "missing prediction";
    } else {
      const ChoiceMap* choices = record.query.choices.empty() ? nullptr : &record.query.choices;
      try {
        CanonicalAnswer pred = canonicalize_answer(it->second, record.query.task_kind, choices);
        row.pred = pred.value;
        row.em = exact_match(pred, record.gold_answer, record.query.task_kind, choices);
        row.f1 = token_f1(pred.value,
                          canonicalize_answer(record.gold_answer, record.query.task_kind, choices)
                              .value);
      } catch (const Error& e) {
        row.failed = true;
        row.error = e.what();
      }
    }
    report.rows.push_back(std::move(row));
  }
  report.aggregates = compute_aggregates(report.rows, {});
  report.config_snapshot = nlohmann::json::object();
  return report;
}

}  // namespace acps

#pragma once

/**
 * Evaluation harness: dataset ingestion, accuracy / exact match / token
 * F1, seeded robustness perturbations, efficiency accounting over run
 * logs, and report emission (report.json + report.csv).
 *
 * Aggregates are recomputed from per-record rows before every write and
 * the write refuses on mismatch, so emitted tables are self-consistent.
 */

#include "acps/core.hpp"
#include "acps/errors.hpp"
#include "acps/estimator.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace acps {

// ============================================================================
// Dataset
// ============================================================================

struct DatasetRecord {
  Query query;
  std::string gold_answer;
};

inline std::vector<DatasetRecord> load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open dataset: " + path);

  std::vector<DatasetRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::ParseError, path + ":" + std::to_string(line_no) + ": " + e.what());
    }

    auto where = [&](const std::string& what) {
      return path + ":" + std::to_string(line_no) + ": " + what;
    };
    DatasetRecord record;
    if (!j.contains("id") || !j["id"].is_string() || j["id"].get<std::string>().empty())
      fail(ErrorCode::SchemaViolation, where("missing or empty 'id'"));
    if (!j.contains("question") || !j["question"].is_string() ||
        j["question"].get<std::string>().empty())
      fail(ErrorCode::SchemaViolation, where("missing or empty 'question'"));
    if (!j.contains("answer") || !j["answer"].is_string() || j["answer"].get<std::string>().empty())
      fail(ErrorCode::SchemaViolation, where("missing or empty 'answer'"));
    if (!j.contains("task_kind") || !j["task_kind"].is_string())
      fail(ErrorCode::SchemaViolation, where("missing 'task_kind'"));

    record.query.id = j["id"].get<std::string>();
    record.query.question = j["question"].get<std::string>();
    record.gold_answer = j["answer"].get<std::string>();
    try {
      record.query.task_kind = parse_task_kind(j["task_kind"].get<std::string>());
    } catch (const Error& e) {
      fail(ErrorCode::SchemaViolation, where(e.what()));
    }

    if (j.contains("evidence") && !j["evidence"].is_null()) {
      if (!j["evidence"].is_array()) fail(ErrorCode::SchemaViolation, where("'evidence' must be an array"));
      for (const auto& e : j["evidence"]) {
        std::string item = e.get<std::string>();
        if (item.empty()) fail(ErrorCode::SchemaViolation, where("evidence item is empty"));
        record.query.external_knowledge.push_back(std::move(item));
      }
    }
    if (j.contains("choices") && !j["choices"].is_null()) {
      if (!j["choices"].is_object()) fail(ErrorCode::SchemaViolation, where("'choices' must be an object"));
      for (const auto& [letter, text] : j["choices"].items())
        record.query.choices[letter] = text.get<std::string>();
    }

    bool is_mc = record.query.task_kind == TaskKind::multiple_choice;
    if (is_mc && record.query.choices.empty())
      fail(ErrorCode::SchemaViolation, where("multiple_choice record without 'choices'"));
    if (!is_mc && !record.query.choices.empty())
      fail(ErrorCode::SchemaViolation, where("'choices' present on a non-multiple_choice record"));

    records.push_back(std::move(record));
  }
  if (records.empty())
    std::cerr << "warning: dataset " << path << " contains no records\n";
  return records;
}

inline nlohmann::json dataset_record_to_json(const DatasetRecord& record) {
  nlohmann::json j;
  j["id"] = record.query.id;
  j["question"] = record.query.question;
  j["answer"] = record.gold_answer;
  j["task_kind"] = task_kind_name(record.query.task_kind);
  if (!record.query.external_knowledge.empty()) j["evidence"] = record.query.external_knowledge;
  if (!record.query.choices.empty()) {
    nlohmann::json choices = nlohmann::json::object();
    for (const auto& [letter, text] : record.query.choices) choices[letter] = text;
    j["choices"] = choices;
  }
  return j;
}

// ============================================================================
// Metrics
// ============================================================================

inline int exact_match(const CanonicalAnswer& pred, std::string_view gold, TaskKind kind,
                       const ChoiceMap* choices = nullptr) {
  if (gold.empty()) fail(ErrorCode::EmptyAnswer, "gold answer is empty");
  return canonicalize_answer(gold, kind, choices).value == pred.value ? 1 : 0;
}

/// SQuAD-style token F1: whitespace tokens after canonicalization,
/// multiset overlap, harmonic mean of precision and recall.
inline double token_f1(std::string_view pred_canonical, std::string_view gold_canonical) {
  auto tokenize = [](std::string_view text) {
    std::map<std::string, long long> counts;
    long long total = 0;
    std::size_t i = 0;
    while (i < text.size()) {
      while (i < text.size() && text[i] == ' ') ++i;
      std::size_t start = i;
      while (i < text.size() && text[i] != ' ') ++i;
      if (i > start) {
        ++counts[std::string(text.substr(start, i - start))];
        ++total;
      }
    }
    return std::pair(counts, total);
  };
  auto [pred_counts, pred_total] = tokenize(pred_canonical);
  auto [gold_counts, gold_total] = tokenize(gold_canonical);
  if (pred_total == 0 || gold_total == 0) return 0.0;

  long long overlap = 0;
  for (const auto& [token, count] : pred_counts) {
    auto it = gold_counts.find(token);
    if (it != gold_counts.end()) overlap += std::min(count, it->second);
  }
  if (overlap == 0) return 0.0;
  double precision = static_cast<double>(overlap) / static_cast<double>(pred_total);
  double recall = static_cast<double>(overlap) / static_cast<double>(gold_total);
  return 2.0 * precision * recall / (precision + recall);
}

inline double accuracy(const std::vector<int>& exact_matches) {
  if (exact_matches.empty()) fail(ErrorCode::EmptyResults, "accuracy over zero results");
  long long sum = 0;
  for (int em : exact_matches) sum += em;
  return static_cast<double>(sum) / static_cast<double>(exact_matches.size());
}

// ============================================================================
// Perturbations
// ============================================================================

/// Replaces one seeded evidence item with one seeded pool distractor;
/// evidence count and every other field stay untouched.
inline DatasetRecord perturb_inject(const DatasetRecord& record,
                                    const std::vector<std::string>& distractor_pool,
                                    std::uint64_t seed) {
  if (record.query.external_knowledge.empty())
    fail(ErrorCode::NoEvidence, "record '" + record.query.id + "' has no evidence to perturb");
  if (distractor_pool.empty()) fail(ErrorCode::EmptyPool, "distractor pool is empty");
  for (const auto& distractor : distractor_pool) {
    for (const auto& item : record.query.external_knowledge) {
      if (distractor == item)
        fail(ErrorCode::DisjointnessViolation,
             "distractor pool overlaps the record's evidence: '" + distractor + "'");
    }
  }
  DatasetRecord out = record;
  std::uint64_t state = seed;
  std::size_t evidence_index = splitmix64(state) % out.query.external_knowledge.size();
  std::size_t pool_index = splitmix64(state) % distractor_pool.size();
  out.query.external_knowledge[evidence_index] = distractor_pool[pool_index];
  return out;
}

/// Seeded Fisher-Yates permutation of the evidence list.
inline DatasetRecord perturb_shuffle(const DatasetRecord& record, std::uint64_t seed) {
  if (record.query.external_knowledge.empty())
    fail(ErrorCode::NoEvidence, "record '" + record.query.id + "' has no evidence to shuffle");
  DatasetRecord out = record;
  std::uint64_t state = seed;
  auto& items = out.query.external_knowledge;
  for (std::size_t i = items.size(); i-- > 1;) {
    std::size_t j = splitmix64(state) % (i + 1);
    std::swap(items[i], items[j]);
  }
  return out;
}

inline std::vector<std::string> load_distractors(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open distractor pool: " + path);
  std::vector<std::string> pool;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) pool.push_back(line);
  }
  return pool;
}

// ============================================================================
// Run log
// ============================================================================

struct ClusterLog {
  ClusterEvidence evidence;
  std::vector<int> members;
  int representative = -1;
  std::vector<std::string> demo_ids;
};

struct QueryLog {
  std::string id;
  bool failed = false;
  std::string error;
  std::string kind;
  std::string paradigm;
  std::string router_source;
  std::string adjustment;
  bool adjustment_degraded = false;
  int dropped_traces = 0;
  std::size_t requested_k = 0;
  std::size_t used_k = 0;
  std::vector<SketchTrace> traces;
  std::vector<ClusterLog> clusters;
  std::vector<double> external_per_element;
  double external_product = 1.0;
  std::map<std::string, double> scores;
  std::string chosen;
  std::string majority;
  std::string gold;
  int em = 0;
  double f1 = 0.0;
  long long total_tokens = 0;
};

namespace detail {

inline nlohmann::json opt_to_json(const std::optional<std::string>& value) {
  return value ? nlohmann::json(*value) : nlohmann::json(nullptr);
}

inline std::optional<std::string> opt_from_json(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<std::string>();
}

}  // namespace detail

inline nlohmann::json trace_to_json(const SketchTrace& trace) {
  nlohmann::json j;
  j["text"] = trace.text;
  j["think_block"] = detail::opt_to_json(trace.think_block);
  j["boxed_answer"] = detail::opt_to_json(trace.boxed_answer);
  j["temperature"] = trace.temperature;
  j["schedule_index"] = trace.schedule_index;
  j["completion_tokens"] = trace.completion_tokens;
  j["tokens_estimated"] = trace.tokens_estimated;
  j["step_count"] = trace.step_count;
  return j;
}

inline SketchTrace trace_from_json(const nlohmann::json& j) {
  SketchTrace trace;
  trace.text = j.at("text").get<std::string>();
  trace.think_block = detail::opt_from_json(j.at("think_block"));
  trace.boxed_answer = detail::opt_from_json(j.at("boxed_answer"));
  trace.temperature = j.at("temperature").get<double>();
  trace.schedule_index = j.at("schedule_index").get<int>();
  trace.completion_tokens = j.at("completion_tokens").get<long long>();
  trace.tokens_estimated = j.at("tokens_estimated").get<bool>();
  trace.step_count = j.at("step_count").get<int>();
  return trace;
}

inline nlohmann::json cluster_log_to_json(const ClusterLog& log) {
  nlohmann::json j;
  j["cluster_index"] = log.evidence.cluster_index;
  j["weight"] = log.evidence.weight;
  j["members"] = log.members;
  j["representative"] = log.representative;
  j["demo_ids"] = log.demo_ids;
  j["unparseable"] = log.evidence.unparseable;
  j["distribution"] = log.evidence.distribution;
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& sample : log.evidence.samples) {
    nlohmann::json s;
    s["sample_index"] = sample.sample_index;
    s["raw_text"] = sample.raw_text;
    s["canonical"] = detail::opt_to_json(sample.canonical);
    s["improved_trace"] = detail::opt_to_json(sample.improved_trace);
    s["completion_tokens"] = sample.completion_tokens;
    s["tokens_estimated"] = sample.tokens_estimated;
    samples.push_back(std::move(s));
  }
  j["samples"] = std::move(samples);
  return j;
}

inline ClusterLog cluster_log_from_json(const nlohmann::json& j) {
  ClusterLog log;
  log.evidence.cluster_index = j.at("cluster_index").get<int>();
  log.evidence.weight = j.at("weight").get<double>();
  log.members = j.at("members").get<std::vector<int>>();
  log.representative = j.at("representative").get<int>();
  log.demo_ids = j.at("demo_ids").get<std::vector<std::string>>();
  log.evidence.unparseable = j.at("unparseable").get<int>();
  log.evidence.distribution = j.at("distribution").get<std::map<std::string, double>>();
  for (const auto& s : j.at("samples")) {
    AnswerSample sample;
    sample.sample_index = s.at("sample_index").get<int>();
    sample.raw_text = s.at("raw_text").get<std::string>();
    sample.canonical = detail::opt_from_json(s.at("canonical"));
    sample.improved_trace = detail::opt_from_json(s.at("improved_trace"));
    sample.completion_tokens = s.at("completion_tokens").get<long long>();
    sample.tokens_estimated = s.at("tokens_estimated").get<bool>();
    log.evidence.samples.push_back(std::move(sample));
  }
  return log;
}

inline nlohmann::json query_log_to_json(const QueryLog& log) {
  nlohmann::json j;
  j["id"] = log.id;
  j["failed"] = log.failed;
  j["error"] = log.error;
  j["kind"] = log.kind;
  j["paradigm"] = log.paradigm;
  j["router_source"] = log.router_source;
  j["adjustment"] = log.adjustment;
  j["adjustment_degraded"] = log.adjustment_degraded;
  j["dropped_traces"] = log.dropped_traces;
  j["requested_k"] = log.requested_k;
  j["used_k"] = log.used_k;
  nlohmann::json traces = nlohmann::json::array();
  for (const auto& trace : log.traces) traces.push_back(trace_to_json(trace));
  j["traces"] = std::move(traces);
  nlohmann::json clusters = nlohmann::json::array();
  for (const auto& cluster : log.clusters) clusters.push_back(cluster_log_to_json(cluster));
  j["clusters"] = std::move(clusters);
  j["external_per_element"] = log.external_per_element;
  j["external_product"] = log.external_product;
  j["scores"] = log.scores;
  j["chosen"] = log.chosen;
  j["majority"] = log.majority;
  j["gold"] = log.gold;
  j["em"] = log.em;
  j["f1"] = log.f1;
  j["total_tokens"] = log.total_tokens;
  return j;
}

inline QueryLog query_log_from_json(const nlohmann::json& j) {
  QueryLog log;
  log.id = j.at("id").get<std::string>();
  log.failed = j.at("failed").get<bool>();
  log.error = j.at("error").get<std::string>();
  log.kind = j.at("kind").get<std::string>();
  log.paradigm = j.at("paradigm").get<std::string>();
  log.router_source = j.at("router_source").get<std::string>();
  log.adjustment = j.at("adjustment").get<std::string>();
  log.adjustment_degraded = j.at("adjustment_degraded").get<bool>();
  log.dropped_traces = j.at("dropped_traces").get<int>();
  log.requested_k = j.at("requested_k").get<std::size_t>();
  log.used_k = j.at("used_k").get<std::size_t>();
  for (const auto& t : j.at("traces")) log.traces.push_back(trace_from_json(t));
  for (const auto& c : j.at("clusters")) log.clusters.push_back(cluster_log_from_json(c));
  log.external_per_element = j.at("external_per_element").get<std::vector<double>>();
  log.external_product = j.at("external_product").get<double>();
  log.scores = j.at("scores").get<std::map<std::string, double>>();
  log.chosen = j.at("chosen").get<std::string>();
  log.majority = j.at("majority").get<std::string>();
  log.gold = j.at("gold").get<std::string>();
  log.em = j.at("em").get<int>();
  log.f1 = j.at("f1").get<double>();
  log.total_tokens = j.at("total_tokens").get<long long>();
  return log;
}

// ============================================================================
// Efficiency accounting
// ============================================================================

struct PhaseUsage {
  long long completions = 0;
  long long total_tokens = 0;
  long long reported = 0;   // completions whose usage came from the backend
  long long estimated = 0;  // completions counted by the whitespace fallback
};

struct EfficiencyReport {
  double avg_tokens = 0.0;  // mean completion tokens over every completion, both phases
  double avg_steps = 0.0;   // mean step count over every surviving trace
  long long trace_count = 0;
  long long total_steps = 0;
  PhaseUsage trace_phase;
  PhaseUsage answer_phase;
};

inline EfficiencyReport efficiency_report(const std::vector<QueryLog>& logs) {
  if (logs.empty()) fail(ErrorCode::EmptyLog, "efficiency report over an empty run log");
  EfficiencyReport report;
  for (const auto& log : logs) {
    if (log.failed) continue;
    for (const auto& trace : log.traces) {
      ++report.trace_phase.completions;
      report.trace_phase.total_tokens += trace.completion_tokens;
      if (trace.tokens_estimated) ++report.trace_phase.estimated;
      else ++report.trace_phase.reported;
      ++report.trace_count;
      report.total_steps += trace.step_count;
    }
    for (const auto& cluster : log.clusters) {
      for (const auto& sample : cluster.evidence.samples) {
        ++report.answer_phase.completions;
        report.answer_phase.total_tokens += sample.completion_tokens;
        if (sample.tokens_estimated) ++report.answer_phase.estimated;
        else ++report.answer_phase.reported;
      }
    }
  }
  long long completions = report.trace_phase.completions + report.answer_phase.completions;
  if (completions == 0) fail(ErrorCode::EmptyLog, "run log contains no completions");
  report.avg_tokens =
      static_cast<double>(report.trace_phase.total_tokens + report.answer_phase.total_tokens) /
      static_cast<double>(completions);
  report.avg_steps = report.trace_count == 0
                         ? 0.0
                         : static_cast<double>(report.total_steps) /
                               static_cast<double>(report.trace_count);
  return report;
}

inline nlohmann::json phase_usage_to_json(const PhaseUsage& usage) {
  nlohmann::json j;
  j["completions"] = usage.completions;
  j["total_tokens"] = usage.total_tokens;
  j["reported"] = usage.reported;
  j["estimated"] = usage.estimated;
  return j;
}

inline nlohmann::json efficiency_to_json(const EfficiencyReport& report) {
  nlohmann::json j;
  j["avg_tokens"] = report.avg_tokens;
  j["avg_steps"] = report.avg_steps;
  j["trace_count"] = report.trace_count;
  j["total_steps"] = report.total_steps;
  j["trace_phase"] = phase_usage_to_json(report.trace_phase);
  j["answer_phase"] = phase_usage_to_json(report.answer_phase);
  return j;
}

// ============================================================================
// Run report
// ============================================================================

struct RecordRow {
  std::string id;
  std::string pred;
  std::string gold;
  int em = 0;
  double f1 = 0.0;
  long long tokens = 0;
  double steps = 0.0;  // mean steps per trace within the record
  bool failed = false;
  std::string error;
};

struct Aggregates {
  std::size_t records = 0;
  std::size_t failed = 0;
  double em_mean = 0.0;  // accuracy for label tasks, EM for span tasks
  double f1_mean = 0.0;
  double avg_tokens = 0.0;  // mean of per-record token totals
  double avg_steps = 0.0;   // mean of per-record step means
  long long dropped_traces = 0;
  long long unparseable_samples = 0;
};

struct RunReport {
  std::vector<RecordRow> rows;
  Aggregates aggregates;
  EfficiencyReport efficiency;
  nlohmann::json config_snapshot;
  std::uint64_t seed = 0;
};

inline Aggregates compute_aggregates(const std::vector<RecordRow>& rows,
                                     const std::vector<QueryLog>& logs) {
  Aggregates agg;
  agg.records = rows.size();
  double em_sum = 0.0, f1_sum = 0.0, token_sum = 0.0, step_sum = 0.0;
  std::size_t ok = 0;
  for (const auto& row : rows) {
    if (row.failed) {
      ++agg.failed;
      continue;
    }
    ++ok;
    em_sum += row.em;
    f1_sum += row.f1;
    token_sum += static_cast<double>(row.tokens);
    step_sum += row.steps;
  }
  if (ok > 0) {
    agg.em_mean = em_sum / static_cast<double>(ok);
    agg.f1_mean = f1_sum / static_cast<double>(ok);
    agg.avg_tokens = token_sum / static_cast<double>(ok);
    agg.avg_steps = step_sum / static_cast<double>(ok);
  }
  for (const auto& log : logs) {
    agg.dropped_traces += log.dropped_traces;
    for (const auto& cluster : log.clusters) agg.unparseable_samples += cluster.evidence.unparseable;
  }
  return agg;
}

inline nlohmann::json aggregates_to_json(const Aggregates& agg) {
  nlohmann::json j;
  j["records"] = agg.records;
  j["failed"] = agg.failed;
  j["em_mean"] = agg.em_mean;
  j["f1_mean"] = agg.f1_mean;
  j["avg_tokens"] = agg.avg_tokens;
  j["avg_steps"] = agg.avg_steps;
  j["dropped_traces"] = agg.dropped_traces;
  j["unparseable_samples"] = agg.unparseable_samples;
  return j;
}

inline nlohmann::json row_to_json(const RecordRow& row) {
  nlohmann::json j;
  j["id"] = row.id;
  j["pred"] = row.pred;
  j["gold"] = row.gold;
  j["em"] = row.em;
  j["f1"] = row.f1;
  j["tokens"] = row.tokens;
  j["steps"] = row.steps;
  j["failed"] = row.failed;
  j["error"] = row.error;
  return j;
}

namespace detail {

inline std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += '"';
  return out;
}

inline std::string format_fixed(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", value);
  return buf;
}

inline bool aggregates_equal(const Aggregates& a, const Aggregates& b) {
  return a.records == b.records && a.failed == b.failed && a.em_mean == b.em_mean &&
         a.f1_mean == b.f1_mean && a.avg_tokens == b.avg_tokens && a.avg_steps == b.avg_steps &&
         a.dropped_traces == b.dropped_traces && a.unparseable_samples == b.unparseable_samples;
}

}  // namespace detail

/**
 * Emits report.json (aggregates, efficiency, config, per-record rows) and
 * report.csv (id,pred,gold,em,f1,tokens,steps). Recomputes the aggregate
 * block from the rows first; a stored aggregate that disagrees aborts the
 * write.
 */
inline void write_report(const RunReport& report, const std::vector<QueryLog>& logs,
                         const std::string& dir) {
  Aggregates recomputed = compute_aggregates(report.rows, logs);
  if (!detail::aggregates_equal(recomputed, report.aggregates))
    fail(ErrorCode::AggregateMismatch, "stored aggregates disagree with per-record rows");

  nlohmann::json j;
  j["aggregates"] = aggregates_to_json(report.aggregates);
  j["efficiency"] = efficiency_to_json(report.efficiency);
  j["config"] = report.config_snapshot;
  j["seed"] = report.seed;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : report.rows) rows.push_back(row_to_json(row));
  j["records"] = std::move(rows);

  {
    std::ofstream out(dir + "/report.json", std::ios::binary);
    if (!out) fail(ErrorCode::IoError, "cannot write " + dir + "/report.json");
    out << j.dump(2) << '\n';
  }
  {
    std::ofstream out(dir + "/report.csv", std::ios::binary);
    if (!out) fail(ErrorCode::IoError, "cannot write " + dir + "/report.csv");
    out << "id,pred,gold,em,f1,tokens,steps\n";
    for (const auto& row : report.rows) {
      out << detail::csv_escape(row.id) << ',' << detail::csv_escape(row.pred) << ','
          << detail::csv_escape(row.gold) << ',';
      if (row.failed) {
        out << ",,,";
      } else {
        out << row.em << ',' << detail::format_fixed(row.f1) << ',' << row.tokens << ','
            << detail::format_fixed(row.steps);
      }
      out << '\n';
    }
  }
}

}  // namespace acps

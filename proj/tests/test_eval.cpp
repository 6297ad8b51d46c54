#include "acps/eval.hpp"

#include "support.hpp"

#include <doctest.h>

#include <fstream>
#include <random>

using namespace acps;

TEST_SUITE_BEGIN("eval");

namespace {

std::string record_line(const std::string& id, const std::string& question,
                        const std::string& answer, const std::string& kind,
                        const std::vector<std::string>& evidence = {},
                        const ChoiceMap& choices = {}) {
  nlohmann::json j;
  j["id"] = id;
  j["question"] = question;
  j["answer"] = answer;
  j["task_kind"] = kind;
  if (!evidence.empty()) j["evidence"] = evidence;
  if (!choices.empty()) {
    nlohmann::json c = nlohmann::json::object();
    for (const auto& [letter, text] : choices) c[letter] = text;
    j["choices"] = c;
  }
  return j.dump();
}

DatasetRecord evidence_record(int n_evidence) {
  DatasetRecord record;
  record.query.id = "r1";
  record.query.question = "q?";
  record.query.task_kind = TaskKind::open;
  record.gold_answer = "gold";
  for (int i = 0; i < n_evidence; ++i)
    record.query.external_knowledge.push_back("evidence-" + std::to_string(i));
  return record;
}

}  // namespace

// ----------------------------------------------------------------------------
// dataset loading
// ----------------------------------------------------------------------------

TEST_CASE("load_dataset reads records in file order") {
  acps_test::TempDir tmp;
  std::ofstream out(tmp.str("data.jsonl"));
  out << record_line("a", "How many?", "4", "numeric") << "\n";
  out << record_line("b", "Who?", "Kyle Busch", "open", {"ctx one", "ctx two"}) << "\n";
  out << record_line("c", "Where?", "D", "multiple_choice", {}, {{"A", "x"}, {"D", "office"}})
      << "\n";
  out.close();

  auto records = load_dataset(tmp.str("data.jsonl"));
  REQUIRE(records.size() == 3);
  CHECK(records[0].query.id == "a");
  CHECK(records[0].query.task_kind == TaskKind::numeric);
  CHECK(records[1].query.external_knowledge.size() == 2);
  CHECK(records[2].query.choices.at("D") == "office");
}

TEST_CASE("load_dataset schema violations") {
  acps_test::TempDir tmp;
  SUBCASE("multiple_choice without choices") {
    std::ofstream(tmp.str("d.jsonl")) << record_line("a", "q", "D", "multiple_choice") << "\n";
    try {
      load_dataset(tmp.str("d.jsonl"));
      FAIL("expected SchemaViolation");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::SchemaViolation);
    }
  }
  SUBCASE("choices on a non-multiple_choice record") {
    std::ofstream(tmp.str("d.jsonl"))
        << record_line("a", "q", "yes", "yes_no", {}, {{"A", "x"}}) << "\n";
    CHECK_THROWS_AS(load_dataset(tmp.str("d.jsonl")), Error);
  }
  SUBCASE("unknown task kind") {
    std::ofstream(tmp.str("d.jsonl")) << R"({"id":"a","question":"q","answer":"x","task_kind":"zzz"})"
                                      << "\n";
    CHECK_THROWS_AS(load_dataset(tmp.str("d.jsonl")), Error);
  }
  SUBCASE("bad json carries the line number") {
    std::ofstream(tmp.str("d.jsonl")) << record_line("a", "q", "x", "open") << "\n"
                                      << "{oops\n";
    try {
      load_dataset(tmp.str("d.jsonl"));
      FAIL("expected ParseError");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ParseError);
      CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
  }
  SUBCASE("empty file is a warning, not an error") {
    std::ofstream(tmp.str("d.jsonl")) << "";
    CHECK(load_dataset(tmp.str("d.jsonl")).empty());
  }
}

// ----------------------------------------------------------------------------
// metrics
// ----------------------------------------------------------------------------

TEST_CASE("exact match goes through shared canonicalization") {
  CanonicalAnswer pred{"kyle busch", TaskKind::open};
  CHECK(exact_match(pred, "Kyle Busch", TaskKind::open) == 1);
  CHECK(exact_match({"carl edwards", TaskKind::open}, "Kyle Busch", TaskKind::open) == 0);
  CHECK(exact_match({"1234", TaskKind::numeric}, "1,234", TaskKind::numeric) == 1);
  ChoiceMap choices{{"D", "office"}};
  CHECK(exact_match({"D", TaskKind::multiple_choice}, "office", TaskKind::multiple_choice,
                    &choices) == 1);
}

TEST_CASE("token F1 fixtures") {
  CHECK(token_f1("kyle busch", "kyle busch") == doctest::Approx(1.0));
  CHECK(token_f1("alpha beta", "gamma") == doctest::Approx(0.0));
  // P = 1/2, R = 1/1 -> F1 = 2 * 0.5 * 1 / 1.5 = 2/3
  CHECK(token_f1("carl edwards", "edwards") == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(token_f1("carl edwards", "edwards") == doctest::Approx(0.6667).epsilon(1e-4));
  // multiset overlap: min counts per token
  CHECK(token_f1("a b a", "a a c") == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  // order does not matter
  CHECK(token_f1("new york city", "york new city") == doctest::Approx(1.0));
}

TEST_CASE("token F1 is symmetric and EM implies F1 = 1") {
  std::mt19937_64 rng(6);
  const char* words[] = {"alpha", "beta", "gamma", "delta"};
  for (int trial = 0; trial < 200; ++trial) {
    auto random_phrase = [&]() {
      std::string s;
      int n = 1 + static_cast<int>(rng() % 4);
      for (int i = 0; i < n; ++i) {
        if (i > 0) s += ' ';
        s += words[rng() % 4];
      }
      return s;
    };
    std::string a = random_phrase();
    std::string b = random_phrase();
    CHECK(token_f1(a, b) == doctest::Approx(token_f1(b, a)).epsilon(1e-12));

    auto ca = canonicalize_answer(a, TaskKind::open).value;
    auto cb = canonicalize_answer(b, TaskKind::open).value;
    if (exact_match({ca, TaskKind::open}, b, TaskKind::open) == 1)
      CHECK(token_f1(ca, cb) == doctest::Approx(1.0));
  }
}

TEST_CASE("accuracy") {
  CHECK(accuracy({1, 1, 0, 0}) == doctest::Approx(0.5));
  CHECK(accuracy({1, 1, 1}) == doctest::Approx(1.0));
  CHECK(accuracy({0}) == doctest::Approx(0.0));
  try {
    accuracy({});
    FAIL("expected EmptyResults");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyResults);
  }
}

// ----------------------------------------------------------------------------
// perturbations
// ----------------------------------------------------------------------------

TEST_CASE("inject replaces exactly one evidence item") {
  DatasetRecord record = evidence_record(4);
  std::vector<std::string> pool = {"distractor-0", "distractor-1"};

  DatasetRecord perturbed = perturb_inject(record, pool, 123);
  REQUIRE(perturbed.query.external_knowledge.size() == 4);
  int changed = 0;
  bool from_pool = false;
  for (std::size_t i = 0; i < 4; ++i) {
    if (perturbed.query.external_knowledge[i] != record.query.external_knowledge[i]) {
      ++changed;
      for (const auto& d : pool) from_pool = from_pool || d == perturbed.query.external_knowledge[i];
    }
  }
  CHECK(changed == 1);
  CHECK(from_pool);
  CHECK(perturbed.query.id == record.query.id);
  CHECK(perturbed.query.question == record.query.question);
  CHECK(perturbed.gold_answer == record.gold_answer);

  SUBCASE("same seed, same output") {
    DatasetRecord again = perturb_inject(record, pool, 123);
    CHECK(again.query.external_knowledge == perturbed.query.external_knowledge);
  }
  SUBCASE("pool overlapping evidence is rejected") {
    pool.push_back("evidence-2");
    try {
      perturb_inject(record, pool, 1);
      FAIL("expected DisjointnessViolation");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DisjointnessViolation);
    }
  }
  SUBCASE("declared errors") {
    try {
      perturb_inject(evidence_record(0), pool, 1);
      FAIL("expected NoEvidence");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NoEvidence);
    }
    try {
      perturb_inject(record, {}, 1);
      FAIL("expected EmptyPool");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::EmptyPool);
    }
  }
}

TEST_CASE("shuffle preserves the evidence multiset") {
  DatasetRecord record = evidence_record(5);
  DatasetRecord shuffled = perturb_shuffle(record, 9);
  auto sorted_in = record.query.external_knowledge;
  auto sorted_out = shuffled.query.external_knowledge;
  std::sort(sorted_in.begin(), sorted_in.end());
  std::sort(sorted_out.begin(), sorted_out.end());
  CHECK(sorted_in == sorted_out);

  CHECK(perturb_shuffle(record, 9).query.external_knowledge ==
        shuffled.query.external_knowledge);

  DatasetRecord single = evidence_record(1);
  CHECK(perturb_shuffle(single, 5).query.external_knowledge ==
        single.query.external_knowledge);

  CHECK_THROWS_AS(perturb_shuffle(evidence_record(0), 1), Error);
}

// ----------------------------------------------------------------------------
// efficiency accounting
// ----------------------------------------------------------------------------

TEST_CASE("efficiency report averages and counting modes") {
  QueryLog log;
  log.id = "q1";
  SketchTrace t1;
  t1.completion_tokens = 10;
  t1.step_count = 2;
  t1.tokens_estimated = false;
  SketchTrace t2;
  t2.completion_tokens = 20;
  t2.step_count = 2;
  t2.tokens_estimated = true;
  SketchTrace t3;
  t3.completion_tokens = 30;
  t3.step_count = 3;
  t3.tokens_estimated = false;
  log.traces = {t1, t2, t3};

  ClusterLog cluster;
  AnswerSample s1;
  s1.completion_tokens = 40;
  s1.tokens_estimated = false;
  cluster.evidence.samples = {s1};
  log.clusters = {cluster};

  auto report = efficiency_report({log});
  CHECK(report.avg_tokens == doctest::Approx((10 + 20 + 30 + 40) / 4.0));
  CHECK(report.avg_steps == doctest::Approx((2 + 2 + 3) / 3.0));
  CHECK(report.trace_phase.completions == 3);
  CHECK(report.trace_phase.reported == 2);
  CHECK(report.trace_phase.estimated == 1);
  CHECK(report.answer_phase.completions == 1);
  CHECK(report.answer_phase.reported == 1);

  try {
    efficiency_report({});
    FAIL("expected EmptyLog");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyLog);
  }
}

// ----------------------------------------------------------------------------
// report writing
// ----------------------------------------------------------------------------

namespace {

RunReport small_report() {
  RunReport report;
  for (int i = 0; i < 3; ++i) {
    RecordRow row;
    row.id = "r" + std::to_string(i);
    row.pred = "p";
    row.gold = "g";
    row.em = i == 0 ? 1 : 0;
    row.f1 = i == 0 ? 1.0 : 0.0;
    row.tokens = 100 + i;
    row.steps = 2.0;
    report.rows.push_back(row);
  }
  report.aggregates = compute_aggregates(report.rows, {});
  report.efficiency.avg_tokens = 0.0;
  report.config_snapshot = nlohmann::json::object();
  return report;
}

}  // namespace

TEST_CASE("write_report emits json and csv") {
  acps_test::TempDir tmp;
  RunReport report = small_report();
  write_report(report, {}, tmp.str());

  std::ifstream csv(tmp.str("report.csv"));
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(csv, line)) lines.push_back(line);
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "id,pred,gold,em,f1,tokens,steps");
  CHECK(lines[1] == "r0,p,g,1,1.000000,100,2.000000");

  std::ifstream json_in(tmp.str("report.json"));
  nlohmann::json j = nlohmann::json::parse(json_in);
  CHECK(j["aggregates"]["records"] == 3);
  CHECK(j["aggregates"]["em_mean"] == doctest::Approx(1.0 / 3.0));
  CHECK(j["records"].size() == 3);
}

TEST_CASE("write_report cross-checks aggregates") {
  acps_test::TempDir tmp;
  RunReport report = small_report();
  report.aggregates.em_mean = 0.9;  // tampered
  try {
    write_report(report, {}, tmp.str());
    FAIL("expected AggregateMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AggregateMismatch);
  }
}

TEST_CASE("write_report surfaces IO failures") {
  RunReport report = small_report();
  try {
    write_report(report, {}, "/nonexistent_dir_acps/run");
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IoError);
  }
}

TEST_CASE("query log round-trips through json") {
  QueryLog log;
  log.id = "q7";
  log.kind = "open";
  log.paradigm = "CC";
  log.router_source = "heuristic";
  log.adjustment = "conditional_front_door";
  log.dropped_traces = 1;
  log.requested_k = 4;
  log.used_k = 4;
  SketchTrace trace;
  trace.text = "<think>\nx → y\n</think>\n\\boxed{a}";
  trace.think_block = "\nx → y\n";
  trace.boxed_answer = "a";
  trace.temperature = 0.25;
  trace.schedule_index = 1;
  trace.completion_tokens = 9;
  trace.step_count = 1;
  log.traces.push_back(trace);
  ClusterLog cluster;
  cluster.evidence.cluster_index = 0;
  cluster.evidence.weight = 1.0;
  cluster.evidence.distribution = {{"a", 1.0}};
  AnswerSample sample;
  sample.raw_text = "\\boxed{a}";
  sample.canonical = "a";
  sample.completion_tokens = 3;
  cluster.evidence.samples.push_back(sample);
  cluster.members = {0};
  cluster.representative = 0;
  cluster.demo_ids = {"d2", "d1"};
  log.clusters.push_back(cluster);
  log.external_product = 1.0;
  log.scores = {{"a", 1.0}};
  log.chosen = "a";
  log.majority = "a";
  log.gold = "a";
  log.em = 1;
  log.f1 = 1.0;
  log.total_tokens = 12;

  nlohmann::json j = query_log_to_json(log);
  QueryLog back = query_log_from_json(j);
  CHECK(query_log_to_json(back).dump() == j.dump());
  CHECK(back.traces[0].think_block == trace.think_block);
  CHECK(back.clusters[0].evidence.samples[0].canonical == "a");
}

TEST_SUITE_END();

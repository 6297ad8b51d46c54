// Command-line entry point: wires configuration, backends, the pipeline,
// and the evaluation harness into reproducible runs.
//
// Exit codes: 0 success, 1 partial record failures, 2 configuration / IO
// failure.

#include "acps/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

int cmd_run(const std::string& config_path, std::optional<unsigned> jobs,
            std::optional<std::string> out, std::optional<std::uint64_t> seed,
            std::optional<std::string> dataset) {
  acps::RunConfig config = acps::load_config(config_path);
  acps::RunOverrides overrides;
  overrides.jobs = jobs;
  overrides.out = std::move(out);
  overrides.seed = seed;
  overrides.dataset = std::move(dataset);
  acps::RunResult result = acps::run_pipeline(std::move(config), overrides);

  const auto& agg = result.report.aggregates;
  std::cout << "run: " << agg.records << " records, " << agg.failed << " failed\n"
            << "  em/acc:     " << agg.em_mean << "\n"
            << "  f1:         " << agg.f1_mean << "\n"
            << "  avg tokens: " << agg.avg_tokens << "\n"
            << "  avg steps:  " << agg.avg_steps << "\n"
            << "  output:     " << result.run_dir << "\n";
  if (result.failed > 0) {
    std::cerr << result.failed << " record(s) failed; see report.json for details\n";
    return 1;
  }
  return 0;
}

int cmd_classify(const std::string& config_path, const std::string& dataset_path,
                 const std::string& question, const std::string& out_path) {
  acps::RunConfig config =
      config_path.empty() ? acps::RunConfig{} : acps::load_config(config_path);
  auto router = acps::make_router(config.router);

  std::vector<std::pair<std::string, std::string>> inputs;  // id, question
  if (!question.empty()) {
    inputs.emplace_back("question", question);
  } else {
    if (dataset_path.empty())
      acps::fail(acps::ErrorCode::ConfigError, "classify needs --dataset or --question");
    for (const auto& record : acps::load_dataset(dataset_path))
      inputs.emplace_back(record.query.id, record.query.question);
  }

  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path, std::ios::binary);
    if (!file) acps::fail(acps::ErrorCode::IoError, "cannot write " + out_path);
    out = &file;
  }
  for (const auto& [id, text] : inputs) {
    acps::ParadigmDecision decision = router->classify(text);
    nlohmann::json j;
    j["id"] = id;
    j["paradigm"] = acps::paradigm_name(decision.chosen);
    j["source"] = acps::router_source_name(decision.source);
    if (decision.probabilities) {
      nlohmann::json probs;
      for (const auto& [p, prob] : *decision.probabilities)
        probs[acps::paradigm_name(p)] = prob;
      j["probabilities"] = probs;
    }
    *out << j.dump() << "\n";
  }
  return 0;
}

int cmd_perturb(const std::string& mode, const std::string& dataset_path,
                const std::string& out_path, const std::string& distractors_path,
                std::uint64_t seed) {
  auto records = acps::load_dataset(dataset_path);
  std::vector<std::string> pool;
  if (mode == "inject") {
    if (distractors_path.empty())
      acps::fail(acps::ErrorCode::ConfigError, "perturb --mode inject needs --distractors");
    pool = acps::load_distractors(distractors_path);
  } else if (mode != "shuffle") {
    acps::fail(acps::ErrorCode::ConfigError, "perturb --mode must be inject or shuffle");
  }

  std::ofstream out(out_path, std::ios::binary);
  if (!out) acps::fail(acps::ErrorCode::IoError, "cannot write " + out_path);
  for (const auto& record : records) {
    std::uint64_t sub_seed = acps::record_seed(seed, record.query.id);
    acps::DatasetRecord perturbed = mode == "inject"
                                        ? acps::perturb_inject(record, pool, sub_seed)
                                        : acps::perturb_shuffle(record, sub_seed);
    out << acps::dataset_record_to_json(perturbed).dump() << "\n";
  }
  std::cout << "perturbed " << records.size() << " records -> " << out_path << "\n";
  return 0;
}

int cmd_eval(const std::string& pred_path, const std::string& gold_path,
             const std::string& out_dir) {
  acps::RunReport report = acps::evaluate_predictions(pred_path, gold_path);
  const auto& agg = report.aggregates;
  std::cout << "eval: " << agg.records << " records, " << agg.failed << " unmatched\n"
            << "  em/acc: " << agg.em_mean << "\n"
            << "  f1:     " << agg.f1_mean << "\n";
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    acps::write_report(report, {}, out_dir);
    std::cout << "  output: " << out_dir << "\n";
  }
  return agg.failed > 0 ? 1 : 0;
}

int cmd_report(const std::string& run_dir) {
  acps::RunReport report = acps::reaggregate_run_dir(run_dir);
  const auto& agg = report.aggregates;
  std::cout << "report: " << agg.records << " records, " << agg.failed << " failed\n"
            << "  em/acc: " << agg.em_mean << "\n"
            << "  f1:     " << agg.f1_mean << "\n"
            << "  rewrote " << run_dir << "/report.json and report.csv\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ACPS: adaptive causal prompting engine"};
  app.require_subcommand(1);

  std::string config_path, dataset_path, out_path, question, mode, distractors_path;
  std::string pred_path, gold_path, run_dir;
  std::optional<unsigned> jobs;
  std::optional<std::uint64_t> seed_override;
  std::uint64_t perturb_seed = 0;

  auto* run = app.add_subcommand("run", "execute the full pipeline over a dataset");
  run->add_option("--config", config_path, "run configuration (JSON)")->required();
  run->add_option("--jobs", jobs, "records processed concurrently");
  run->add_option("--out", out_path, "output directory (overrides config)");
  run->add_option("--seed", seed_override, "run seed (overrides config)");
  run->add_option("--dataset", dataset_path, "dataset path (overrides config)");

  auto* classify = app.add_subcommand("classify", "route questions to reasoning paradigms");
  classify->add_option("--config", config_path, "configuration with a router section");
  classify->add_option("--dataset", dataset_path, "dataset to classify");
  classify->add_option("--question", question, "single question to classify");
  classify->add_option("--out", out_path, "write decisions to this file instead of stdout");

  auto* perturb = app.add_subcommand("perturb", "emit a perturbed copy of a dataset");
  perturb->add_option("--mode", mode, "inject | shuffle")->required();
  perturb->add_option("--dataset", dataset_path, "input dataset")->required();
  perturb->add_option("--out", out_path, "output dataset path")->required();
  perturb->add_option("--seed", perturb_seed, "perturbation seed")->required();
  perturb->add_option("--distractors", distractors_path, "distractor pool (one per line)");

  auto* eval = app.add_subcommand("eval", "score a predictions file against a gold dataset");
  eval->add_option("--pred", pred_path, "predictions JSONL: {id, prediction}")->required();
  eval->add_option("--gold", gold_path, "gold dataset JSONL")->required();
  eval->add_option("--out", out_path, "directory for report.json / report.csv");

  auto* report = app.add_subcommand("report", "re-aggregate an existing run directory");
  report->add_option("--run", run_dir, "run directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return cmd_run(config_path, jobs, out_path.empty() ? std::nullopt : std::optional(out_path),
                     seed_override,
                     dataset_path.empty() ? std::nullopt : std::optional(dataset_path));
    if (classify->parsed()) return cmd_classify(config_path, dataset_path, question, out_path);
    if (perturb->parsed())
      return cmd_perturb(mode, dataset_path, out_path, distractors_path, perturb_seed);
    if (eval->parsed()) return cmd_eval(pred_path, gold_path, out_path);
    if (report->parsed()) return cmd_report(run_dir);
  } catch (const acps::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

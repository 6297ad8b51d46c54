#pragma once

/**
 * Demonstration bank: loads the fixed demonstration set, ranks it by
 * cosine similarity to a cluster representative, and assembles the
 * intervention prompt with the most similar demonstration adjacent to the
 * test block.
 *
 * Demonstrations are embedded by their correct trace once at load (the
 * ranking compares trace to trace); override by re-embedding externally
 * if a different key is wanted.
 */

#include "acps/backend.hpp"
#include "acps/core.hpp"
#include "acps/errors.hpp"
#include "acps/prompts.hpp"
#include "acps/router.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <string>
#include <vector>

namespace acps {

struct Demonstration {
  std::string id;
  std::string question;
  std::vector<std::string> evidence;
  std::string wrong_trace;
  std::string correct_trace;
  std::string answer;
  EmbeddingVector embedding;  // of correct_trace, computed at load
};

class DemoBank {
 public:
  static DemoBank load(const std::string& path, Backend& backend) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot open demonstration file: " + path);

    DemoBank bank;
    std::set<std::string> seen_ids;
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

      Demonstration demo;
      auto require = [&](const char* field) -> std::string {
        if (!j.contains(field) || !j[field].is_string() || j[field].get<std::string>().empty()) {
          fail(ErrorCode::ParseError, path + ":" + std::to_string(line_no) +
                                          ": missing or empty field '" + field + "'");
        }
        return j[field].get<std::string>();
      };
      demo.id = require("id");
      demo.question = require("question");
      demo.wrong_trace = require("wrong_trace");
      demo.correct_trace = require("correct_trace");
      demo.answer = require("answer");
      if (j.contains("evidence") && !j["evidence"].is_null()) {
        if (!j["evidence"].is_array())
          fail(ErrorCode::ParseError,
               path + ":" + std::to_string(line_no) + ": 'evidence' must be an array");
        for (const auto& e : j["evidence"]) demo.evidence.push_back(e.get<std::string>());
      }
      if (!seen_ids.insert(demo.id).second)
        fail(ErrorCode::DuplicateId, "demonstration id '" + demo.id + "' appears twice");
      bank.demos_.push_back(std::move(demo));
    }

    if (!bank.demos_.empty()) {
      std::vector<std::string> keys;
      keys.reserve(bank.demos_.size());
      for (const auto& d : bank.demos_) keys.push_back(d.correct_trace);
      std::vector<EmbeddingVector> embeddings;
      try {
        embeddings = backend.embed(keys);  // one batched call
      } catch (const std::exception& e) {
        fail(ErrorCode::EmbeddingFailure, std::string("embedding demonstrations failed: ") + e.what());
      }
      for (std::size_t i = 0; i < bank.demos_.size(); ++i)
        bank.demos_[i].embedding = std::move(embeddings[i]);
    }
    return bank;
  }

  const std::vector<Demonstration>& demos() const { return demos_; }
  std::size_t size() const { return demos_.size(); }
  bool empty() const { return demos_.empty(); }

 private:
  std::vector<Demonstration> demos_;
};

/// Indices ordered by descending cosine similarity to the trace embedding;
/// equal similarities order by demonstration id ascending.
inline std::vector<std::size_t> rank_demos(const DemoBank& bank,
                                           const EmbeddingVector& trace_embedding) {
  if (bank.empty()) fail(ErrorCode::EmptyBank, "demonstration bank is empty");
  const auto& demos = bank.demos();
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(demos.size());
  for (std::size_t i = 0; i < demos.size(); ++i)
    scored.emplace_back(cosine_similarity(trace_embedding, demos[i].embedding), i);
  std::sort(scored.begin(), scored.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return demos[a.second].id < demos[b.second].id;
  });
  std::vector<std::size_t> order;
  order.reserve(scored.size());
  for (const auto& [sim, idx] : scored) order.push_back(idx);
  return order;
}

struct InterventionPrompt {
  std::string text;
  std::vector<std::string> demo_ids;  // emission order: farthest-ranked first
  int cluster_index = 0;
};

/**
 * Assembles the per-cluster intervention prompt: the top-L ranked
 * demonstrations emitted in reverse rank order (the most similar one ends
 * up adjacent to the test block), then the test block carrying the query
 * and the cluster's representative trace as the provided reasoning
 * process.
 */
inline InterventionPrompt build_intervention_prompt(const DemoBank& bank,
                                                    const std::vector<std::size_t>& ranked,
                                                    std::size_t l, const Query& query,
                                                    const std::string& representative_trace,
                                                    Paradigm paradigm, int cluster_index = 0) {
  if (l < 1) fail(ErrorCode::LTooLarge, "L must be at least 1");
  if (l > ranked.size()) {
    fail(ErrorCode::LTooLarge,
         "L = " + std::to_string(l) + " exceeds the " + std::to_string(ranked.size()) +
             " ranked demonstrations");
  }

  InterventionPrompt prompt;
  prompt.cluster_index = cluster_index;
  prompt.text =
      "Instruction:\n"
      "You are a helpful assistant to perform " +
      std::string(prompts::paradigm_long_name(paradigm)) +
      ". Based on the context, answer the question step by step and provide the final answer "
      "at the end. I will provide reasoning processes, and please improve them to ensure the "
      "correct answer.\n";

  for (std::size_t slot = l; slot-- > 0;) {
    const Demonstration& demo = bank.demos()[ranked[slot]];
    prompt.demo_ids.push_back(demo.id);
    prompt.text += "\nDemonstration:\n";
    prompt.text += "Q: " + prompts::render_question_block(demo.question, demo.evidence, {}) + "\n";
    prompt.text += "Let us think step by step,\n";
    prompt.text += "The provided reasoning process is: " + demo.wrong_trace + "\n";
    prompt.text += "A: The improved reasoning process is: " + demo.correct_trace + "\n";
    prompt.text += "Therefore, the correct answer is: \\boxed{" + demo.answer + "}\n";
  }

  prompt.text += "\nTest example:\n";
  prompt.text += "Q: " + prompts::render_question_block(query) + "\n";
  prompt.text += "Let us think step by step,\n";
  prompt.text += "The provided reasoning process is: " + representative_trace + "\n";
  prompt.text += "A: The improved reasoning process is:";
  return prompt;
}

}  // namespace acps

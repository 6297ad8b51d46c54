#pragma once

/**
 * Prompt assembly. Two sketch templates (chunked symbolism for CS,
 * structured concept linking for CC and EL) plus the common intervention
 * template used in the answer phase. Assembly is a pure function of its
 * inputs; golden fixtures key on the exact bytes, so template text is
 * frozen; edits invalidate every recorded fixture.
 */

#include "acps/core.hpp"
#include "acps/router.hpp"

#include <string>

namespace acps {

namespace prompts {

inline constexpr const char* kChunkedSymbolismInstructions =
    "Instruction:\n"
    "You are a reasoning expert specializing in Chunked Symbolism, a cognitive reasoning "
    "technique that organizes numerical reasoning into structured steps. Your goal is to "
    "utilize chunked symbolism by representing information through equations, variables, and "
    "step-by-step arithmetic, using minimal words.\n"
    "\n"
    "How to apply Chunked Symbolism:\n"
    "1. Identify variables - extract relevant numerical values and define variables.\n"
    "2. Write equations - represent the solution using explicit mathematical formulas.\n"
    "3. Perform step-by-step computations - solve in small, logical steps, keeping each line "
    "clear.\n"
    "4. Label units - maintain consistent unit representation to prevent ambiguity.\n"
    "5. Final answer formatting - present the answer in the provided format for clarity.\n"
    "\n"
    "Rules:\n"
    "- Use equations and variables; define variables before computation and always use "
    "explicit equations to represent reasoning.\n"
    "- Avoid redundant text; do not restate the problem - go directly to calculations.\n"
    "- Apply step-by-step arithmetic; ensure each line contains only one computation.\n"
    "- Output format:\n"
    "  <think>\n"
    "  Let's think through this step by step\n"
    "  [stepwise equations, variables, and computations]\n"
    "  </think>\n"
    "  \\boxed{[Final answer]}\n"
    "- For multiple-choice, return the correct letter option in the box.\n"
    "- Always use minimal words.\n";

inline constexpr const char* kConceptLinkingInstructions =
    "Instruction:\n"
    "You are a reasoning expert specializing in structured concept linking by connecting "
    "essential ideas in a logical sequence. Your goal is to extract key terms and present "
    "reasoning in clear, stepwise chains with minimal explanation.\n"
    "\n"
    "How to apply structured concept linking:\n"
    "1. Extract key concepts - identify the most relevant words or entities.\n"
    "2. Use minimal words - make each reasoning step concise and direct.\n"
    "3. Link steps sequentially - ensure clear and meaningful progression between concepts.\n"
    "4. Avoid full sentences - respond using structured keyword connections.\n"
    "5. Follow the required format - present answers as stepwise chains.\n"
    "\n"
    "Rules:\n"
    "- Use structured concept linking; each step must be logically connected (arrows "
    "(\u2192) for dependencies).\n"
    "- Avoid unnecessary text; do not restate the question or use full sentences.\n"
    "- Maintain logical flow; concepts must be meaningfully ordered and contribute to the "
    "reasoning process.\n"
    "- Output format:\n"
    "  <think>\n"
    "  Let's think through this step by step\n"
    "  [shorthand reasoning]\n"
    "  </think>\n"
    "  \\boxed{[Final answer]}\n"
    "- For multiple-choice, return the correct letter option in the box.\n"
    "- For fact-based recall, return True or False in the box.\n"
    "- Always use minimal words.\n";

inline const char* paradigm_long_name(Paradigm p) {
  switch (p) {
    case Paradigm::CC: return "Conceptual Chaining";
    case Paradigm::CS: return "Chunked Symbolism";
    case Paradigm::EL: return "Expert Lexicons";
  }
  return "Conceptual Chaining";
}

/// "The context is: ... The question is: ... The choices are: ..." block
/// shared by sketch and intervention prompts.
inline std::string render_question_block(const std::string& question,
                                         const std::vector<std::string>& evidence,
                                         const ChoiceMap& choices) {
  std::string block;
  if (!evidence.empty()) {
    block += "The context is: ";
    for (std::size_t i = 0; i < evidence.size(); ++i) {
      if (i > 0) block += ' ';
      block += evidence[i];
    }
    block += '\n';
  }
  block += "The question is: " + question;
  if (!choices.empty()) {
    block += "\nThe choices are: ";
    bool first = true;
    for (const auto& [letter, text] : choices) {
      if (!first) block += ", ";
      block += letter + ": " + text;
      first = false;
    }
  }
  return block;
}

inline std::string render_question_block(const Query& query) {
  return render_question_block(query.question, query.external_knowledge, query.choices);
}

}  // namespace prompts

/**
 * Sketch-generation prompt for one query under one paradigm. The same
 * prompt is issued once per schedule temperature; only the sampling
 * settings vary across the sweep.
 */
inline std::string build_sketch_prompt(const Query& query, Paradigm paradigm) {
  bool symbolic = paradigm == Paradigm::CS;
  const char* instructions = symbolic ? prompts::kChunkedSymbolismInstructions
                                      : prompts::kConceptLinkingInstructions;
  const char* demo_question = symbolic ? "The question is: [question]"
                                       : "The context is: [paragraphs]. The question is: [question]";
  const char* skeleton =
      symbolic ? "[stepwise equations, variables, and computations]" : "[shorthand reasoning]";

  std::string prompt = instructions;
  prompt += "\nDemonstration:\nQ: ";
  prompt += demo_question;
  prompt +=
      "\nLet us think step by step.\n"
      "A: <think>\n"
      "Let's think through this step by step\n";
  prompt += skeleton;
  prompt +=
      "\n</think>\n"
      "\\boxed{[answer]}\n"
      "\n"
      "Test example:\n"
      "Q: " +
      prompts::render_question_block(query) +
      "\n"
      "Let us think step by step.\n"
      "A:";
  return prompt;
}

}  // namespace acps

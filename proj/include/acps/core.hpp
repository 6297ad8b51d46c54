#pragma once

/**
 * Shared domain types plus the small pure operations the rest of the
 * engine is built from: boxed-answer extraction, answer canonicalization,
 * similarity math, reasoning-step counting, and token accounting.
 *
 * All functions here are pure and safe to call concurrently.
 */

#include "acps/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace acps {

// ============================================================================
// Domain types
// ============================================================================

enum class TaskKind {
  numeric,
  open,
  multiple_choice,
  yes_no,
  supports_refutes,
};

inline const char* task_kind_name(TaskKind kind) {
  switch (kind) {
    case TaskKind::numeric: return "numeric";
    case TaskKind::open: return "open";
    case TaskKind::multiple_choice: return "multiple_choice";
    case TaskKind::yes_no: return "yes_no";
    case TaskKind::supports_refutes: return "supports_refutes";
  }
  return "open";
}

inline TaskKind parse_task_kind(std::string_view name) {
  if (name == "numeric") return TaskKind::numeric;
  if (name == "open") return TaskKind::open;
  if (name == "multiple_choice") return TaskKind::multiple_choice;
  if (name == "yes_no") return TaskKind::yes_no;
  if (name == "supports_refutes") return TaskKind::supports_refutes;
  fail(ErrorCode::SchemaViolation, "unknown task_kind '" + std::string(name) + "'");
}

using ChoiceMap = std::map<std::string, std::string>;  // option letter -> option text

struct Query {
  std::string id;
  std::string question;
  std::vector<std::string> external_knowledge;
  ChoiceMap choices;
  TaskKind task_kind = TaskKind::open;

  bool has_external_knowledge() const { return !external_knowledge.empty(); }
};

struct SketchTrace {
  std::string text;                         // raw completion
  std::optional<std::string> think_block;   // contents between think delimiters
  std::optional<std::string> boxed_answer;  // raw contents of the final boxed marker
  double temperature = 0.0;
  int schedule_index = 0;
  long long completion_tokens = 0;
  bool tokens_estimated = false;  // true when the whitespace fallback produced the count
  int step_count = 0;
};

struct CanonicalAnswer {
  std::string value;
  TaskKind kind = TaskKind::open;

  friend bool operator==(const CanonicalAnswer& a, const CanonicalAnswer& b) {
    return a.value == b.value && a.kind == b.kind;
  }
  friend bool operator<(const CanonicalAnswer& a, const CanonicalAnswer& b) {
    return a.value < b.value;
  }
};

struct EmbeddingVector {
  std::vector<double> components;

  std::size_t dim() const { return components.size(); }
};

// ============================================================================
// Deterministic seeding helpers
// ============================================================================

/// splitmix64 step; the portable PRNG used wherever seeded choices must be
/// reproducible across platforms (std::uniform_int_distribution is not).
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// ============================================================================
// Text utilities
// ============================================================================

namespace detail {

inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline bool is_terminal_punct(char c) {
  return c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?';
}

}  // namespace detail

/// ASCII lowercase + trim + collapse internal whitespace + strip trailing
/// punctuation. The shared first stage of every canonicalization path.
inline std::string normalize_text(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (char c : raw) {
    if (detail::is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  while (!out.empty() && detail::is_terminal_punct(out.back())) out.pop_back();
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

// ============================================================================
// Operations
// ============================================================================

/**
 * Extracts the contents of the last well-formed `\boxed{...}` marker,
 * matching braces so nested groups like `\boxed{\frac{1}{2}}` survive.
 * Interim boxes inside the think block are superseded by the final one.
 */
inline std::optional<std::string> extract_boxed(std::string_view text) {
  static constexpr std::string_view marker = "\\boxed{";
  std::size_t search_end = text.size();
  while (true) {
    std::size_t pos = text.rfind(marker, search_end == 0 ? 0 : search_end - 1);
    if (pos == std::string_view::npos) return std::nullopt;
    std::size_t i = pos + marker.size();
    int depth = 1;
    for (; i < text.size(); ++i) {
      if (text[i] == '{') ++depth;
      else if (text[i] == '}' && --depth == 0) break;
    }
    if (depth == 0) {
      std::size_t start = pos + marker.size();
      return std::string(text.substr(start, i - start));
    }
    if (pos == 0) return std::nullopt;
    search_end = pos;  // marker unbalanced, try the previous one
  }
}

namespace detail {

struct SynonymRow {
  const char* from;
  const char* to;
};

// Fixed synonym tables for the indicator-function match. Documented in the
// README; changing them changes scores, so they are part of the contract.
inline constexpr SynonymRow kYesNoTable[] = {
    {"yes", "yes"}, {"y", "yes"}, {"true", "yes"}, {"t", "yes"},
    {"no", "no"},   {"n", "no"},  {"false", "no"}, {"f", "no"},
};

inline constexpr SynonymRow kSupportsRefutesTable[] = {
    {"supports", "supports"}, {"support", "supports"}, {"supported", "supports"},
    {"yes", "supports"},      {"true", "supports"},
    {"refutes", "refutes"},   {"refute", "refutes"},   {"refuted", "refutes"},
    {"no", "refutes"},        {"false", "refutes"},
};

inline std::string strip_currency_prefix(std::string s) {
  bool negative = !s.empty() && s.front() == '-';
  std::string_view body = negative ? std::string_view(s).substr(1) : std::string_view(s);
  static constexpr std::string_view symbols[] = {"$", "£", "€", "¥"};
  for (auto sym : symbols) {
    if (body.substr(0, sym.size()) == sym) {
      body.remove_prefix(sym.size());
      while (!body.empty() && body.front() == ' ') body.remove_prefix(1);
      return (negative ? "-" : "") + std::string(body);
    }
  }
  return s;
}

inline std::string normalize_numeric(std::string s) {
  s = strip_currency_prefix(std::move(s));
  // thousands separators: commas flanked by digits
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == ',' && i > 0 && i + 1 < s.size() &&
        std::isdigit(static_cast<unsigned char>(s[i - 1])) &&
        std::isdigit(static_cast<unsigned char>(s[i + 1]))) {
      continue;
    }
    out.push_back(s[i]);
  }
  // trailing ".0", ".00", ...
  std::size_t dot = out.find_last_of('.');
  if (dot != std::string::npos && dot + 1 < out.size()) {
    bool all_zero = std::all_of(out.begin() + static_cast<long>(dot) + 1, out.end(),
                                [](char c) { return c == '0'; });
    if (all_zero) out.erase(dot);
  }
  return out;
}

template <std::size_t N>
inline std::optional<std::string> lookup_synonym(const SynonymRow (&table)[N],
                                                 const std::string& value) {
  for (const auto& row : table) {
    if (value == row.from) return std::string(row.to);
  }
  return std::nullopt;
}

}  // namespace detail

/**
 * Canonical form used by the answer-match indicator, exact match, and
 * token F1. Idempotent for every kind: canonicalizing a canonical value
 * returns it unchanged.
 *
 * multiple_choice maps a bare option letter or an option's full text to
 * the option letter as spelled in the choice map. yes_no and
 * supports_refutes fold synonyms through fixed tables. numeric strips
 * thousands separators, a leading currency symbol, and a trailing ".0".
 */
inline CanonicalAnswer canonicalize_answer(std::string_view raw, TaskKind kind,
                                           const ChoiceMap* choices = nullptr) {
  std::string value = normalize_text(raw);
  if (kind == TaskKind::numeric) {
    // stripping ".0" or separators can expose new trailing punctuation,
    // so iterate to a fixed point (both passes only ever delete chars)
    std::string prev;
    do {
      prev = value;
      value = detail::normalize_numeric(normalize_text(prev));
    } while (value != prev);
  }
  if (value.empty()) fail(ErrorCode::EmptyAnswer, "answer reduces to nothing: '" + std::string(raw) + "'");

  switch (kind) {
    case TaskKind::multiple_choice: {
      if (choices != nullptr) {
        for (const auto& [letter, text] : *choices) {
          if (normalize_text(letter) == value) return {letter, kind};
        }
        for (const auto& [letter, text] : *choices) {
          if (normalize_text(text) == value) return {letter, kind};
        }
      }
      fail(ErrorCode::UnmappableChoice,
           "'" + value + "' matches neither an option letter nor any option text");
    }
    case TaskKind::yes_no: {
      if (auto mapped = detail::lookup_synonym(detail::kYesNoTable, value)) return {*mapped, kind};
      return {value, kind};
    }
    case TaskKind::supports_refutes: {
      if (auto mapped = detail::lookup_synonym(detail::kSupportsRefutesTable, value))
        return {*mapped, kind};
      return {value, kind};
    }
    case TaskKind::numeric:
    case TaskKind::open:
      return {value, kind};
  }
  return {value, kind};
}

inline double l2_norm(const EmbeddingVector& v) {
  double sum = 0.0;
  for (double c : v.components) sum += c * c;
  return std::sqrt(sum);
}

inline double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    fail(ErrorCode::DimensionMismatch,
         "cosine over dims " + std::to_string(a.dim()) + " and " + std::to_string(b.dim()));
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) dot += a.components[i] * b.components[i];
  double na = l2_norm(a);
  double nb = l2_norm(b);
  if (na == 0.0 || nb == 0.0) fail(ErrorCode::ZeroVector, "cosine undefined for all-zero vector");
  return dot / (na * nb);
}

inline EmbeddingVector l2_normalized(const EmbeddingVector& v) {
  double n = l2_norm(v);
  if (n == 0.0) fail(ErrorCode::ZeroVector, "cannot normalize all-zero vector");
  EmbeddingVector out;
  out.components.reserve(v.dim());
  for (double c : v.components) out.components.push_back(c / n);
  return out;
}

inline double squared_distance(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    fail(ErrorCode::DimensionMismatch,
         "distance over dims " + std::to_string(a.dim()) + " and " + std::to_string(b.dim()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    double d = a.components[i] - b.components[i];
    sum += d * d;
  }
  return sum;
}

/**
 * Step count of a sketch: every nonempty line contributes
 * max(1, number of "→" hops on that line). A chain `#a → #b → #c` is two
 * hops, a plain line is one step, and counts add over concatenated lines.
 */
inline int count_reasoning_steps(std::string_view think_block) {
  static constexpr std::string_view arrow = "→";
  int steps = 0;
  std::size_t line_start = 0;
  while (line_start <= think_block.size()) {
    std::size_t line_end = think_block.find('\n', line_start);
    if (line_end == std::string_view::npos) line_end = think_block.size();
    std::string_view line = think_block.substr(line_start, line_end - line_start);

    bool blank = true;
    for (char c : line) {
      if (!detail::is_space(c)) {
        blank = false;
        break;
      }
    }
    if (!blank) {
      int arrows = 0;
      std::size_t pos = 0;
      while ((pos = line.find(arrow, pos)) != std::string_view::npos) {
        ++arrows;
        pos += arrow.size();
      }
      steps += std::max(1, arrows);
    }
    if (line_end == think_block.size()) break;
    line_start = line_end + 1;
  }
  return steps;
}

/// Whitespace-chunk token estimate. Only a fallback: backend-reported usage
/// always wins, and reports flag which mode produced each figure.
inline long long approx_token_count(std::string_view text) {
  long long count = 0;
  bool in_chunk = false;
  for (char c : text) {
    if (detail::is_space(c)) {
      in_chunk = false;
    } else if (!in_chunk) {
      in_chunk = true;
      ++count;
    }
  }
  return count;
}

}  // namespace acps

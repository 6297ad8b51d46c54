#pragma once

/**
 * Paradigm routing: assigns each query one of three reasoning paradigms
 * (CC, CS, EL) and selects the causal adjustment mode. The classifier
 * itself stays out of process; this module consumes its logits, or falls
 * back to an ordered keyword table / a fixed configuration.
 */

#include "acps/core.hpp"
#include "acps/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <vector>

namespace acps {

enum class Paradigm { CC, CS, EL };  // enum order is the argmax tie-break order

inline const char* paradigm_name(Paradigm p) {
  switch (p) {
    case Paradigm::CC: return "CC";
    case Paradigm::CS: return "CS";
    case Paradigm::EL: return "EL";
  }
  return "CS";
}

inline Paradigm parse_paradigm(std::string_view name) {
  if (name == "CC") return Paradigm::CC;
  if (name == "CS") return Paradigm::CS;
  if (name == "EL") return Paradigm::EL;
  fail(ErrorCode::ConfigError, "unknown paradigm '" + std::string(name) + "'");
}

enum class RouterSource { remote, heuristic, fixed, fallback };

inline const char* router_source_name(RouterSource s) {
  switch (s) {
    case RouterSource::remote: return "remote";
    case RouterSource::heuristic: return "heuristic";
    case RouterSource::fixed: return "fixed";
    case RouterSource::fallback: return "fallback";
  }
  return "fallback";
}

struct ParadigmDecision {
  std::optional<std::map<Paradigm, double>> logits;         // absent for heuristic/fixed
  std::optional<std::map<Paradigm, double>> probabilities;  // absent for heuristic/fixed
  Paradigm chosen = Paradigm::CS;
  RouterSource source = RouterSource::fixed;
};

enum class AdjustmentKind { standard_front_door, conditional_front_door };

inline const char* adjustment_name(AdjustmentKind k) {
  return k == AdjustmentKind::standard_front_door ? "standard_front_door"
                                                  : "conditional_front_door";
}

// ============================================================================
// Operations
// ============================================================================

/// Exp-normalization with max-subtraction; outputs sum to 1 within 1e-12
/// and are invariant under additive logit shifts.
inline std::map<Paradigm, double> softmax(const std::map<Paradigm, double>& logits) {
  if (logits.empty()) fail(ErrorCode::EmptyLogits, "softmax needs at least one logit");
  double max_logit = -std::numeric_limits<double>::infinity();
  for (const auto& [p, z] : logits) {
    if (!std::isfinite(z)) fail(ErrorCode::NonFiniteLogit, "non-finite logit for " + std::string(paradigm_name(p)));
    max_logit = std::max(max_logit, z);
  }
  std::map<Paradigm, double> out;
  double denom = 0.0;
  for (const auto& [p, z] : logits) denom += std::exp(z - max_logit);
  for (const auto& [p, z] : logits) out[p] = std::exp(z - max_logit) / denom;
  return out;
}

/// Argmax with the fixed tie order CC < CS < EL, earliest wins.
inline Paradigm argmax_paradigm(const std::map<Paradigm, double>& probabilities) {
  if (probabilities.empty()) fail(ErrorCode::EmptyLogits, "argmax over empty distribution");
  Paradigm best = probabilities.begin()->first;
  double best_p = probabilities.begin()->second;
  for (const auto& [p, prob] : probabilities) {
    if (prob > best_p) {
      best = p;
      best_p = prob;
    }
  }
  return best;
}

/**
 * CS always runs the standard adjustment; CC and EL run the conditional
 * adjustment exactly when external knowledge is present. A CC query
 * without evidence degrades to the standard adjustment (see
 * adjustment_degraded, which the pipeline records).
 */
inline AdjustmentKind select_adjustment(Paradigm paradigm, bool has_external_knowledge) {
  switch (paradigm) {
    case Paradigm::CS: return AdjustmentKind::standard_front_door;
    case Paradigm::CC:
    case Paradigm::EL:
      return has_external_knowledge ? AdjustmentKind::conditional_front_door
                                    : AdjustmentKind::standard_front_door;
  }
  return AdjustmentKind::standard_front_door;
}

inline bool adjustment_degraded(Paradigm paradigm, bool has_external_knowledge) {
  return paradigm == Paradigm::CC && !has_external_knowledge;
}

// ============================================================================
// Routers
// ============================================================================

class Router {
 public:
  virtual ~Router() = default;
  virtual ParadigmDecision classify(const std::string& question) = 0;
};

class FixedRouter : public Router {
 public:
  explicit FixedRouter(Paradigm paradigm) : paradigm_(paradigm) {}

  ParadigmDecision classify(const std::string&) override {
    ParadigmDecision d;
    d.chosen = paradigm_;
    d.source = RouterSource::fixed;
    return d;
  }

 private:
  Paradigm paradigm_;
};

struct HeuristicRule {
  std::string pattern;  // case-insensitive ECMAScript regex
  Paradigm paradigm;
};

/// Shipped default table, mirrored bit-for-bit in data/router_rules.json.
/// First match wins; no match falls back to the configured paradigm.
inline std::vector<HeuristicRule> default_heuristic_rules() {
  return {
      {"\\b(true or false|verify|claim|supports?|refutes?|fact[- ]check)\\b", Paradigm::EL},
      {"\\b(how many|how much|calculate|compute|sum|total|average|percent)\\b", Paradigm::CS},
      {"[0-9]\\s*[-+*/=]\\s*[0-9]", Paradigm::CS},
      {"\\b(who|what|which|where|when|why|how)\\b", Paradigm::CC},
      {"\\b(context|paragraph|passage|according to|evidence)\\b", Paradigm::CC},
  };
}

/// Ordered rule file: a JSON array of {"pattern": regex, "paradigm": "CC|CS|EL"}.
inline std::vector<HeuristicRule> load_heuristic_rules(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open rule table: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, path + ": " + e.what());
  }
  if (!j.is_array()) fail(ErrorCode::ParseError, path + ": rule table must be a JSON array");
  std::vector<HeuristicRule> rules;
  for (const auto& entry : j) {
    HeuristicRule rule;
    rule.pattern = entry.at("pattern").get<std::string>();
    rule.paradigm = parse_paradigm(entry.at("paradigm").get<std::string>());
    rules.push_back(std::move(rule));
  }
  if (rules.empty()) fail(ErrorCode::ParseError, path + ": rule table is empty");
  return rules;
}

class HeuristicRouter : public Router {
 public:
  HeuristicRouter(std::vector<HeuristicRule> rules, Paradigm fallback)
      : rules_(std::move(rules)), fallback_(fallback) {
    compiled_.reserve(rules_.size());
    for (const auto& rule : rules_) {
      try {
        compiled_.emplace_back(rule.pattern, std::regex::ECMAScript | std::regex::icase);
      } catch (const std::regex_error& e) {
        fail(ErrorCode::ConfigError,
             "bad rule pattern '" + rule.pattern + "': " + e.what());
      }
    }
  }

  ParadigmDecision classify(const std::string& question) override {
    ParadigmDecision d;
    d.source = RouterSource::heuristic;
    d.chosen = fallback_;
    for (std::size_t i = 0; i < rules_.size(); ++i) {
      if (std::regex_search(question, compiled_[i])) {
        d.chosen = rules_[i].paradigm;
        break;
      }
    }
    return d;
  }

  const std::vector<HeuristicRule>& rules() const { return rules_; }

 private:
  std::vector<HeuristicRule> rules_;
  std::vector<std::regex> compiled_;
  Paradigm fallback_;
};

/// Builds a decision from classifier logits: softmax then argmax.
inline ParadigmDecision decision_from_logits(const std::map<Paradigm, double>& logits,
                                             RouterSource source) {
  ParadigmDecision d;
  d.logits = logits;
  d.probabilities = softmax(logits);
  d.chosen = argmax_paradigm(*d.probabilities);
  d.source = source;
  return d;
}

}  // namespace acps

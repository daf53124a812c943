#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rufmine/dnf.hpp"
#include "rufmine/network.hpp"

namespace rufmine {

// Weight landscape of a trained network, over present links only. A side
// with no qualifying weights leaves its fields empty.
struct WeightThresholds {
  std::optional<double> p_mean, p_threshold1, p_threshold2;
  std::optional<double> n_mean, n_threshold1, n_threshold2;
};

WeightThresholds compute_thresholds(const ModularNetwork& net);

struct ExtractedRule {
  int class_label = 0;
  SignedConjunct antecedent;  // nonempty
  double cf = 0.0;            // <= 1
};

struct ExtractionOptions {
  int max_antecedent = 5;
  int unit_condition_cap = 64;   // minimal conditions kept per unit
  int composition_cap = 256;     // groundings kept per output condition
  int candidate_cap = 20;        // strongest candidate links per unit side
  int max_rules = 64;
};

// Decompositional search: per hidden/output unit, minimal subsets of strong
// positive links (as positive literals) and strong negative links (as
// negated literals) that exceed the unit bias even when every unlisted
// strong negative input is active; unit conditions compose along paths down
// to the input literals. Each rule carries the path infimum of
// (sum of active weights - bias) / sum of active weights.
std::vector<ExtractedRule> extract_rules(const ModularNetwork& net, const WeightThresholds& th,
                                         const ExtractionOptions& opt = {},
                                         Diagnostics* diag = nullptr);

struct InferResult {
  int class_label = 0;  // 0 = no rule fired
  double cf = 0.0;

  bool fired() const { return class_label > 0; }
};

// A positive literal holds when its membership >= crispness, a negated one
// when it stays below. Among fired rules the highest confidence wins; ties
// go to the lower class index.
InferResult infer(std::span<const ExtractedRule> rules, std::span<const double> fuzzified,
                  double crispness = 0.5);

// Text form: `c5 <- M_2 & H_3 ; cf=0.896`, `!` marks negation.
std::string format_extracted_rule(const ExtractedRule& r);
std::string rules_to_text(std::span<const ExtractedRule> rules);
void write_rules_text(std::span<const ExtractedRule> rules, const std::string& path);

std::string rules_to_json(std::span<const ExtractedRule> rules);
std::vector<ExtractedRule> rules_from_json(const std::string& content);
void write_rules_json(std::span<const ExtractedRule> rules, const std::string& path);
std::vector<ExtractedRule> read_rules_json(const std::string& path);

}  // namespace rufmine

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rufmine/extraction.hpp"
#include "rufmine/network.hpp"

namespace rufmine {

// l x l counts, rows = actual class, columns = predicted class, plus a
// separate per-class tally of patterns no rule fired on (those stay out of
// the matrix proper).
struct ConfusionMatrix {
  int classes = 0;
  std::vector<int64_t> counts;   // row-major, (actual-1) * l + (predicted-1)
  std::vector<int64_t> no_fire;  // per actual class

  explicit ConfusionMatrix(int l = 0);
  void add(int actual, int predicted);  // predicted 0 records a no-fire
  int64_t at(int actual, int predicted) const;
  int64_t row_sum(int actual) const;
  int64_t column_sum(int predicted) const;
  int64_t total() const;          // classified patterns only
  int64_t total_no_fire() const;
  void validate() const;
};

struct PerClassReport {
  std::vector<std::optional<double>> per_class;  // absent when undefined
  std::optional<double> overall;
};

// Correct-classification percentages; classes with an empty row are absent.
PerClassReport accuracy(const ConfusionMatrix& m);

// Purity of each predicted region, as a ratio; empty columns are absent.
std::vector<std::optional<double>> users_accuracy(const ConfusionMatrix& m);

// Chance-corrected agreement. The overall value sums the per-class
// numerators and denominators.
PerClassReport kappa(const ConfusionMatrix& m);

struct ConfusionIndexReport {
  double value = 0.0;
  bool degenerate = false;  // every off-diagonal cell was zero
};

// Number of off-diagonal cells at or above the off-diagonal mean, over l.
ConfusionIndexReport confusion_index(const ConfusionMatrix& m);

// Two-sample mean-difference statistic with unequal unknown variances.
double behrens_fisher(double mean1, double sd1, int n1, double mean2, double sd2, int n2);

// Percentage of patterns on which the rule base and the network agree: a
// fired rule must match the network argmax; a no-fire pattern counts as
// agreement only when the network asserts no class either (max <= 0.5 or an
// exact tie).
double fidelity(const ModularNetwork& net, std::span<const ExtractedRule> rules,
                std::span<const std::vector<double>> fuzzified_test, double crispness = 0.5);

// Percentage of patterns no rule fires on.
double cover_uncovered(std::span<const ExtractedRule> rules,
                       std::span<const std::vector<double>> fuzzified_test,
                       double crispness = 0.5);

struct MetricsReport {
  std::string model = "S";
  std::optional<double> accuracy;           // rule-base test accuracy, percent
  std::vector<std::optional<double>> accuracy_per_class;
  std::optional<double> network_accuracy;   // parent-network test accuracy, percent
  std::vector<std::optional<double>> users_accuracy;
  std::optional<double> kappa;
  std::vector<std::optional<double>> kappa_per_class;
  double fidelity = 0.0;
  double conf = 0.0;
  bool conf_degenerate = false;
  double uncovered = 0.0;
  int64_t rules = 0;
  double cpu_sec = 0.0;          // extraction wall time, 2-decimal rounded
  double certainty_mean = 0.0;
  double certainty_min = 0.0;

  std::string to_json() const;
  static MetricsReport from_json(const std::string& content);
  void write_json(const std::string& path) const;
};

}  // namespace rufmine

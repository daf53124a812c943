#pragma once

#include <span>
#include <string>
#include <vector>

#include "rufmine/decision_table.hpp"

namespace rufmine {

// Bell-shaped membership function: 1 at the center, 0 at distance >= radius.
struct PiParams {
  double center = 0.0;
  double radius = 1.0;  // > 0
};

double pi_membership(double x, const PiParams& p);

// Per-feature low/medium/high term parameters. Input patterns of length n
// map to 3n memberships ordered [L_1, M_1, H_1, L_2, ...].
struct FuzzyEncoding {
  struct FeatureTerms {
    PiParams low, medium, high;
  };
  std::vector<FeatureTerms> features;

  size_t feature_count() const { return features.size(); }
  const PiParams& term(size_t feature, int term_index) const;  // 0=L,1=M,2=H
};

std::vector<double> fuzzify(std::span<const double> pattern, const FuzzyEncoding& enc);

// Centers at the 25th/50th/75th percentiles of each training feature;
// radii sized so adjacent terms cross near membership 0.5.
FuzzyEncoding init_encoding(const DecisionTable& train);

// Per-class feature means and spreads for the weighted pattern distance.
// Zero spreads are replaced by 1e-6 of the feature's global range.
struct ClassStatistics {
  std::vector<std::vector<double>> mean;    // [class-1][feature]
  std::vector<std::vector<double>> spread;  // componentwise > 0

  size_t class_count() const { return mean.size(); }
};

ClassStatistics compute_class_statistics(const DecisionTable& train);

struct FuzzyGenerators {
  double f_d = 1.0;  // denominational, > 0
  double f_e = 1.0;  // exponential, > 0
};

// f_d = mean within-class weighted distance over the training set, f_e = 1.
FuzzyGenerators init_generators(const DecisionTable& train, const ClassStatistics& stats);

// Weighted distance of a pattern from class k (1-based).
double weighted_distance(std::span<const double> pattern, const ClassStatistics& stats, int k);

// Memberships mu_k = 1 / (1 + (z_k / f_d)^f_e) for every class.
std::vector<double> class_membership(std::span<const double> pattern, const ClassStatistics& stats,
                                     const FuzzyGenerators& gen);

// JSON: {"features":[{"L":{"c":..,"lambda":..},"M":{..},"H":{..}},..],
//        "generators":{"f_d":..,"f_e":..}}
std::string encoding_to_json(const FuzzyEncoding& enc, const FuzzyGenerators& gen);
void write_encoding_json(const FuzzyEncoding& enc, const FuzzyGenerators& gen,
                         const std::string& path);
void parse_encoding_json(const std::string& content, FuzzyEncoding& enc, FuzzyGenerators& gen);
void read_encoding_json(const std::string& path, FuzzyEncoding& enc, FuzzyGenerators& gen);

}  // namespace rufmine

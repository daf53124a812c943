#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "rufmine/diagnostics.hpp"

namespace rufmine {

// Attribute-value table: objects are row indices, attributes are named
// columns. A missing cell is stored as NaN.
struct InformationSystem {
  std::vector<std::string> attribute_names;
  std::vector<std::vector<double>> rows;  // rows[object][attribute]

  static double missing_marker() { return std::nan(""); }
  static bool is_missing(double v) { return std::isnan(v); }

  size_t object_count() const { return rows.size(); }
  size_t attribute_count() const { return attribute_names.size(); }

  bool has_missing() const;
  void validate() const;  // throws ValidationError
};

// Information system plus a per-object class label in 1..l.
struct DecisionTable {
  InformationSystem base;
  std::vector<int> decisions;

  size_t object_count() const { return base.object_count(); }
  size_t attribute_count() const { return base.attribute_count(); }
  int class_count() const;                     // max label after validate()
  std::vector<size_t> class_sizes() const;     // indexed by label-1
  void validate() const;                       // labels contiguous 1..l, each nonempty
};

// Per-attribute candidate or selected cut points, strictly increasing.
struct CutSet {
  std::vector<std::vector<double>> cuts;  // cuts[attribute]

  size_t total() const;
};

enum class CompletionPolicy { Drop, Mean };

CompletionPolicy completion_policy_from_string(const std::string& s);

// Removes or fills missing cells. `Drop` removes offending objects; `Mean`
// substitutes the attribute mean over non-missing cells of this table.
DecisionTable complete_table(const DecisionTable& t, CompletionPolicy policy,
                             Diagnostics* diag = nullptr);

// Midpoint cuts between consecutive distinct attribute values whose value
// groups span more than one decision class.
CutSet candidate_cuts(const DecisionTable& t);

struct RsbrResult {
  DecisionTable table;   // attribute values replaced by interval indices
  CutSet selected;       // minimal cut subset actually used
};

// Greedy minimal-cut selection preserving every inter-class object
// discernibility the full candidate set provides. Pairs no candidate cut can
// separate are reported through `diag` and excluded from the cover.
RsbrResult rsbr_discretize(const DecisionTable& t, const CutSet& cuts,
                           Diagnostics* diag = nullptr);

struct SplitResult {
  DecisionTable train;
  DecisionTable test;
  std::vector<size_t> train_indices;  // rows of the source table, ascending
  std::vector<size_t> test_indices;
};

// Stratified-by-class split, deterministic for a fixed seed.
SplitResult split(const DecisionTable& t, double fraction, uint64_t seed);

// CSV: header row of attribute names, final column `class`; missing cells
// are empty strings.
DecisionTable read_decision_table_csv(const std::string& path);
void write_decision_table_csv(const DecisionTable& t, const std::string& path);
DecisionTable parse_decision_table_csv(const std::string& content);
std::string decision_table_to_csv(const DecisionTable& t);

// Cut sets as a JSON array of {"attribute": name, "cuts": [..]}.
std::string cuts_to_json(const CutSet& cuts, const std::vector<std::string>& attribute_names);
void write_cuts_json(const CutSet& cuts, const std::vector<std::string>& attribute_names,
                     const std::string& path);

}  // namespace rufmine

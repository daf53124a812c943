#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rufmine/decision_table.hpp"
#include "rufmine/dnf.hpp"

namespace rufmine {

// Lower-triangle matrix of attribute sets; cell(i,j) holds the attributes on
// which objects i and j differ. Symmetric by construction.
struct DiscernibilityMatrix {
  size_t size = 0;
  std::vector<AttrMask> cells;  // index (i,j), j < i

  AttrMask cell(size_t i, size_t j) const;
  void set_cell(size_t i, size_t j, AttrMask m);
  static DiscernibilityMatrix empty(size_t n);
};

// Crisp matrix over a complete, discretized table (exact value comparison).
DiscernibilityMatrix discernibility_matrix(const DecisionTable& t);

// Rows of fuzzified patterns: one object per row, 3n membership columns.
using MembershipTable = std::vector<std::vector<double>>;

// Threshold matrix over membership rows: attributes whose values differ by
// more than th. th must lie in (0,1).
DiscernibilityMatrix fuzzy_discernibility_matrix(const MembershipTable& rows, double th);
DiscernibilityMatrix fuzzy_discernibility_matrix(const MembershipTable& rows,
                                                 std::span<const double> per_attr_th);

// All minimal attribute subsets inducing the same object partition as the
// full attribute set (prime implicants of the discernibility function).
// Exact enumeration; refuses tables wider than 20 attributes.
std::vector<AttrMask> reducts(const DecisionTable& t);

struct DependencyRule {
  int class_label = 0;     // 1-based
  DnfFormula formula;      // positive linguistic literals
  double df = 0.0;         // dependency factor in [0,1]
};

// Threshold selection for the membership-valued discernibility test.
// Without a global override, each class/attribute pair gets
// max(floor, scale * max pairwise membership difference in the class table).
struct ThPolicy {
  std::optional<double> global;  // must lie in (0,1) when set
  double scale = 0.5;
  double floor = 0.1;
};

// One rule per class from the per-class membership tables: each class object
// contributes the DNF of its discernibility function against all objects of
// the other classes; conjuncts are unioned and absorbed. The dependency
// factor is the fraction of class objects whose threshold-indiscernibility
// neighbourhood is pure.
std::vector<DependencyRule> dependency_rules(const std::vector<MembershipTable>& per_class_tables,
                                             const ThPolicy& policy = {},
                                             const DnfLimits& limits = {},
                                             Diagnostics* diag = nullptr);

// Variant keeping distinct per-object formulas as separate rules (several
// crude rules per class, as a modular evolution wants for its pools).
// Duplicates collapse; the most frequent formulas are kept per class.
std::vector<DependencyRule> dependency_rules_split(
    const std::vector<MembershipTable>& per_class_tables, const ThPolicy& policy = {},
    const DnfLimits& limits = {}, int max_rules_per_class = 4, Diagnostics* diag = nullptr);

// Text form: `c1 <- (L_1 & M_2) | H_3 ; df=1.000`
std::string format_dependency_rule(const DependencyRule& r);
std::string dependency_rules_to_text(std::span<const DependencyRule> rules);
void write_dependency_rules(std::span<const DependencyRule> rules, const std::string& path);

}  // namespace rufmine

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rufmine/diagnostics.hpp"

namespace rufmine {

// Attribute sets are bitmasks; the library caps attribute universes at 64,
// far above the 3n linguistic attributes this pipeline produces.
using AttrMask = uint64_t;

constexpr size_t kMaxAttributes = 64;

int popcount_mask(AttrMask m);
std::vector<int> mask_to_attrs(AttrMask m);

// Names the 3n linguistic attributes: index 0 -> L_1, 1 -> M_1, 2 -> H_1,
// 3 -> L_2, ...
std::string linguistic_attr_name(int attr);

// Conjunction of clauses; each clause is a disjunction over the attributes
// set in its mask. An empty clause list is the constant true.
struct CnfFormula {
  std::vector<AttrMask> clauses;

  bool evaluate(AttrMask assignment) const;
};

// Disjunction of conjuncts over positive literals, kept canonical: no
// conjunct is a superset of another, order is (literal count, mask value).
struct DnfFormula {
  std::vector<AttrMask> conjuncts;

  static DnfFormula canonical(std::vector<AttrMask> conjuncts);
  bool is_true() const { return conjuncts.size() == 1 && conjuncts[0] == 0; }
  bool evaluate(AttrMask assignment) const;
  AttrMask attribute_union() const;
};

struct DnfLimits {
  int max_conjunct_literals = 6;  // longer products are dropped (and logged)
  int max_conjuncts = 64;         // canonical prefix kept beyond this
};

// Distributes a CNF into DNF with absorption after every step. Exact while
// neither limit is hit; hits are reported through diag.
DnfFormula cnf_to_dnf(const CnfFormula& cnf, const DnfLimits& limits = {},
                      Diagnostics* diag = nullptr);

// Conjunct with explicit negated literals; used by the network encoder and
// the rule extractor (dependency rules themselves are negation-free).
struct SignedConjunct {
  AttrMask positive = 0;
  AttrMask negated = 0;

  bool evaluate(AttrMask assignment) const {
    return (positive & assignment) == positive && (negated & assignment) == 0;
  }
  int literal_count() const { return popcount_mask(positive) + popcount_mask(negated); }
};

struct SignedDnf {
  std::vector<SignedConjunct> conjuncts;

  bool evaluate(AttrMask assignment) const {
    for (const auto& c : conjuncts)
      if (c.evaluate(assignment)) return true;
    return false;
  }
  AttrMask attribute_union() const {
    AttrMask m = 0;
    for (const auto& c : conjuncts) m |= c.positive | c.negated;
    return m;
  }
};

std::string format_conjunct(const SignedConjunct& c);

}  // namespace rufmine

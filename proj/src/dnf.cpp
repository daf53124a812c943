#include "rufmine/dnf.hpp"

#include <algorithm>
#include <bit>

namespace rufmine {

int popcount_mask(AttrMask m) { return std::popcount(m); }

std::vector<int> mask_to_attrs(AttrMask m) {
  std::vector<int> out;
  for (int a = 0; a < static_cast<int>(kMaxAttributes); ++a)
    if (m & (AttrMask{1} << a)) out.push_back(a);
  return out;
}

std::string linguistic_attr_name(int attr) {
  static const char* terms[3] = {"L", "M", "H"};
  return std::string(terms[attr % 3]) + "_" + std::to_string(attr / 3 + 1);
}

bool CnfFormula::evaluate(AttrMask assignment) const {
  for (AttrMask clause : clauses)
    if ((clause & assignment) == 0) return false;
  return true;
}

namespace {

bool conjunct_less(AttrMask a, AttrMask b) {
  const int pa = popcount_mask(a), pb = popcount_mask(b);
  if (pa != pb) return pa < pb;
  return a < b;
}

// Removes conjuncts that are supersets of another (absorption) and sorts.
std::vector<AttrMask> absorb(std::vector<AttrMask> conjuncts) {
  std::sort(conjuncts.begin(), conjuncts.end(), conjunct_less);
  conjuncts.erase(std::unique(conjuncts.begin(), conjuncts.end()), conjuncts.end());
  std::vector<AttrMask> kept;
  for (AttrMask c : conjuncts) {
    bool absorbed = false;
    for (AttrMask k : kept) {
      if ((k & c) == k) {  // k subset of c: c is redundant
        absorbed = true;
        break;
      }
    }
    if (!absorbed) kept.push_back(c);
  }
  return kept;
}

}  // namespace

DnfFormula DnfFormula::canonical(std::vector<AttrMask> conjuncts) {
  DnfFormula f;
  f.conjuncts = absorb(std::move(conjuncts));
  return f;
}

bool DnfFormula::evaluate(AttrMask assignment) const {
  for (AttrMask c : conjuncts)
    if ((c & assignment) == c) return true;
  return false;
}

AttrMask DnfFormula::attribute_union() const {
  AttrMask m = 0;
  for (AttrMask c : conjuncts) m |= c;
  return m;
}

DnfFormula cnf_to_dnf(const CnfFormula& cnf, const DnfLimits& limits, Diagnostics* diag) {
  // Empty CNF is the constant true: one empty conjunct.
  std::vector<AttrMask> acc = {0};
  size_t literal_cap_hits = 0;
  size_t conjunct_cap_hits = 0;

  for (AttrMask clause : cnf.clauses) {
    if (clause == 0) {
      // An empty clause makes the whole formula false.
      return DnfFormula{};
    }
    std::vector<AttrMask> next;
    next.reserve(acc.size() * static_cast<size_t>(popcount_mask(clause)));
    for (AttrMask conj : acc) {
      for (int a : mask_to_attrs(clause)) {
        const AttrMask grown = conj | (AttrMask{1} << a);
        if (popcount_mask(grown) > limits.max_conjunct_literals) {
          ++literal_cap_hits;
          continue;
        }
        next.push_back(grown);
      }
    }
    next = absorb(std::move(next));
    if (next.size() > static_cast<size_t>(limits.max_conjuncts)) {
      conjunct_cap_hits += next.size() - static_cast<size_t>(limits.max_conjuncts);
      next.resize(static_cast<size_t>(limits.max_conjuncts));
    }
    acc = std::move(next);
    if (acc.empty()) break;  // everything got capped away
  }

  if (literal_cap_hits > 0)
    warn_into(diag, "cnf_to_dnf dropped " + std::to_string(literal_cap_hits) +
                        " product(s) longer than " + std::to_string(limits.max_conjunct_literals) +
                        " literals");
  if (conjunct_cap_hits > 0)
    warn_into(diag, "cnf_to_dnf truncated " + std::to_string(conjunct_cap_hits) +
                        " conjunct(s) beyond the cap of " + std::to_string(limits.max_conjuncts));

  return DnfFormula::canonical(std::move(acc));
}

std::string format_conjunct(const SignedConjunct& c) {
  std::string out;
  bool first = true;
  for (int a : mask_to_attrs(c.positive)) {
    if (!first) out += " & ";
    out += linguistic_attr_name(a);
    first = false;
  }
  for (int a : mask_to_attrs(c.negated)) {
    if (!first) out += " & ";
    out += "!" + linguistic_attr_name(a);
    first = false;
  }
  return out;
}

}  // namespace rufmine

#include "rufmine/rough.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

namespace rufmine {

AttrMask DiscernibilityMatrix::cell(size_t i, size_t j) const {
  if (i == j) return 0;
  if (i < j) std::swap(i, j);
  return cells[i * (i - 1) / 2 + j];
}

void DiscernibilityMatrix::set_cell(size_t i, size_t j, AttrMask m) {
  if (i < j) std::swap(i, j);
  cells[i * (i - 1) / 2 + j] = m;
}

DiscernibilityMatrix DiscernibilityMatrix::empty(size_t n) {
  DiscernibilityMatrix m;
  m.size = n;
  m.cells.assign(n * (n - 1) / 2, 0);
  return m;
}

DiscernibilityMatrix discernibility_matrix(const DecisionTable& t) {
  t.validate();
  if (t.base.has_missing()) throw ValidationError("discernibility matrix requires a complete table");
  if (t.attribute_count() > kMaxAttributes)
    throw ValidationError("at most 64 attributes supported");

  const size_t n = t.object_count();
  auto m = DiscernibilityMatrix::empty(n);
  for (size_t i = 1; i < n; ++i) {
    for (size_t j = 0; j < i; ++j) {
      AttrMask mask = 0;
      for (size_t a = 0; a < t.attribute_count(); ++a)
        if (t.base.rows[i][a] != t.base.rows[j][a]) mask |= AttrMask{1} << a;
      m.set_cell(i, j, mask);
    }
  }
  return m;
}

namespace {

void check_membership_rows(const MembershipTable& rows) {
  if (rows.empty()) throw ValidationError("membership table is empty");
  const size_t width = rows[0].size();
  if (width == 0 || width > kMaxAttributes)
    throw ValidationError("membership table width must be in 1..64");
  for (const auto& r : rows) {
    if (r.size() != width) throw ValidationError("ragged membership table");
    for (double v : r)
      if (!(v >= -1e-9 && v <= 1.0 + 1e-9))
        throw ValidationError("membership value outside [0,1]");
  }
}

AttrMask threshold_cell(std::span<const double> a, std::span<const double> b,
                        std::span<const double> th) {
  AttrMask mask = 0;
  for (size_t k = 0; k < a.size(); ++k)
    if (std::abs(a[k] - b[k]) > th[k]) mask |= AttrMask{1} << k;
  return mask;
}

// Directional variant for rule building: an attribute discriminates FOR the
// target object only when the target's membership exceeds the foreign one by
// more than the threshold. Rule literals are positive requirements, so a
// difference in the other direction is no evidence for the target's class.
AttrMask directional_cell(std::span<const double> target, std::span<const double> other,
                          std::span<const double> th) {
  AttrMask mask = 0;
  for (size_t k = 0; k < target.size(); ++k)
    if (target[k] - other[k] > th[k]) mask |= AttrMask{1} << k;
  return mask;
}

}  // namespace

DiscernibilityMatrix fuzzy_discernibility_matrix(const MembershipTable& rows, double th) {
  if (!(th > 0.0 && th < 1.0)) throw ParameterError("threshold must lie in (0,1)");
  check_membership_rows(rows);
  std::vector<double> ths(rows[0].size(), th);
  return fuzzy_discernibility_matrix(rows, ths);
}

DiscernibilityMatrix fuzzy_discernibility_matrix(const MembershipTable& rows,
                                                 std::span<const double> per_attr_th) {
  check_membership_rows(rows);
  if (per_attr_th.size() != rows[0].size())
    throw ParameterError("per-attribute threshold vector has wrong width");
  for (double th : per_attr_th)
    if (!(th > 0.0 && th < 1.0)) throw ParameterError("threshold must lie in (0,1)");

  const size_t n = rows.size();
  auto m = DiscernibilityMatrix::empty(n);
  for (size_t i = 1; i < n; ++i)
    for (size_t j = 0; j < i; ++j)
      m.set_cell(i, j, threshold_cell(rows[i], rows[j], per_attr_th));
  return m;
}

namespace {

// Keeps only minimal cells: any set hitting a subset cell hits its supersets.
std::vector<AttrMask> minimal_cells(std::vector<AttrMask> cells) {
  std::sort(cells.begin(), cells.end(),
            [](AttrMask a, AttrMask b) {
              const int pa = popcount_mask(a), pb = popcount_mask(b);
              if (pa != pb) return pa < pb;
              return a < b;
            });
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  std::vector<AttrMask> kept;
  for (AttrMask c : cells) {
    bool redundant = false;
    for (AttrMask k : kept)
      if ((k & c) == k) { redundant = true; break; }
    if (!redundant) kept.push_back(c);
  }
  return kept;
}

bool hits_all(AttrMask chosen, const std::vector<AttrMask>& cells) {
  for (AttrMask c : cells)
    if ((c & chosen) == 0) return false;
  return true;
}

bool is_prime(AttrMask chosen, const std::vector<AttrMask>& cells) {
  for (int a : mask_to_attrs(chosen)) {
    const AttrMask without = chosen & ~(AttrMask{1} << a);
    if (hits_all(without, cells)) return false;
  }
  return true;
}

void enumerate_hitting_sets(const std::vector<AttrMask>& cells, AttrMask chosen,
                            std::set<AttrMask>& out) {
  // First cell not hit yet; every minimal hitting set extends through one of
  // its attributes.
  AttrMask open = 0;
  for (AttrMask c : cells)
    if ((c & chosen) == 0) { open = c; break; }
  if (open == 0) {
    if (is_prime(chosen, cells)) out.insert(chosen);
    return;
  }
  for (int a : mask_to_attrs(open))
    enumerate_hitting_sets(cells, chosen | (AttrMask{1} << a), out);
}

}  // namespace

std::vector<AttrMask> reducts(const DecisionTable& t) {
  t.validate();
  if (t.base.has_missing()) throw ValidationError("reducts require a complete table");
  if (t.attribute_count() > 20)
    throw ValidationError("reducts: attribute budget is 20 (got " +
                          std::to_string(t.attribute_count()) +
                          "); use the per-class d-reduct workflow for wider tables");

  const auto matrix = discernibility_matrix(t);
  std::vector<AttrMask> cells;
  for (AttrMask c : matrix.cells)
    if (c != 0) cells.push_back(c);
  cells = minimal_cells(std::move(cells));

  if (cells.empty()) return {0};  // nothing to discern: the empty reduct

  std::set<AttrMask> found;
  enumerate_hitting_sets(cells, 0, found);

  std::vector<AttrMask> out(found.begin(), found.end());
  std::sort(out.begin(), out.end(), [](AttrMask a, AttrMask b) {
    const int pa = popcount_mask(a), pb = popcount_mask(b);
    if (pa != pb) return pa < pb;
    return a < b;
  });
  return out;
}

namespace {

// max(floor, scale * (column max - column min)) per attribute, clamped into
// the open interval (0,1).
std::vector<double> adaptive_thresholds(const MembershipTable& rows, const ThPolicy& policy) {
  const size_t width = rows[0].size();
  std::vector<double> th(width, policy.floor);
  for (size_t a = 0; a < width; ++a) {
    double lo = rows[0][a], hi = rows[0][a];
    for (const auto& r : rows) {
      lo = std::min(lo, r[a]);
      hi = std::max(hi, r[a]);
    }
    th[a] = std::max(policy.floor, policy.scale * (hi - lo));
    th[a] = std::min(th[a], 0.999);
    th[a] = std::max(th[a], 1e-6);
  }
  return th;
}

}  // namespace

namespace {

struct RuleBuildContext {
  std::vector<std::vector<double>> th;          // per class, per attribute
  std::vector<std::vector<DnfFormula>> object_dnf;  // per class, contributing objects
  std::vector<double> df;                       // per class
};

RuleBuildContext build_rule_context(const std::vector<MembershipTable>& per_class_tables,
                                    const ThPolicy& policy, const DnfLimits& limits,
                                    Diagnostics* diag) {
  if (per_class_tables.empty()) throw ValidationError("no class tables given");
  for (size_t k = 0; k < per_class_tables.size(); ++k) {
    if (per_class_tables[k].empty())
      throw ValidationError("class " + std::to_string(k + 1) + " has an empty membership table");
    check_membership_rows(per_class_tables[k]);
  }
  const size_t width = per_class_tables[0][0].size();
  for (const auto& t : per_class_tables)
    if (t[0].size() != width) throw ValidationError("class tables disagree on attribute count");
  if (policy.global && !(*policy.global > 0.0 && *policy.global < 1.0))
    throw ParameterError("threshold override must lie in (0,1)");

  const size_t l = per_class_tables.size();
  RuleBuildContext ctx;
  ctx.th.resize(l);
  for (size_t k = 0; k < l; ++k) {
    if (policy.global)
      ctx.th[k].assign(width, *policy.global);
    else
      ctx.th[k] = adaptive_thresholds(per_class_tables[k], policy);
  }

  ctx.object_dnf.resize(l);
  for (size_t k = 0; k < l; ++k) {
    const auto& mine = per_class_tables[k];
    size_t vacuous = 0;
    for (size_t j = 0; j < mine.size(); ++j) {
      // Clauses: attributes separating this object from each object of every
      // other class; empty cells impose nothing.
      CnfFormula cnf;
      for (size_t k2 = 0; k2 < l; ++k2) {
        if (k2 == k) continue;
        for (const auto& other : per_class_tables[k2]) {
          const AttrMask cell = directional_cell(mine[j], other, ctx.th[k]);
          if (cell != 0) cnf.clauses.push_back(cell);
        }
      }
      if (cnf.clauses.empty()) {
        ++vacuous;  // indiscernible from every foreign object
        continue;
      }
      ctx.object_dnf[k].push_back(cnf_to_dnf(cnf, limits, diag));
    }
    if (vacuous > 0)
      warn_into(diag, "class " + std::to_string(k + 1) + ": " + std::to_string(vacuous) +
                          " object(s) indiscernible from every other class; excluded from the rule union");
  }

  // Dependency factor: fraction of class objects whose threshold
  // neighbourhood (all attribute differences <= th) contains no foreign
  // object. Consistent tables give df = 1.
  ctx.df.resize(l);
  for (size_t k = 0; k < l; ++k) {
    const auto& mine = per_class_tables[k];
    size_t pure = 0;
    for (const auto& row : mine) {
      bool clash = false;
      for (size_t k2 = 0; k2 < l && !clash; ++k2) {
        if (k2 == k) continue;
        for (const auto& other : per_class_tables[k2]) {
          if (threshold_cell(row, other, ctx.th[k]) == 0) { clash = true; break; }
        }
      }
      if (!clash) ++pure;
    }
    ctx.df[k] = static_cast<double>(pure) / static_cast<double>(mine.size());
  }
  return ctx;
}

}  // namespace

std::vector<DependencyRule> dependency_rules(const std::vector<MembershipTable>& per_class_tables,
                                             const ThPolicy& policy, const DnfLimits& limits,
                                             Diagnostics* diag) {
  const auto ctx = build_rule_context(per_class_tables, policy, limits, diag);
  const size_t l = per_class_tables.size();

  std::vector<DependencyRule> rules;
  rules.reserve(l);
  for (size_t k = 0; k < l; ++k) {
    std::vector<AttrMask> conjuncts;
    for (const auto& dnf : ctx.object_dnf[k])
      conjuncts.insert(conjuncts.end(), dnf.conjuncts.begin(), dnf.conjuncts.end());

    DependencyRule r;
    r.class_label = static_cast<int>(k + 1);
    r.df = ctx.df[k];
    if (conjuncts.empty()) {
      r.formula.conjuncts = {0};  // vacuously true rule
      warn_into(diag, "class " + std::to_string(k + 1) + ": no discerning attributes; rule is vacuous");
    } else {
      r.formula = DnfFormula::canonical(std::move(conjuncts));
      if (r.formula.conjuncts.size() > static_cast<size_t>(limits.max_conjuncts)) {
        warn_into(diag, "class " + std::to_string(k + 1) + ": rule truncated to " +
                            std::to_string(limits.max_conjuncts) + " conjuncts");
        r.formula.conjuncts.resize(static_cast<size_t>(limits.max_conjuncts));
      }
    }
    rules.push_back(std::move(r));
  }
  return rules;
}

std::vector<DependencyRule> dependency_rules_split(
    const std::vector<MembershipTable>& per_class_tables, const ThPolicy& policy,
    const DnfLimits& limits, int max_rules_per_class, Diagnostics* diag) {
  if (max_rules_per_class < 1) throw ParameterError("max_rules_per_class must be >= 1");
  const auto ctx = build_rule_context(per_class_tables, policy, limits, diag);
  const size_t l = per_class_tables.size();

  std::vector<DependencyRule> rules;
  for (size_t k = 0; k < l; ++k) {
    // Group identical per-object formulas; keep the most frequent ones.
    std::vector<std::pair<DnfFormula, size_t>> groups;
    for (const auto& dnf : ctx.object_dnf[k]) {
      bool found = false;
      for (auto& [formula, count] : groups)
        if (formula.conjuncts == dnf.conjuncts) {
          ++count;
          found = true;
          break;
        }
      if (!found) groups.emplace_back(dnf, 1);
    }

    if (groups.empty()) {
      DependencyRule r;
      r.class_label = static_cast<int>(k + 1);
      r.formula.conjuncts = {0};
      r.df = ctx.df[k];
      warn_into(diag, "class " + std::to_string(k + 1) + ": no discerning attributes; rule is vacuous");
      rules.push_back(std::move(r));
      continue;
    }

    std::stable_sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      size_t la = 0, lb = 0;
      for (AttrMask m : a.first.conjuncts) la += static_cast<size_t>(popcount_mask(m));
      for (AttrMask m : b.first.conjuncts) lb += static_cast<size_t>(popcount_mask(m));
      if (la != lb) return la < lb;
      return a.first.conjuncts < b.first.conjuncts;
    });
    if (groups.size() > static_cast<size_t>(max_rules_per_class))
      groups.resize(static_cast<size_t>(max_rules_per_class));

    for (auto& [formula, count] : groups) {
      DependencyRule r;
      r.class_label = static_cast<int>(k + 1);
      r.formula = formula;
      r.df = ctx.df[k];
      if (r.formula.conjuncts.size() > static_cast<size_t>(limits.max_conjuncts))
        r.formula.conjuncts.resize(static_cast<size_t>(limits.max_conjuncts));
      rules.push_back(std::move(r));
    }
  }
  return rules;
}

std::string format_dependency_rule(const DependencyRule& r) {
  std::string out = "c" + std::to_string(r.class_label) + " <- ";
  if (r.formula.conjuncts.empty()) {
    out += "false";
  } else if (r.formula.is_true()) {
    out += "true";
  } else {
    bool first_conj = true;
    for (AttrMask c : r.formula.conjuncts) {
      if (!first_conj) out += " | ";
      first_conj = false;
      const auto attrs = mask_to_attrs(c);
      if (attrs.size() == 1) {
        out += linguistic_attr_name(attrs[0]);
      } else {
        out += "(";
        for (size_t i = 0; i < attrs.size(); ++i) {
          if (i > 0) out += " & ";
          out += linguistic_attr_name(attrs[i]);
        }
        out += ")";
      }
    }
  }
  char df[32];
  std::snprintf(df, sizeof(df), " ; df=%.3f", r.df);
  return out + df;
}

std::string dependency_rules_to_text(std::span<const DependencyRule> rules) {
  std::string out;
  for (const auto& r : rules) out += format_dependency_rule(r) + "\n";
  return out;
}

void write_dependency_rules(std::span<const DependencyRule> rules, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << dependency_rules_to_text(rules);
}

}  // namespace rufmine

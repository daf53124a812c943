#include "rufmine/decision_table.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rufmine/rng.hpp"
#include "rufmine/util.hpp"

namespace rufmine {

bool InformationSystem::has_missing() const {
  for (const auto& row : rows)
    for (double v : row)
      if (is_missing(v)) return true;
  return false;
}

void InformationSystem::validate() const {
  if (rows.empty()) throw ValidationError("information system has no objects");
  if (attribute_names.empty()) throw ValidationError("information system has no attributes");
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != attribute_names.size())
      throw ValidationError("object " + std::to_string(i) + " has " +
                            std::to_string(rows[i].size()) + " cells, expected " +
                            std::to_string(attribute_names.size()));
  }
}

int DecisionTable::class_count() const {
  int l = 0;
  for (int d : decisions) l = std::max(l, d);
  return l;
}

std::vector<size_t> DecisionTable::class_sizes() const {
  std::vector<size_t> sizes(static_cast<size_t>(class_count()), 0);
  for (int d : decisions) sizes[static_cast<size_t>(d - 1)]++;
  return sizes;
}

void DecisionTable::validate() const {
  base.validate();
  if (decisions.size() != base.object_count())
    throw ValidationError("decision count does not match object count");
  int l = 0;
  for (int d : decisions) {
    if (d < 1) throw ValidationError("class labels must be >= 1");
    l = std::max(l, d);
  }
  std::vector<bool> seen(static_cast<size_t>(l), false);
  for (int d : decisions) seen[static_cast<size_t>(d - 1)] = true;
  for (int k = 0; k < l; ++k)
    if (!seen[static_cast<size_t>(k)])
      throw ValidationError("class " + std::to_string(k + 1) + " is empty; labels must be contiguous 1..l");
}

size_t CutSet::total() const {
  size_t n = 0;
  for (const auto& c : cuts) n += c.size();
  return n;
}

CompletionPolicy completion_policy_from_string(const std::string& s) {
  if (s == "drop") return CompletionPolicy::Drop;
  if (s == "mean") return CompletionPolicy::Mean;
  throw ParameterError("unknown completion policy '" + s + "' (expected drop|mean)");
}

DecisionTable complete_table(const DecisionTable& t, CompletionPolicy policy, Diagnostics* diag) {
  t.validate();
  const size_t m = t.attribute_count();

  DecisionTable out;
  out.base.attribute_names = t.base.attribute_names;

  if (policy == CompletionPolicy::Drop) {
    size_t dropped = 0;
    for (size_t i = 0; i < t.object_count(); ++i) {
      bool missing = false;
      for (double v : t.base.rows[i])
        if (InformationSystem::is_missing(v)) { missing = true; break; }
      if (missing) {
        ++dropped;
        continue;
      }
      out.base.rows.push_back(t.base.rows[i]);
      out.decisions.push_back(t.decisions[i]);
    }
    if (out.base.rows.empty())
      throw ValidationError("completion removed every object (all rows had missing cells)");
    if (dropped > 0) warn_into(diag, "completion dropped " + std::to_string(dropped) + " object(s)");
  } else {
    std::vector<double> mean(m, 0.0);
    for (size_t a = 0; a < m; ++a) {
      double sum = 0.0;
      size_t n = 0;
      for (const auto& row : t.base.rows)
        if (!InformationSystem::is_missing(row[a])) { sum += row[a]; ++n; }
      if (n == 0)
        throw ValidationError("attribute '" + t.base.attribute_names[a] +
                              "' has no observed values; mean completion impossible");
      mean[a] = sum / static_cast<double>(n);
    }
    out.base.rows = t.base.rows;
    out.decisions = t.decisions;
    size_t filled = 0;
    for (auto& row : out.base.rows)
      for (size_t a = 0; a < m; ++a)
        if (InformationSystem::is_missing(row[a])) { row[a] = mean[a]; ++filled; }
    if (filled > 0) warn_into(diag, "completion filled " + std::to_string(filled) + " cell(s) with attribute means");
  }

  // Classes may disappear under Drop; relabel is not attempted, the caller
  // sees the validation error instead.
  out.validate();
  return out;
}

CutSet candidate_cuts(const DecisionTable& t) {
  t.validate();
  if (t.base.has_missing()) throw ValidationError("candidate_cuts requires a complete table");

  const size_t m = t.attribute_count();
  CutSet out;
  out.cuts.resize(m);

  for (size_t a = 0; a < m; ++a) {
    // Group decision labels by distinct attribute value.
    std::map<double, std::set<int>> groups;
    for (size_t i = 0; i < t.object_count(); ++i)
      groups[t.base.rows[i][a]].insert(t.decisions[i]);
    if (groups.size() < 2) continue;

    auto it = groups.begin();
    auto prev = it++;
    for (; it != groups.end(); ++prev, ++it) {
      std::set<int> merged = prev->second;
      merged.insert(it->second.begin(), it->second.end());
      if (merged.size() >= 2)
        out.cuts[a].push_back(0.5 * (prev->first + it->first));
    }
  }
  return out;
}

namespace {

struct CutRef {
  size_t attribute;
  double value;
};

bool cut_separates(const DecisionTable& t, const CutRef& c, size_t i, size_t j) {
  const double vi = t.base.rows[i][c.attribute];
  const double vj = t.base.rows[j][c.attribute];
  return (vi < c.value && vj > c.value) || (vj < c.value && vi > c.value);
}

}  // namespace

RsbrResult rsbr_discretize(const DecisionTable& t, const CutSet& cuts, Diagnostics* diag) {
  t.validate();
  if (t.base.has_missing()) throw ValidationError("rsbr_discretize requires a complete table");
  if (cuts.cuts.size() != t.attribute_count())
    throw ValidationError("cut set does not match attribute count");

  std::vector<CutRef> all;
  for (size_t a = 0; a < cuts.cuts.size(); ++a)
    for (double v : cuts.cuts[a]) all.push_back({a, v});

  // Object pairs with different decisions that at least one candidate cut
  // separates; pairs nothing separates are inconsistencies, not coverage
  // obligations.
  const size_t n = t.object_count();
  std::vector<std::pair<size_t, size_t>> pairs;
  for (size_t i = 1; i < n; ++i) {
    for (size_t j = 0; j < i; ++j) {
      if (t.decisions[i] == t.decisions[j]) continue;
      bool separable = false;
      for (const auto& c : all)
        if (cut_separates(t, c, i, j)) { separable = true; break; }
      if (separable) {
        pairs.emplace_back(i, j);
      } else {
        warn_into(diag, "inconsistent pair: objects " + std::to_string(j) + " and " +
                            std::to_string(i) + " share condition values but differ in class");
      }
    }
  }

  // coverage[c][p]: cut c separates pair p.
  std::vector<std::vector<bool>> coverage(all.size(), std::vector<bool>(pairs.size(), false));
  for (size_t c = 0; c < all.size(); ++c)
    for (size_t p = 0; p < pairs.size(); ++p)
      coverage[c][p] = cut_separates(t, all[c], pairs[p].first, pairs[p].second);

  // Greedy set cover: most newly covered pairs first, ties by (attribute
  // index, cut value).
  std::vector<bool> covered(pairs.size(), false);
  std::vector<bool> chosen(all.size(), false);
  size_t remaining = pairs.size();
  while (remaining > 0) {
    size_t best = all.size();
    size_t best_gain = 0;
    for (size_t c = 0; c < all.size(); ++c) {
      if (chosen[c]) continue;
      size_t gain = 0;
      for (size_t p = 0; p < pairs.size(); ++p)
        if (!covered[p] && coverage[c][p]) ++gain;
      if (gain == 0) continue;
      if (best == all.size() || gain > best_gain ||
          (gain == best_gain && (all[c].attribute < all[best].attribute ||
                                 (all[c].attribute == all[best].attribute &&
                                  all[c].value < all[best].value)))) {
        best = c;
        best_gain = gain;
      }
    }
    if (best == all.size()) break;  // cannot happen: every pair is separable
    chosen[best] = true;
    for (size_t p = 0; p < pairs.size(); ++p)
      if (coverage[best][p] && !covered[p]) { covered[p] = true; --remaining; }
  }

  RsbrResult out;
  out.selected.cuts.resize(t.attribute_count());
  for (size_t c = 0; c < all.size(); ++c)
    if (chosen[c]) out.selected.cuts[all[c].attribute].push_back(all[c].value);
  for (auto& v : out.selected.cuts) std::sort(v.begin(), v.end());

  out.table.base.attribute_names = t.base.attribute_names;
  out.table.decisions = t.decisions;
  out.table.base.rows.resize(n, std::vector<double>(t.attribute_count(), 0.0));
  for (size_t i = 0; i < n; ++i) {
    for (size_t a = 0; a < t.attribute_count(); ++a) {
      const auto& sel = out.selected.cuts[a];
      const double v = t.base.rows[i][a];
      size_t interval = 0;
      while (interval < sel.size() && v > sel[interval]) ++interval;
      out.table.base.rows[i][a] = static_cast<double>(interval);
    }
  }
  return out;
}

SplitResult split(const DecisionTable& t, double fraction, uint64_t seed) {
  t.validate();
  if (!(fraction > 0.0 && fraction < 1.0))
    throw ParameterError("split fraction must lie in (0,1)");
  const int l = t.class_count();
  std::vector<std::vector<size_t>> by_class(static_cast<size_t>(l));
  for (size_t i = 0; i < t.object_count(); ++i)
    by_class[static_cast<size_t>(t.decisions[i] - 1)].push_back(i);

  for (int k = 0; k < l; ++k)
    if (by_class[static_cast<size_t>(k)].size() < 2)
      throw ValidationError("split requires >= 2 objects per class; class " +
                            std::to_string(k + 1) + " has " +
                            std::to_string(by_class[static_cast<size_t>(k)].size()));

  Rng rng(seed);
  std::vector<bool> in_train(t.object_count(), false);
  for (int k = 0; k < l; ++k) {
    auto& members = by_class[static_cast<size_t>(k)];
    const size_t nk = members.size();
    const size_t take = static_cast<size_t>(std::floor(fraction * static_cast<double>(nk) + 0.5));
    if (take == 0 || take >= nk)
      throw ValidationError("stratification error: fraction " + format_double(fraction) +
                            " leaves class " + std::to_string(k + 1) +
                            " empty on one side of the split");
    rng.shuffle(members);
    for (size_t i = 0; i < take; ++i) in_train[members[i]] = true;
  }

  SplitResult out;
  out.train.base.attribute_names = t.base.attribute_names;
  out.test.base.attribute_names = t.base.attribute_names;
  for (size_t i = 0; i < t.object_count(); ++i) {
    if (in_train[i]) {
      out.train.base.rows.push_back(t.base.rows[i]);
      out.train.decisions.push_back(t.decisions[i]);
      out.train_indices.push_back(i);
    } else {
      out.test.base.rows.push_back(t.base.rows[i]);
      out.test.decisions.push_back(t.decisions[i]);
      out.test_indices.push_back(i);
    }
  }
  out.train.validate();
  out.test.validate();
  return out;
}

DecisionTable parse_decision_table_csv(const std::string& content) {
  std::istringstream in(content);
  std::string line;
  if (!std::getline(in, line)) throw IoError("decision table CSV is empty");
  auto header = split_csv_line(line);
  if (header.size() < 2 || trim(header.back()) != "class")
    throw IoError("decision table CSV must end with a 'class' column");

  DecisionTable t;
  for (size_t a = 0; a + 1 < header.size(); ++a) t.base.attribute_names.push_back(trim(header[a]));

  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw IoError("line " + std::to_string(line_no) + ": expected " +
                    std::to_string(header.size()) + " cells, got " + std::to_string(cells.size()));
    std::vector<double> row;
    for (size_t a = 0; a + 1 < cells.size(); ++a) {
      std::string cell = trim(cells[a]);
      if (cell.empty()) {
        row.push_back(InformationSystem::missing_marker());
      } else {
        try {
          row.push_back(std::stod(cell));
        } catch (const std::exception&) {
          throw IoError("line " + std::to_string(line_no) + ": bad number '" + cell + "'");
        }
      }
    }
    std::string cls = trim(cells.back());
    int label = 0;
    try {
      label = std::stoi(cls);
    } catch (const std::exception&) {
      throw IoError("line " + std::to_string(line_no) + ": bad class label '" + cls + "'");
    }
    t.base.rows.push_back(std::move(row));
    t.decisions.push_back(label);
  }
  t.validate();
  return t;
}

DecisionTable read_decision_table_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_decision_table_csv(buf.str());
}

std::string decision_table_to_csv(const DecisionTable& t) {
  std::ostringstream out;
  for (const auto& name : t.base.attribute_names) out << name << ",";
  out << "class\n";
  for (size_t i = 0; i < t.object_count(); ++i) {
    for (double v : t.base.rows[i]) {
      if (!InformationSystem::is_missing(v)) out << format_double(v);
      out << ",";
    }
    out << t.decisions[i] << "\n";
  }
  return out.str();
}

void write_decision_table_csv(const DecisionTable& t, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << decision_table_to_csv(t);
}

std::string cuts_to_json(const CutSet& cuts, const std::vector<std::string>& attribute_names) {
  nlohmann::json arr = nlohmann::json::array();
  for (size_t a = 0; a < cuts.cuts.size(); ++a) {
    nlohmann::json entry;
    entry["attribute"] = a < attribute_names.size() ? attribute_names[a] : ("a" + std::to_string(a + 1));
    entry["cuts"] = cuts.cuts[a];
    arr.push_back(entry);
  }
  return arr.dump(2) + "\n";
}

void write_cuts_json(const CutSet& cuts, const std::vector<std::string>& attribute_names,
                     const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << cuts_to_json(cuts, attribute_names);
}

}  // namespace rufmine

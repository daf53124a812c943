#include "rufmine/extraction.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

namespace rufmine {

WeightThresholds compute_thresholds(const ModularNetwork& net) {
  std::vector<double> pos, neg;
  for (const auto& l : net.links()) {
    if (!l.present) continue;
    if (l.weight > 0.0) pos.push_back(l.weight);
    if (l.weight < 0.0) neg.push_back(l.weight);
  }
  if (pos.empty() && neg.empty())
    throw ValidationError("compute_thresholds: network has no present weighted links");

  auto mean_of = [](const std::vector<double>& v) -> std::optional<double> {
    if (v.empty()) return std::nullopt;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };

  WeightThresholds th;
  th.p_mean = mean_of(pos);
  th.n_mean = mean_of(neg);
  if (th.p_mean) {
    std::vector<double> below, above;
    for (double w : pos) {
      if (w < *th.p_mean) below.push_back(w);
      if (w > *th.p_mean) above.push_back(w);
    }
    th.p_threshold1 = mean_of(below);
    th.p_threshold2 = mean_of(above);
  }
  if (th.n_mean) {
    // Mirror image: threshold1 gathers the weak (closer to zero) negatives.
    std::vector<double> weak, strong;
    for (double w : neg) {
      if (w > *th.n_mean) weak.push_back(w);
      if (w < *th.n_mean) strong.push_back(w);
    }
    th.n_threshold1 = mean_of(weak);
    th.n_threshold2 = mean_of(strong);
  }
  return th;
}

namespace {

struct CandidateLink {
  int from = 0;
  double weight = 0.0;
};

// Unit-level condition: positive literals P and negated literals N over the
// previous layer, with the confidence term of this unit.
struct UnitCondition {
  std::vector<int> pos;
  std::vector<int> neg;
  double term = 0.0;
};

struct GroundedCondition {
  AttrMask pos = 0;
  AttrMask neg = 0;
  double min_term = 1.0;
};

struct UnitSearch {
  std::vector<UnitCondition> conditions;
  bool truncated = false;
};

// Minimal valid (P, N) subsets for one unit. Validity is pessimistic over
// the thresholded negatives: the chosen positives plus every unlisted strong
// negative must still clear the bias. Sub-threshold negatives are background
// noise the search ignores, as with the threshold filter on positives.
UnitSearch search_unit(const std::vector<CandidateLink>& pos_pool,
                       const std::vector<CandidateLink>& neg_pool, double pool_negative_sum,
                       double bias, const ExtractionOptions& opt) {
  UnitSearch out;
  const size_t np = pos_pool.size(), nn = neg_pool.size();
  const size_t total = np + nn;
  if (total == 0) return out;
  if (total > 24) {  // candidate caps keep us far below this
    out.truncated = true;
    return out;
  }

  std::vector<uint32_t> subsets;
  for (uint32_t m = 1; m < (1u << total); ++m)
    if (std::popcount(m) <= opt.max_antecedent) subsets.push_back(m);
  std::sort(subsets.begin(), subsets.end(), [](uint32_t a, uint32_t b) {
    const int pa = std::popcount(a), pb = std::popcount(b);
    if (pa != pb) return pa < pb;
    return a < b;
  });

  std::vector<uint32_t> kept_masks;
  for (uint32_t m : subsets) {
    if (out.conditions.size() >= static_cast<size_t>(opt.unit_condition_cap)) {
      out.truncated = true;
      break;
    }
    bool dominated = false;
    for (uint32_t k : kept_masks)
      if ((k & m) == k) { dominated = true; break; }
    if (dominated) continue;

    double sum_pos = 0.0, sum_neg_listed = 0.0;
    for (size_t i = 0; i < np; ++i)
      if (m & (1u << i)) sum_pos += pos_pool[i].weight;
    for (size_t i = 0; i < nn; ++i)
      if (m & (1u << (np + i))) sum_neg_listed += neg_pool[i].weight;

    const double worst_net = sum_pos + (pool_negative_sum - sum_neg_listed);
    if (!(worst_net > bias)) continue;

    kept_masks.push_back(m);
    if (!(sum_pos > 0.0)) continue;  // no confidence denominator; rule discarded

    UnitCondition c;
    for (size_t i = 0; i < np; ++i)
      if (m & (1u << i)) c.pos.push_back(pos_pool[i].from);
    for (size_t i = 0; i < nn; ++i)
      if (m & (1u << (np + i))) c.neg.push_back(neg_pool[i].from);
    c.term = std::min(1.0, (sum_pos - bias) / sum_pos);
    out.conditions.push_back(std::move(c));
  }
  return out;
}

}  // namespace

std::vector<ExtractedRule> extract_rules(const ModularNetwork& net, const WeightThresholds& th,
                                         const ExtractionOptions& opt, Diagnostics* diag) {
  if (opt.max_antecedent < 1) throw ParameterError("max_antecedent must be >= 1");
  if (net.input_size() > static_cast<int>(kMaxAttributes))
    throw ParameterError("extraction supports at most 64 input attributes");

  const int layer_count = net.layer_count();

  // Incoming present links per (layer, node).
  std::vector<std::vector<std::vector<CandidateLink>>> incoming_pos(static_cast<size_t>(layer_count));
  std::vector<std::vector<std::vector<CandidateLink>>> incoming_neg(static_cast<size_t>(layer_count));
  std::vector<std::vector<double>> negative_sum(static_cast<size_t>(layer_count));
  for (int h = 1; h < layer_count; ++h) {
    const size_t width = static_cast<size_t>(net.layers()[static_cast<size_t>(h)]);
    incoming_pos[static_cast<size_t>(h)].resize(width);
    incoming_neg[static_cast<size_t>(h)].resize(width);
    negative_sum[static_cast<size_t>(h)].assign(width, 0.0);
  }
  for (const auto& l : net.links()) {
    if (!l.present || l.weight == 0.0) continue;
    const bool pos_ok = l.weight > 0.0 && (!th.p_threshold1 || l.weight >= *th.p_threshold1);
    const bool neg_ok = l.weight < 0.0 && (!th.n_threshold1 || l.weight <= *th.n_threshold1);
    if (pos_ok)
      incoming_pos[static_cast<size_t>(l.layer)][static_cast<size_t>(l.to)].push_back({l.from, l.weight});
    if (neg_ok) {
      incoming_neg[static_cast<size_t>(l.layer)][static_cast<size_t>(l.to)].push_back({l.from, l.weight});
      negative_sum[static_cast<size_t>(l.layer)][static_cast<size_t>(l.to)] += l.weight;
    }
  }

  size_t truncated_units = 0;
  auto capped_pool = [&](std::vector<CandidateLink> pool) {
    std::sort(pool.begin(), pool.end(), [](const CandidateLink& a, const CandidateLink& b) {
      if (std::abs(a.weight) != std::abs(b.weight)) return std::abs(a.weight) > std::abs(b.weight);
      return a.from < b.from;
    });
    if (pool.size() > static_cast<size_t>(opt.candidate_cap)) {
      pool.resize(static_cast<size_t>(opt.candidate_cap));
      ++truncated_units;
    }
    // Restore positional order so subset enumeration is storage independent.
    std::sort(pool.begin(), pool.end(),
              [](const CandidateLink& a, const CandidateLink& b) { return a.from < b.from; });
    return pool;
  };

  // Unit conditions, then recursive grounding to input literals.
  std::vector<std::vector<UnitSearch>> unit(static_cast<size_t>(layer_count));
  for (int h = 1; h < layer_count; ++h) {
    unit[static_cast<size_t>(h)].resize(static_cast<size_t>(net.layers()[static_cast<size_t>(h)]));
    for (int j = 0; j < net.layers()[static_cast<size_t>(h)]; ++j) {
      auto pos_pool = capped_pool(incoming_pos[static_cast<size_t>(h)][static_cast<size_t>(j)]);
      auto neg_pool = capped_pool(incoming_neg[static_cast<size_t>(h)][static_cast<size_t>(j)]);
      unit[static_cast<size_t>(h)][static_cast<size_t>(j)] =
          search_unit(pos_pool, neg_pool, negative_sum[static_cast<size_t>(h)][static_cast<size_t>(j)],
                      net.bias(h, j), opt);
      if (unit[static_cast<size_t>(h)][static_cast<size_t>(j)].truncated) ++truncated_units;
    }
  }

  size_t dropped_compositions = 0;
  std::vector<std::vector<std::vector<GroundedCondition>>> grounded(static_cast<size_t>(layer_count));
  for (int h = 1; h < layer_count; ++h) {
    grounded[static_cast<size_t>(h)].resize(static_cast<size_t>(net.layers()[static_cast<size_t>(h)]));
    for (int j = 0; j < net.layers()[static_cast<size_t>(h)]; ++j) {
      auto& out = grounded[static_cast<size_t>(h)][static_cast<size_t>(j)];
      for (const auto& cond : unit[static_cast<size_t>(h)][static_cast<size_t>(j)].conditions) {
        if (h == 1) {
          GroundedCondition g;
          for (int a : cond.pos) g.pos |= AttrMask{1} << a;
          for (int a : cond.neg) g.neg |= AttrMask{1} << a;
          g.min_term = cond.term;
          out.push_back(g);
          continue;
        }
        // Deeper units: only positively referenced lower units can be
        // expanded into input literals.
        if (!cond.neg.empty()) {
          ++dropped_compositions;
          continue;
        }
        std::vector<GroundedCondition> partial = {GroundedCondition{0, 0, cond.term}};
        for (int from : cond.pos) {
          std::vector<GroundedCondition> next;
          for (const auto& base : partial) {
            for (const auto& sub : grounded[static_cast<size_t>(h - 1)][static_cast<size_t>(from)]) {
              if (next.size() >= static_cast<size_t>(opt.composition_cap)) break;
              GroundedCondition g;
              g.pos = base.pos | sub.pos;
              g.neg = base.neg | sub.neg;
              if ((g.pos & g.neg) != 0) { ++dropped_compositions; continue; }
              g.min_term = std::min(base.min_term, sub.min_term);
              next.push_back(g);
            }
          }
          partial = std::move(next);
          if (partial.empty()) break;
        }
        for (auto& g : partial) {
          if (out.size() >= static_cast<size_t>(opt.composition_cap)) { ++dropped_compositions; break; }
          out.push_back(g);
        }
      }
    }
  }

  // Output-unit groundings become rules for that class.
  std::map<std::tuple<int, AttrMask, AttrMask>, double> best_cf;
  const int out_layer = layer_count - 1;
  size_t overlong = 0;
  for (int k = 0; k < net.output_size(); ++k) {
    for (const auto& g : grounded[static_cast<size_t>(out_layer)][static_cast<size_t>(k)]) {
      if (g.pos == 0 && g.neg == 0) continue;
      if (popcount_mask(g.pos) + popcount_mask(g.neg) > opt.max_antecedent) {
        ++overlong;
        continue;
      }
      auto key = std::make_tuple(k + 1, g.pos, g.neg);
      auto it = best_cf.find(key);
      if (it == best_cf.end() || it->second < g.min_term) best_cf[key] = g.min_term;
    }
  }

  std::vector<ExtractedRule> rules;
  for (const auto& [key, cf] : best_cf) {
    ExtractedRule r;
    r.class_label = std::get<0>(key);
    r.antecedent.positive = std::get<1>(key);
    r.antecedent.negated = std::get<2>(key);
    r.cf = cf;
    rules.push_back(r);
  }

  // Keep the strongest rules under the budget, then order by class for
  // stable artifacts.
  std::sort(rules.begin(), rules.end(), [](const ExtractedRule& a, const ExtractedRule& b) {
    if (a.cf != b.cf) return a.cf > b.cf;
    if (a.class_label != b.class_label) return a.class_label < b.class_label;
    if (a.antecedent.positive != b.antecedent.positive)
      return a.antecedent.positive < b.antecedent.positive;
    return a.antecedent.negated < b.antecedent.negated;
  });
  if (rules.size() > static_cast<size_t>(opt.max_rules)) {
    warn_into(diag, "rule budget: kept the strongest " + std::to_string(opt.max_rules) + " of " +
                        std::to_string(rules.size()) + " rules");
    rules.resize(static_cast<size_t>(opt.max_rules));
  }
  std::sort(rules.begin(), rules.end(), [](const ExtractedRule& a, const ExtractedRule& b) {
    if (a.class_label != b.class_label) return a.class_label < b.class_label;
    if (a.cf != b.cf) return a.cf > b.cf;
    if (a.antecedent.positive != b.antecedent.positive)
      return a.antecedent.positive < b.antecedent.positive;
    return a.antecedent.negated < b.antecedent.negated;
  });

  if (truncated_units > 0)
    warn_into(diag, "extraction truncated the subset search at " + std::to_string(truncated_units) +
                        " unit(s)");
  if (dropped_compositions > 0)
    warn_into(diag, "extraction dropped " + std::to_string(dropped_compositions) +
                        " contradictory or capped composition(s)");
  if (overlong > 0)
    warn_into(diag, "extraction dropped " + std::to_string(overlong) +
                        " rule(s) longer than max_antecedent");
  return rules;
}

InferResult infer(std::span<const ExtractedRule> rules, std::span<const double> fuzzified,
                  double crispness) {
  if (rules.empty()) throw ParameterError("infer: empty rule set");
  if (!(crispness > 0.0 && crispness < 1.0)) throw ParameterError("crispness must lie in (0,1)");

  AttrMask assignment = 0;
  for (size_t a = 0; a < fuzzified.size(); ++a)
    if (fuzzified[a] >= crispness) assignment |= AttrMask{1} << a;

  InferResult best;
  for (const auto& r : rules) {
    if (!r.antecedent.evaluate(assignment)) continue;
    if (!best.fired() || r.cf > best.cf ||
        (r.cf == best.cf && r.class_label < best.class_label)) {
      best.class_label = r.class_label;
      best.cf = r.cf;
    }
  }
  return best;
}

std::string format_extracted_rule(const ExtractedRule& r) {
  char cf[32];
  std::snprintf(cf, sizeof(cf), " ; cf=%.3f", r.cf);
  return "c" + std::to_string(r.class_label) + " <- " + format_conjunct(r.antecedent) + cf;
}

std::string rules_to_text(std::span<const ExtractedRule> rules) {
  std::string out;
  for (const auto& r : rules) out += format_extracted_rule(r) + "\n";
  return out;
}

void write_rules_text(std::span<const ExtractedRule> rules, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << rules_to_text(rules);
}

std::string rules_to_json(std::span<const ExtractedRule> rules) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rules) {
    nlohmann::json e;
    e["class"] = r.class_label;
    e["cf"] = r.cf;
    nlohmann::json lits = nlohmann::json::array();
    for (int a : mask_to_attrs(r.antecedent.positive))
      lits.push_back({{"attr", a}, {"name", linguistic_attr_name(a)}, {"negated", false}});
    for (int a : mask_to_attrs(r.antecedent.negated))
      lits.push_back({{"attr", a}, {"name", linguistic_attr_name(a)}, {"negated", true}});
    e["literals"] = lits;
    arr.push_back(e);
  }
  return arr.dump(2) + "\n";
}

std::vector<ExtractedRule> rules_from_json(const std::string& content) {
  nlohmann::json arr = nlohmann::json::parse(content);
  std::vector<ExtractedRule> rules;
  for (const auto& e : arr) {
    ExtractedRule r;
    r.class_label = e.at("class").get<int>();
    r.cf = e.at("cf").get<double>();
    for (const auto& lit : e.at("literals")) {
      const int a = lit.at("attr").get<int>();
      if (lit.at("negated").get<bool>())
        r.antecedent.negated |= AttrMask{1} << a;
      else
        r.antecedent.positive |= AttrMask{1} << a;
    }
    rules.push_back(r);
  }
  return rules;
}

void write_rules_json(std::span<const ExtractedRule> rules, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << rules_to_json(rules);
}

std::vector<ExtractedRule> read_rules_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return rules_from_json(buf.str());
}

}  // namespace rufmine

// Brute-force reference implementations the real code is checked against.
// Everything here is deliberately naive and independent of the library's
// algorithmic path.
#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <span>
#include <vector>

#include "rufmine/decision_table.hpp"
#include "rufmine/dnf.hpp"
#include "rufmine/network.hpp"

namespace oracles {

using rufmine::AttrMask;
using rufmine::DecisionTable;

// Canonical partition signature induced by an attribute subset: group ids in
// first-occurrence order.
inline std::vector<int> partition_signature(const DecisionTable& t, AttrMask attrs) {
  std::vector<int> sig;
  std::vector<std::vector<double>> keys;
  for (const auto& row : t.base.rows) {
    std::vector<double> key;
    for (size_t a = 0; a < t.attribute_count(); ++a)
      if (attrs & (AttrMask{1} << a)) key.push_back(row[a]);
    auto it = std::find(keys.begin(), keys.end(), key);
    if (it == keys.end()) {
      keys.push_back(key);
      sig.push_back(static_cast<int>(keys.size()) - 1);
    } else {
      sig.push_back(static_cast<int>(it - keys.begin()));
    }
  }
  return sig;
}

// All minimal subsets inducing the same partition as the full attribute set.
inline std::vector<AttrMask> brute_force_reducts(const DecisionTable& t) {
  const size_t m = t.attribute_count();
  const AttrMask full = m == 64 ? ~AttrMask{0} : (AttrMask{1} << m) - 1;
  const auto target = partition_signature(t, full);

  std::vector<AttrMask> discerning;
  for (AttrMask mask = 0; mask <= full; ++mask)
    if (partition_signature(t, mask) == target) discerning.push_back(mask);

  std::vector<AttrMask> minimal;
  for (AttrMask c : discerning) {
    bool has_smaller = false;
    for (AttrMask other : discerning)
      if (other != c && (other & c) == other) { has_smaller = true; break; }
    if (!has_smaller) minimal.push_back(c);
  }
  std::sort(minimal.begin(), minimal.end(), [](AttrMask a, AttrMask b) {
    const int pa = rufmine::popcount_mask(a), pb = rufmine::popcount_mask(b);
    if (pa != pb) return pa < pb;
    return a < b;
  });
  return minimal;
}

struct FlatCut {
  size_t attribute;
  double value;
};

inline bool cut_separates(const DecisionTable& t, const FlatCut& c, size_t i, size_t j) {
  const double vi = t.base.rows[i][c.attribute];
  const double vj = t.base.rows[j][c.attribute];
  return (vi < c.value && vj > c.value) || (vj < c.value && vi > c.value);
}

// Smallest number of cuts covering every separable different-class pair,
// by exhaustive subset enumeration.
inline size_t brute_force_min_cuts(const DecisionTable& t, const std::vector<FlatCut>& cuts) {
  std::vector<std::pair<size_t, size_t>> pairs;
  for (size_t i = 1; i < t.object_count(); ++i)
    for (size_t j = 0; j < i; ++j) {
      if (t.decisions[i] == t.decisions[j]) continue;
      for (const auto& c : cuts)
        if (cut_separates(t, c, i, j)) {
          pairs.emplace_back(i, j);
          break;
        }
    }
  if (pairs.empty()) return 0;

  size_t best = cuts.size();
  for (uint32_t mask = 0; mask < (1u << cuts.size()); ++mask) {
    const size_t size = static_cast<size_t>(std::popcount(mask));
    if (size >= best) continue;
    bool all = true;
    for (const auto& [i, j] : pairs) {
      bool covered = false;
      for (size_t c = 0; c < cuts.size(); ++c)
        if ((mask & (1u << c)) && cut_separates(t, cuts[c], i, j)) { covered = true; break; }
      if (!covered) { all = false; break; }
    }
    if (all) best = size;
  }
  return best;
}

// Independent tallies over a raw (actual, predicted) list; predicted 0 means
// no classification.
struct TallyResult {
  std::vector<double> accuracy_pct;   // NaN when the class never occurs
  double overall_accuracy_pct = 0.0;
  std::vector<double> users_acc;      // NaN when nothing predicted as class
  std::vector<double> kappa;          // NaN when undefined
  double overall_kappa = 0.0;
  double conf = 0.0;
};

inline TallyResult tally(const std::vector<std::pair<int, int>>& pairs, int l) {
  TallyResult r;
  r.accuracy_pct.assign(static_cast<size_t>(l), std::nan(""));
  r.users_acc.assign(static_cast<size_t>(l), std::nan(""));
  r.kappa.assign(static_cast<size_t>(l), std::nan(""));

  double n = 0;
  for (const auto& [a, p] : pairs)
    if (p >= 1) n += 1;

  double total_correct = 0, total_seen = 0;
  double ksum_num = 0, ksum_den = 0;
  for (int k = 1; k <= l; ++k) {
    double row = 0, col = 0, diag = 0;
    for (const auto& [a, p] : pairs) {
      if (p < 1) continue;
      if (a == k) row += 1;
      if (p == k) col += 1;
      if (a == k && p == k) diag += 1;
    }
    if (row > 0) {
      r.accuracy_pct[static_cast<size_t>(k - 1)] = 100.0 * diag / row;
      total_correct += diag;
      total_seen += row;
    }
    if (col > 0) r.users_acc[static_cast<size_t>(k - 1)] = diag / col;
    const double den = n * row - row * col;
    if (den != 0) {
      r.kappa[static_cast<size_t>(k - 1)] = (n * diag - row * col) / den;
      ksum_num += n * diag - row * col;
      ksum_den += den;
    }
  }
  if (total_seen > 0) r.overall_accuracy_pct = 100.0 * total_correct / total_seen;
  if (ksum_den != 0) r.overall_kappa = ksum_num / ksum_den;

  // Confusion index straight from its definition.
  std::vector<double> off;
  for (int i = 1; i <= l; ++i)
    for (int j = 1; j <= l; ++j) {
      if (i == j) continue;
      double c = 0;
      for (const auto& [a, p] : pairs)
        if (a == i && p == j) c += 1;
      off.push_back(c);
    }
  double mean = 0;
  for (double c : off) mean += c;
  mean /= static_cast<double>(off.size());
  double above = 0;
  for (double c : off)
    if (c >= mean) above += 1;
  r.conf = above / static_cast<double>(l);
  return r;
}

// Central finite differences of the squared-error loss.
inline std::vector<double> fd_weight_gradients(const rufmine::ModularNetwork& net,
                                               std::span<const rufmine::TrainPattern> data,
                                               double eps) {
  std::vector<double> grads(net.link_count(), 0.0);
  rufmine::ModularNetwork scratch = net;
  for (size_t i = 0; i < net.link_count(); ++i) {
    if (!net.links()[i].present) continue;
    const double w = net.links()[i].weight;
    scratch.links()[i].weight = w + eps;
    const double up = rufmine::network_loss(scratch, data);
    scratch.links()[i].weight = w - eps;
    const double down = rufmine::network_loss(scratch, data);
    scratch.links()[i].weight = w;
    grads[i] = (up - down) / (2.0 * eps);
  }
  return grads;
}

inline std::vector<std::vector<double>> fd_bias_gradients(const rufmine::ModularNetwork& net,
                                                          std::span<const rufmine::TrainPattern> data,
                                                          double eps) {
  std::vector<std::vector<double>> grads(static_cast<size_t>(net.layer_count()));
  rufmine::ModularNetwork scratch = net;
  for (int h = 1; h < net.layer_count(); ++h) {
    grads[static_cast<size_t>(h)].resize(static_cast<size_t>(net.layers()[static_cast<size_t>(h)]));
    for (int j = 0; j < net.layers()[static_cast<size_t>(h)]; ++j) {
      const double b = net.bias(h, j);
      scratch.set_bias(h, j, b + eps);
      const double up = rufmine::network_loss(scratch, data);
      scratch.set_bias(h, j, b - eps);
      const double down = rufmine::network_loss(scratch, data);
      scratch.set_bias(h, j, b);
      grads[static_cast<size_t>(h)][static_cast<size_t>(j)] = (up - down) / (2.0 * eps);
    }
  }
  return grads;
}

}  // namespace oracles

#include <doctest.h>

#include <cmath>

#include "rufmine/extraction.hpp"
#include "rufmine/rng.hpp"

using namespace rufmine;

namespace {

ModularNetwork single_unit(std::vector<double> weights, double bias) {
  std::vector<Link> links;
  for (size_t i = 0; i < weights.size(); ++i)
    links.push_back({1, static_cast<int>(i), 0, weights[i], true, 1});
  ModularNetwork net({static_cast<int>(weights.size()), 1}, links);
  net.set_bias(1, 0, bias);
  return net;
}

std::vector<ExtractedRule> extract_from_rules(const std::vector<EncodableRule>& planted,
                                              int features, int classes,
                                              const ExtractionOptions& opt = {}) {
  auto subnets = encode_rules(planted, features, classes);
  std::vector<int> subnet_class;
  for (const auto& r : planted) subnet_class.push_back(r.class_label);
  auto net = concatenate_modules(subnets, subnet_class, classes,
                                 std::vector<bool>(subnets.size(), true), 0.0, nullptr);
  return extract_rules(net, compute_thresholds(net), opt);
}

SignedDnf class_dnf(std::span<const ExtractedRule> rules, int k) {
  SignedDnf dnf;
  for (const auto& r : rules)
    if (r.class_label == k) dnf.conjuncts.push_back(r.antecedent);
  return dnf;
}

}  // namespace

TEST_CASE("thresholds split positive weights around their mean") {
  auto net = single_unit({1.0, 2.0, 3.0, 6.0}, 0.5);
  const auto th = compute_thresholds(net);
  CHECK(*th.p_mean == doctest::Approx(3.0));
  CHECK(*th.p_threshold1 == doctest::Approx(1.5));
  CHECK(*th.p_threshold2 == doctest::Approx(6.0));
  CHECK_FALSE(th.n_mean.has_value());
}

TEST_CASE("all-equal positive weights leave the side thresholds absent") {
  auto net = single_unit({2.0, 2.0, 2.0}, 0.5);
  const auto th = compute_thresholds(net);
  CHECK(*th.p_mean == doctest::Approx(2.0));
  CHECK_FALSE(th.p_threshold1.has_value());
  CHECK_FALSE(th.p_threshold2.has_value());
}

TEST_CASE("negative thresholds mirror the positive side") {
  auto net = single_unit({-1.0, -2.0, -3.0, -6.0}, 0.5);
  const auto th = compute_thresholds(net);
  CHECK(*th.n_mean == doctest::Approx(-3.0));
  CHECK(*th.n_threshold1 == doctest::Approx(-1.5));
  CHECK(*th.n_threshold2 == doctest::Approx(-6.0));
  CHECK_FALSE(th.p_mean.has_value());
}

TEST_CASE("compute_thresholds rejects a network with nothing present") {
  auto net = single_unit({1.0}, 0.0);
  net.links()[0].present = false;
  CHECK_THROWS_AS(compute_thresholds(net), ValidationError);
}

TEST_CASE("threshold invariants hold on random weight sets") {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> w;
    for (int i = 0; i < 8; ++i) w.push_back(rng.next_range(-5.0, 5.0));
    auto net = single_unit(w, 0.0);
    const auto th = compute_thresholds(net);
    if (th.p_threshold1) CHECK(*th.p_threshold1 <= *th.p_mean);
    if (th.p_threshold2) CHECK(*th.p_threshold2 >= *th.p_mean);
    if (th.n_threshold1) CHECK(*th.n_threshold1 >= *th.n_mean);
    if (th.n_threshold2) CHECK(*th.n_threshold2 <= *th.n_mean);
  }
}

TEST_CASE("the confidence term follows the weight-sum arithmetic") {
  // A unit whose strong links sum to 3 with bias 0.5 contributes
  // (3 - 0.5) / 3; a two-node path takes the infimum.
  const double term = (3.0 - 0.5) / 3.0;
  CHECK(term == doctest::Approx(0.83333).epsilon(1e-4));
  CHECK(std::min(term, 0.7) == 0.7);
}

TEST_CASE("extraction on a hand unit keeps minimal subsets that clear the bias") {
  // Weights {2, 1}, bias 2.5: only the pair {2,1} clears it, cf = (3-2.5)/3.
  auto net = single_unit({2.0, 1.0}, 2.5);
  const auto rules = extract_rules(net, compute_thresholds(net));
  REQUIRE(rules.size() == 1);
  CHECK(rules[0].antecedent.positive == 0b11);
  CHECK(rules[0].antecedent.negated == 0);
  CHECK(rules[0].cf == doctest::Approx((3.0 - 2.5) / 3.0));
}

TEST_CASE("extraction composes the path infimum across layers") {
  // Hidden unit needs both inputs (term 0.5); output unit passes it through
  // (term (2-1)/2 = 0.5); with a lower output bias the hidden term binds.
  std::vector<Link> links = {{1, 0, 0, 3.0, true, 1},
                             {1, 1, 0, 3.0, true, 1},
                             {2, 0, 0, 2.0, true, 1}};
  ModularNetwork net({2, 1, 1}, links);
  net.set_bias(1, 0, 3.0);
  net.set_bias(2, 0, 0.5);
  const auto rules = extract_rules(net, compute_thresholds(net));
  REQUIRE(rules.size() == 1);
  CHECK(rules[0].antecedent.positive == 0b11);
  // Hidden term (6-3)/6 = 0.5, output term (2-0.5)/2 = 0.75; infimum 0.5.
  CHECK(rules[0].cf == doctest::Approx(0.5));
}

TEST_CASE("pessimistic validity forces negated literals into the rule") {
  // Positive weight 4 against a negative weight -3: {pos} alone fails
  // 4 - 3 > 2, so the minimal rule is pos & !neg.
  auto net = single_unit({4.0, -3.0}, 2.0);
  const auto rules = extract_rules(net, compute_thresholds(net));
  REQUIRE(rules.size() == 1);
  CHECK(rules[0].antecedent.positive == 0b01);
  CHECK(rules[0].antecedent.negated == 0b10);
  CHECK(rules[0].cf == doctest::Approx((4.0 - 2.0) / 4.0));
  CHECK(format_extracted_rule(rules[0]) == "c1 <- L_1 & !M_1 ; cf=0.500");
}

TEST_CASE("extraction recovers planted positive rules exactly") {
  std::vector<EncodableRule> planted(2);
  planted[0].class_label = 1;
  planted[0].formula.conjuncts = {{0b000000011, 0}, {0b000100000, 0}};  // (L_1&M_1) | H_2
  planted[1].class_label = 2;
  planted[1].formula.conjuncts = {{0b000011000, 0}};  // L_2 & M_2
  const auto rules = extract_from_rules(planted, 3, 2);

  for (int k = 1; k <= 2; ++k) {
    const SignedDnf got = class_dnf(rules, k);
    const SignedDnf want = planted[static_cast<size_t>(k - 1)].formula;
    const AttrMask used = want.attribute_union() | got.attribute_union();
    const auto attrs = mask_to_attrs(used);
    for (uint32_t bits = 0; bits < (1u << attrs.size()); ++bits) {
      AttrMask assignment = 0;
      for (size_t b = 0; b < attrs.size(); ++b)
        if (bits & (1u << b)) assignment |= AttrMask{1} << attrs[b];
      REQUIRE(got.evaluate(assignment) == want.evaluate(assignment));
    }
  }
  for (const auto& r : rules) {
    CHECK(r.cf > 0.0);
    CHECK(r.cf <= 1.0);
  }
}

TEST_CASE("extraction recovers planted rules with negated literals") {
  std::vector<EncodableRule> planted(2);
  planted[0].class_label = 1;
  planted[0].formula.conjuncts = {{0b001, 0b010}};  // L_1 & !M_1
  planted[1].class_label = 2;
  planted[1].formula.conjuncts = {{0b010, 0b001}};  // M_1 & !L_1
  const auto rules = extract_from_rules(planted, 1, 2);
  for (int k = 1; k <= 2; ++k) {
    const SignedDnf got = class_dnf(rules, k);
    REQUIRE(got.conjuncts.size() == 1);
    CHECK(got.conjuncts[0].positive == planted[static_cast<size_t>(k - 1)].formula.conjuncts[0].positive);
    CHECK(got.conjuncts[0].negated == planted[static_cast<size_t>(k - 1)].formula.conjuncts[0].negated);
  }
}

TEST_CASE("extraction is independent of link storage order") {
  std::vector<EncodableRule> planted(1);
  planted[0].class_label = 1;
  planted[0].formula.conjuncts = {{0b011, 0}, {0b100, 0}};
  auto subnets = encode_rules(planted, 1, 1);
  auto net = concatenate_modules(subnets, std::vector<int>{1}, 1, {true}, 0.0, nullptr);

  auto shuffled = net;
  Rng rng(3);
  rng.shuffle(shuffled.links());
  shuffled.canonicalize();

  const auto a = extract_rules(net, compute_thresholds(net));
  const auto b = extract_rules(shuffled, compute_thresholds(shuffled));
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].class_label == b[i].class_label);
    CHECK(a[i].antecedent.positive == b[i].antecedent.positive);
    CHECK(a[i].cf == b[i].cf);
  }
}

TEST_CASE("every reported subset genuinely exceeds its unit bias") {
  Rng rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> w;
    for (int i = 0; i < 6; ++i) w.push_back(rng.next_range(-4.0, 4.0));
    const double bias = rng.next_range(-1.0, 2.0);
    auto net = single_unit(w, bias);
    std::vector<ExtractedRule> rules;
    try {
      rules = extract_rules(net, compute_thresholds(net));
    } catch (const ValidationError&) {
      continue;  // no present links
    }
    const auto th = compute_thresholds(net);
    for (const auto& r : rules) {
      double sum = 0.0;
      for (int a : mask_to_attrs(r.antecedent.positive)) sum += w[static_cast<size_t>(a)];
      // Direct re-summation including every unlisted strong negative input.
      for (size_t i = 0; i < w.size(); ++i) {
        const bool strong_neg = w[i] < 0.0 && (!th.n_threshold1 || w[i] <= *th.n_threshold1);
        if (strong_neg && !(r.antecedent.negated & (AttrMask{1} << i))) sum += w[i];
      }
      CHECK(sum > bias);
      CHECK(r.cf <= 1.0);
    }
  }
}

TEST_CASE("rule budget truncation is logged, never silent") {
  Rng rng(5);
  std::vector<double> w;
  for (int i = 0; i < 10; ++i) w.push_back(rng.next_range(0.5, 1.0));
  auto net = single_unit(w, 0.2);
  ExtractionOptions opt;
  opt.max_rules = 3;
  Diagnostics diag;
  const auto rules = extract_rules(net, compute_thresholds(net), opt, &diag);
  CHECK(rules.size() == 3);
  CHECK(diag.contains("rule budget"));
}

TEST_CASE("infer fires the satisfied rule") {
  ExtractedRule r;
  r.class_label = 4;
  r.antecedent.positive = 0b011;
  r.cf = 0.7;
  const std::vector<double> pattern = {0.9, 0.8, 0.1};
  const auto res = infer(std::vector<ExtractedRule>{r}, pattern, 0.5);
  CHECK(res.class_label == 4);
  CHECK(res.cf == 0.7);
}

TEST_CASE("infer prefers the higher confidence among fired rules") {
  ExtractedRule strong, weak;
  strong.class_label = 5;
  strong.antecedent.positive = 0b01;
  strong.cf = 0.896;
  weak.class_label = 5;
  weak.antecedent.positive = 0b10;
  weak.cf = 0.799;
  const std::vector<double> pattern = {0.9, 0.9};
  const auto res = infer(std::vector<ExtractedRule>{weak, strong}, pattern, 0.5);
  CHECK(res.cf == 0.896);
  CHECK(res.class_label == 5);
}

TEST_CASE("infer reports no-fire when nothing is satisfied") {
  ExtractedRule r;
  r.class_label = 1;
  r.antecedent.positive = 0b11;
  r.cf = 0.5;
  const std::vector<double> pattern = {0.1, 0.9};
  const auto res = infer(std::vector<ExtractedRule>{r}, pattern, 0.5);
  CHECK_FALSE(res.fired());
}

TEST_CASE("negated literals hold below the crispness threshold") {
  ExtractedRule r;
  r.class_label = 2;
  r.antecedent.positive = 0b01;
  r.antecedent.negated = 0b10;
  r.cf = 0.6;
  CHECK(infer(std::vector<ExtractedRule>{r}, std::vector<double>{0.9, 0.2}, 0.5).fired());
  CHECK_FALSE(infer(std::vector<ExtractedRule>{r}, std::vector<double>{0.9, 0.8}, 0.5).fired());
}

TEST_CASE("infer ties break toward the lower class") {
  ExtractedRule a, b;
  a.class_label = 3;
  a.antecedent.positive = 0b01;
  a.cf = 0.5;
  b.class_label = 1;
  b.antecedent.positive = 0b01;
  b.cf = 0.5;
  const auto res = infer(std::vector<ExtractedRule>{a, b}, std::vector<double>{0.9}, 0.5);
  CHECK(res.class_label == 1);
}

TEST_CASE("rules JSON round-trips") {
  ExtractedRule r;
  r.class_label = 5;
  r.antecedent.positive = (AttrMask{1} << 4) | (AttrMask{1} << 8);
  r.antecedent.negated = AttrMask{1} << 1;
  r.cf = 0.896;
  const std::string json = rules_to_json(std::vector<ExtractedRule>{r});
  const auto back = rules_from_json(json);
  REQUIRE(back.size() == 1);
  CHECK(back[0].class_label == 5);
  CHECK(back[0].antecedent.positive == r.antecedent.positive);
  CHECK(back[0].antecedent.negated == r.antecedent.negated);
  CHECK(back[0].cf == 0.896);
  CHECK(format_extracted_rule(back[0]) == "c5 <- M_2 & H_3 & !M_1 ; cf=0.896");
}

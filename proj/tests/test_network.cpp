#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "rufmine/network.hpp"
#include "rufmine/rng.hpp"

using namespace rufmine;

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

ModularNetwork random_net(std::vector<int> layers, uint64_t seed) {
  auto net = ModularNetwork::fully_connected(std::move(layers));
  Rng rng(seed);
  for (auto& l : net.links()) l.weight = rng.next_range(-1.5, 1.5);
  for (int h = 1; h < net.layer_count(); ++h)
    for (int j = 0; j < net.layers()[static_cast<size_t>(h)]; ++j)
      net.set_bias(h, j, rng.next_range(-0.5, 0.5));
  return net;
}

}  // namespace

TEST_CASE("all-zero network activates at one half everywhere") {
  auto net = ModularNetwork::fully_connected({3, 4, 2});
  const auto out = net.forward(std::vector<double>{0.2, 0.9, 0.4});
  for (double a : out.activations) CHECK(a == 0.5);
  const auto trace = net.forward_trace(std::vector<double>{0.2, 0.9, 0.4});
  for (double a : trace[1]) CHECK(a == 0.5);
}

TEST_CASE("a saturated path drives the activation to one") {
  ModularNetwork net({1, 1, 1}, {{1, 0, 0, 128.0, true, 1}, {2, 0, 0, 128.0, true, 1}});
  const auto out = net.forward(std::vector<double>{1.0});
  CHECK(out.activations[0] > 0.9999);
}

TEST_CASE("forward matches hand-computed nested sigmoids") {
  // 2-2-2-1 with fixed weights; biases exercise the net-input shift.
  std::vector<Link> links = {
      {1, 0, 0, 0.5, true, 0},  {1, 1, 0, -0.25, true, 0}, {1, 0, 1, 1.0, true, 0},
      {1, 1, 1, 0.75, true, 0}, {2, 0, 0, -0.6, true, 0},  {2, 1, 0, 0.4, true, 0},
      {2, 0, 1, 0.1, true, 0},  {2, 1, 1, -0.9, true, 0},  {3, 0, 0, 1.2, true, 0},
      {3, 1, 0, -0.3, true, 0},
  };
  ModularNetwork net({2, 2, 2, 1}, links);
  net.set_bias(1, 0, 0.1);
  net.set_bias(1, 1, -0.2);
  net.set_bias(2, 0, 0.3);
  net.set_bias(2, 1, -0.4);
  net.set_bias(3, 0, 0.05);

  const double x0 = 0.3, x1 = 0.8;
  const double h0 = sigmoid(0.5 * x0 - 0.25 * x1 - 0.1);
  const double h1 = sigmoid(1.0 * x0 + 0.75 * x1 + 0.2);
  const double g0 = sigmoid(-0.6 * h0 + 0.4 * h1 - 0.3);
  const double g1 = sigmoid(0.1 * h0 - 0.9 * h1 + 0.4);
  const double y = sigmoid(1.2 * g0 - 0.3 * g1 - 0.05);

  const auto out = net.forward(std::vector<double>{x0, x1});
  CHECK(std::abs(out.activations[0] - y) < 1e-12);
}

TEST_CASE("forward is invariant under link storage order") {
  auto net = random_net({4, 3, 2}, 77);
  auto shuffled = net;
  Rng rng(5);
  rng.shuffle(shuffled.links());
  shuffled.canonicalize();
  const std::vector<double> input = {0.1, 0.9, 0.3, 0.7};
  const auto a = net.forward(input).activations;
  const auto b = shuffled.forward(input).activations;
  CHECK(a == b);
}

TEST_CASE("absent links contribute nothing") {
  auto net = random_net({3, 3, 2}, 12);
  for (auto& l : net.links()) l.present = false;
  for (int h = 1; h < net.layer_count(); ++h)
    for (int j = 0; j < net.layers()[static_cast<size_t>(h)]; ++j) net.set_bias(h, j, 0.0);
  const auto out = net.forward(std::vector<double>{0.5, 0.2, 0.8});
  for (double a : out.activations) CHECK(a == 0.5);
}

TEST_CASE("dimension mismatch is rejected") {
  auto net = ModularNetwork::fully_connected({3, 2});
  CHECK_THROWS_AS(net.forward(std::vector<double>{1.0, 2.0}), ParameterError);
}

TEST_CASE("encode_rules lays out one hidden node per conjunct") {
  // c_1 <- (L_1 & M_2) | (H_2 & M_1)
  EncodableRule rule;
  rule.class_label = 1;
  rule.formula.conjuncts = {
      {(AttrMask{1} << 0) | (AttrMask{1} << 4), 0},  // L_1 & M_2
      {(AttrMask{1} << 5) | (AttrMask{1} << 1), 0},  // H_2 & M_1
  };
  auto nets = encode_rules(std::span<const EncodableRule>(&rule, 1), 2, 2);
  REQUIRE(nets.size() == 1);
  const auto& net = nets[0];
  CHECK(net.layers() == std::vector<int>{6, 2, 1});

  auto weight_of = [&](int from, int to) {
    for (const auto& l : net.links())
      if (l.layer == 1 && l.from == from && l.to == to) return l.present ? l.weight : 0.0;
    return 0.0;
  };
  CHECK(weight_of(0, 0) == kRuleLiteralWeight);   // L_1 -> conjunct 1
  CHECK(weight_of(4, 0) == kRuleLiteralWeight);   // M_2 -> conjunct 1
  CHECK(weight_of(5, 0) == 0.0);
  CHECK(weight_of(5, 1) == kRuleLiteralWeight);   // H_2 -> conjunct 2
  CHECK(weight_of(1, 1) == kRuleLiteralWeight);   // M_1 -> conjunct 2
  for (const auto& l : net.links()) CHECK(l.module == 1);
}

TEST_CASE("a single-literal rule gets a pass-through hidden node") {
  DependencyRule rule;
  rule.class_label = 2;
  rule.formula.conjuncts = {AttrMask{1} << 4};  // M_2
  rule.df = 1.0;
  auto nets = encode_rules(std::span<const DependencyRule>(&rule, 1), 2, 2);
  REQUIRE(nets.size() == 1);
  CHECK(nets[0].layers() == std::vector<int>{6, 1, 1});
  size_t present = 0;
  for (const auto& l : nets[0].links())
    if (l.present) ++present;
  CHECK(present == 2);  // M_2 -> hidden, hidden -> output
}

TEST_CASE("encoded rules reproduce their truth tables on crisp inputs") {
  Rng rng(314);
  for (int trial = 0; trial < 40; ++trial) {
    const int features = 3;
    const int width = 3 * features;
    EncodableRule rule;
    rule.class_label = 1;
    const int conjuncts = 1 + static_cast<int>(rng.next_below(4));
    int literals_left = 12;
    for (int c = 0; c < conjuncts; ++c) {
      SignedConjunct conj;
      const int lits = 1 + static_cast<int>(rng.next_below(3));
      for (int b = 0; b < lits && literals_left > 0; ++b, --literals_left) {
        const int attr = static_cast<int>(rng.next_below(width));
        if (rng.bernoulli(0.25))
          conj.negated |= AttrMask{1} << attr;
        else
          conj.positive |= AttrMask{1} << attr;
      }
      conj.negated &= ~conj.positive;  // a literal cannot be both
      if (conj.positive == 0 && conj.negated == 0) conj.positive = 1;
      rule.formula.conjuncts.push_back(conj);
    }

    auto nets = encode_rules(std::span<const EncodableRule>(&rule, 1), features, 1);
    const auto& net = nets[0];
    const AttrMask used = rule.formula.attribute_union();
    const auto attrs = mask_to_attrs(used);
    REQUIRE(attrs.size() <= 12);

    for (uint32_t bits = 0; bits < (1u << attrs.size()); ++bits) {
      AttrMask assignment = 0;
      std::vector<double> input(static_cast<size_t>(width), 0.0);
      for (size_t b = 0; b < attrs.size(); ++b) {
        if (bits & (1u << b)) {
          assignment |= AttrMask{1} << attrs[b];
          input[static_cast<size_t>(attrs[b])] = 1.0;
        }
      }
      const bool satisfied = rule.formula.evaluate(assignment);
      const double activation = net.forward(input).activations[0];
      REQUIRE((activation > 0.5) == satisfied);
    }
  }
}

TEST_CASE("encode_rules rejects out-of-range attributes and classes") {
  EncodableRule bad;
  bad.class_label = 1;
  bad.formula.conjuncts = {{AttrMask{1} << 7, 0}};  // index 7 with n=2 (width 6)
  CHECK_THROWS_AS(encode_rules(std::span<const EncodableRule>(&bad, 1), 2, 1), ValidationError);

  EncodableRule wrong_class;
  wrong_class.class_label = 3;
  wrong_class.formula.conjuncts = {{1, 0}};
  CHECK_THROWS_AS(encode_rules(std::span<const EncodableRule>(&wrong_class, 1), 2, 2),
                  ValidationError);
}

TEST_CASE("concatenation keeps intra links and tags cross links inter") {
  DependencyRule r1{1, DnfFormula{{AttrMask{1} << 0}}, 1.0};
  DependencyRule r2{2, DnfFormula{{AttrMask{1} << 4}}, 1.0};
  std::vector<DependencyRule> rules = {r1, r2};
  auto subnets = encode_rules(rules, 2, 2);
  Rng rng(8);
  auto net = concatenate_modules(subnets, std::vector<int>{1, 2}, 2, {true, true}, 0.1, &rng);
  CHECK(net.layers() == std::vector<int>{6, 2, 2});
  size_t inter = 0, intra = 0;
  for (const auto& l : net.links()) {
    if (l.module == kInterModule) {
      ++inter;
      CHECK(l.layer == 2);  // only hidden -> foreign output
      CHECK(std::abs(l.weight) <= 0.1);
    } else {
      ++intra;
    }
  }
  CHECK(inter == 2);
  CHECK(intra == 14);  // 2 * (6 input links + 1 output link)
}

TEST_CASE("backprop with rate zero leaves the network unchanged") {
  auto net = random_net({3, 4, 2}, 5);
  std::vector<TrainPattern> data = {{{0.1, 0.5, 0.9}, {1.0, 0.0}}};
  BackpropOptions opt{10, 0.0, 0.0};
  auto trained = backprop_train(net, data, opt);
  for (size_t i = 0; i < net.link_count(); ++i)
    CHECK(trained.links()[i].weight == net.links()[i].weight);
}

TEST_CASE("backprop strictly decreases the loss on a single pattern") {
  auto net = random_net({2, 3, 2}, 21);
  std::vector<TrainPattern> data = {{{0.3, 0.7}, {0.9, 0.2}}};
  std::vector<double> losses;
  BackpropOptions opt{50, 0.2, 0.0};
  backprop_train(net, data, opt, &losses);
  REQUIRE(losses.size() == 51);
  for (size_t i = 1; i < losses.size(); ++i) CHECK(losses[i] < losses[i - 1]);
}

TEST_CASE("analytic gradients match central differences") {
  auto net = random_net({3, 4, 4, 2}, 33);
  Rng rng(15);
  std::vector<TrainPattern> data;
  for (int p = 0; p < 5; ++p) {
    TrainPattern tp;
    for (int i = 0; i < 3; ++i) tp.input.push_back(rng.next_double());
    for (int k = 0; k < 2; ++k) tp.target.push_back(rng.next_double());
    data.push_back(std::move(tp));
  }
  const auto grads = network_gradients(net, data);
  const auto fd = oracles::fd_weight_gradients(net, data, 1e-5);
  double worst = 0.0;
  for (size_t i = 0; i < grads.weight.size(); ++i) {
    const double denom = std::max({std::abs(grads.weight[i]), std::abs(fd[i]), 1e-8});
    worst = std::max(worst, std::abs(grads.weight[i] - fd[i]) / denom);
  }
  const auto fdb = oracles::fd_bias_gradients(net, data, 1e-5);
  for (int h = 1; h < net.layer_count(); ++h)
    for (int j = 0; j < net.layers()[static_cast<size_t>(h)]; ++j) {
      const double a = grads.bias[static_cast<size_t>(h)][static_cast<size_t>(j)];
      const double f = fdb[static_cast<size_t>(h)][static_cast<size_t>(j)];
      const double denom = std::max({std::abs(a), std::abs(f), 1e-8});
      worst = std::max(worst, std::abs(a - f) / denom);
    }
  CHECK(worst < 1e-4);
}

TEST_CASE("backprop reports divergence with the epoch") {
  auto net = random_net({1, 2, 1}, 2);
  // An absurd rate makes the decay term alternate and overflow the weights;
  // the zero input then turns inf * 0 into NaN and the loss stops being
  // finite.
  std::vector<TrainPattern> data = {{{0.0}, {0.0}}};
  for (auto& l : net.links()) l.weight = 100.0;
  BackpropOptions opt{2000, 1e12, 1e-4};
  CHECK_THROWS_WITH_AS(backprop_train(net, data, opt), doctest::Contains("epoch"), NumericError);
}

TEST_CASE("network JSON round-trips with stable bytes") {
  auto net = random_net({2, 3, 2}, 63);
  net.links()[0].present = false;
  net.links()[2].module = 2;
  const std::string json = net.to_json();
  auto back = ModularNetwork::from_json(json);
  CHECK(back.to_json() == json);
  CHECK(back.layers() == net.layers());
  CHECK(back.link_count() == net.link_count());
  CHECK(back.links()[0].present == false);
  CHECK(back.links()[2].module == 2);
  const std::vector<double> input = {0.4, 0.6};
  CHECK(back.forward(input).activations == net.forward(input).activations);
}

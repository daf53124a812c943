#include <doctest.h>

#include <cmath>

#include "rufmine/fuzzy.hpp"
#include "rufmine/rng.hpp"

using namespace rufmine;

TEST_CASE("pi function hits 1 at the center and 0 at the radius") {
  PiParams p{0.5, 0.25};  // dyadic values keep the boundary exact in floating point
  CHECK(pi_membership(0.5, p) == 1.0);
  CHECK(pi_membership(0.75, p) == 0.0);
  CHECK(pi_membership(0.25, p) == 0.0);
  CHECK(pi_membership(0.9, p) == 0.0);

  PiParams table{0.346, 0.117};  // a published parameter pair
  CHECK(pi_membership(0.346, table) == 1.0);
  CHECK(pi_membership(0.346 + 0.117, table) < 1e-9);
  CHECK(pi_membership(0.346 + 0.2, table) == 0.0);
}

TEST_CASE("pi function gives one half at half the radius from both branches") {
  PiParams p{0.5, 0.2};
  const double d = 0.1;  // lambda / 2
  const double inner = 1.0 - 2.0 * (d / p.radius) * (d / p.radius);
  const double outer = 2.0 * (1.0 - d / p.radius) * (1.0 - d / p.radius);
  CHECK(inner == doctest::Approx(0.5));
  CHECK(outer == doctest::Approx(0.5));
  CHECK(pi_membership(0.6, p) == doctest::Approx(0.5));
  CHECK(pi_membership(0.4, p) == doctest::Approx(0.5));
}

TEST_CASE("pi function is continuous at the band boundaries") {
  PiParams p{0.0, 1.0};
  const double eps = 1e-10;
  for (double at : {0.5, 1.0}) {
    const double left = pi_membership(at - eps, p);
    const double right = pi_membership(at + eps, p);
    CHECK(std::abs(left - right) < 1e-9);
  }
}

TEST_CASE("pi function is nonincreasing in the distance from the center") {
  PiParams p{0.3, 0.45};
  Rng rng(5);
  for (int i = 0; i < 500; ++i) {
    const double d1 = rng.next_range(0.0, 0.6);
    const double d2 = rng.next_range(0.0, 0.6);
    const double lo = std::min(d1, d2), hi = std::max(d1, d2);
    CHECK(pi_membership(p.center + lo, p) >= pi_membership(p.center + hi, p));
  }
}

TEST_CASE("fuzzify produces 3n values in [0,1] ordered L,M,H per feature") {
  FuzzyEncoding enc;
  enc.features = {{{0.25, 0.25}, {0.5, 0.25}, {0.75, 0.25}},
                  {{0.2, 0.3}, {0.5, 0.3}, {0.8, 0.3}},
                  {{0.346, 0.117}, {0.469, 0.169}, {0.619, 0.136}}};
  const std::vector<double> pattern = {0.5, 0.2, 0.346};
  const auto out = fuzzify(pattern, enc);
  REQUIRE(out.size() == 9);
  for (double v : out) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  CHECK(out[1] == 1.0);  // M_1 at its center
  CHECK(out[3] == 1.0);  // L_2 at its center
  CHECK(out[6] == 1.0);  // L_3 at its center
}

TEST_CASE("fuzzify rejects mismatched pattern lengths") {
  FuzzyEncoding enc;
  enc.features = {{{0.25, 0.25}, {0.5, 0.25}, {0.75, 0.25}}};
  CHECK_THROWS_AS(fuzzify(std::vector<double>{0.1, 0.2}, enc), ParameterError);
}

namespace {

DecisionTable uniform_table(size_t count) {
  DecisionTable t;
  t.base.attribute_names = {"f1"};
  for (size_t i = 0; i < count; ++i) {
    t.base.rows.push_back({static_cast<double>(i) / static_cast<double>(count - 1)});
    t.decisions.push_back(i % 2 == 0 ? 1 : 2);
  }
  return t;
}

}  // namespace

TEST_CASE("init_encoding centers sit at the quartiles") {
  auto t = uniform_table(101);
  auto enc = init_encoding(t);
  REQUIRE(enc.feature_count() == 1);
  CHECK(enc.features[0].low.center == doctest::Approx(0.25).epsilon(0.02));
  CHECK(enc.features[0].medium.center == doctest::Approx(0.5).epsilon(0.02));
  CHECK(enc.features[0].high.center == doctest::Approx(0.75).epsilon(0.02));
}

TEST_CASE("init_encoding treats identical features identically") {
  DecisionTable t;
  t.base.attribute_names = {"f1", "f2"};
  for (int i = 0; i < 20; ++i) {
    const double v = 0.05 * i;
    t.base.rows.push_back({v, v});
    t.decisions.push_back(i % 2 + 1);
  }
  auto enc = init_encoding(t);
  CHECK(enc.features[0].low.center == enc.features[1].low.center);
  CHECK(enc.features[0].medium.radius == enc.features[1].medium.radius);
  CHECK(enc.features[0].high.center == enc.features[1].high.center);
}

TEST_CASE("init_encoding rejects constant features by name") {
  DecisionTable t;
  t.base.attribute_names = {"flat"};
  for (int i = 0; i < 6; ++i) {
    t.base.rows.push_back({1.0});
    t.decisions.push_back(i % 2 + 1);
  }
  CHECK_THROWS_WITH_AS(init_encoding(t), doctest::Contains("flat"), ValidationError);
}

TEST_CASE("init_encoding crosses adjacent terms at membership one half") {
  // Symmetric quartile spacing makes the crossing exact.
  auto t = uniform_table(101);
  auto enc = init_encoding(t);
  const double mid_lm = 0.5 * (enc.features[0].low.center + enc.features[0].medium.center);
  CHECK(pi_membership(mid_lm, enc.features[0].low) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(pi_membership(mid_lm, enc.features[0].medium) == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("init_encoding is deterministic") {
  auto t = uniform_table(50);
  auto e1 = init_encoding(t);
  auto e2 = init_encoding(t);
  CHECK(e1.features[0].low.center == e2.features[0].low.center);
  CHECK(e1.features[0].high.radius == e2.features[0].high.radius);
}

TEST_CASE("class membership is 1 at the class mean and 0.5 at distance f_d") {
  ClassStatistics stats;
  stats.mean = {{1.0}};
  stats.spread = {{1.0}};
  FuzzyGenerators gen{1.0, 2.0};

  auto mu_at = [&](double x) {
    return class_membership(std::vector<double>{x}, stats, gen)[0];
  };
  CHECK(mu_at(1.0) == 1.0);
  CHECK(mu_at(2.0) == doctest::Approx(0.5));  // z = 1 = f_d
}

TEST_CASE("class membership matches the hand-evaluated distance form") {
  ClassStatistics stats;
  stats.mean = {{1.0}};
  stats.spread = {{1.0}};
  FuzzyGenerators gen{1.0, 2.0};
  const double z = weighted_distance(std::vector<double>{2.0}, stats, 1);
  CHECK(z == doctest::Approx(1.0));
  const auto mu = class_membership(std::vector<double>{2.0}, stats, gen);
  CHECK(mu[0] == doctest::Approx(0.5));
}

TEST_CASE("class membership decreases strictly with distance") {
  ClassStatistics stats;
  stats.mean = {{0.0, 0.0}};
  stats.spread = {{1.0, 1.0}};
  FuzzyGenerators gen{0.7, 1.3};
  double prev = 2.0;
  for (double x = 0.0; x < 3.0; x += 0.1) {
    const double mu = class_membership(std::vector<double>{x, x}, stats, gen)[0];
    CHECK(mu < prev);
    prev = mu;
  }
}

TEST_CASE("zero within-class spread is replaced, not divided by") {
  DecisionTable t;
  t.base.attribute_names = {"f1", "f2"};
  t.base.rows = {{1.0, 0.1}, {1.0, 0.2}, {2.0, 0.8}, {2.0, 0.9}};
  t.decisions = {1, 1, 2, 2};
  auto stats = compute_class_statistics(t);
  CHECK(stats.spread[0][0] > 0.0);
  CHECK(stats.spread[1][0] > 0.0);
  const auto mu = class_membership(t.base.rows[0], stats, FuzzyGenerators{1.0, 1.0});
  CHECK(std::isfinite(mu[0]));
}

TEST_CASE("encoding JSON round-trips") {
  FuzzyEncoding enc;
  enc.features = {{{0.346, 0.117}, {0.469, 0.169}, {0.619, 0.136}}};
  FuzzyGenerators gen{0.81, 1.5};
  const std::string json = encoding_to_json(enc, gen);
  FuzzyEncoding enc2;
  FuzzyGenerators gen2;
  parse_encoding_json(json, enc2, gen2);
  CHECK(enc2.features[0].low.center == 0.346);
  CHECK(enc2.features[0].high.radius == 0.136);
  CHECK(gen2.f_d == 0.81);
  CHECK(gen2.f_e == 1.5);
}

#include <doctest.h>

#include <numeric>

#include "oracles.hpp"
#include "rufmine/decision_table.hpp"
#include "rufmine/rng.hpp"

using namespace rufmine;

namespace {

DecisionTable make_table(std::vector<std::vector<double>> rows, std::vector<int> classes) {
  DecisionTable t;
  const size_t m = rows.empty() ? 0 : rows[0].size();
  for (size_t a = 0; a < m; ++a) t.base.attribute_names.push_back("a" + std::to_string(a + 1));
  t.base.rows = std::move(rows);
  t.decisions = std::move(classes);
  return t;
}

DecisionTable random_table(Rng& rng, size_t objects, size_t attrs, int values, int classes) {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (size_t i = 0; i < objects; ++i) {
    std::vector<double> row;
    for (size_t a = 0; a < attrs; ++a) row.push_back(static_cast<double>(rng.next_below(values)));
    rows.push_back(std::move(row));
    labels.push_back(static_cast<int>(rng.next_below(classes)) + 1);
  }
  // Keep labels contiguous.
  for (int k = 0; k < classes && k < static_cast<int>(objects); ++k) labels[static_cast<size_t>(k)] = k + 1;
  return make_table(std::move(rows), std::move(labels));
}

}  // namespace

TEST_CASE("complete_table drop removes offending objects") {
  const double miss = InformationSystem::missing_marker();
  auto t = make_table({{1, 1}, {2, miss}, {3, 3}, {4, 4}, {5, 5}}, {1, 1, 2, 2, 1});
  Diagnostics diag;
  auto out = complete_table(t, CompletionPolicy::Drop, &diag);
  CHECK(out.object_count() == 4);
  CHECK(diag.contains("dropped 1"));
  CHECK_FALSE(out.base.has_missing());
}

TEST_CASE("complete_table is the identity without missing cells") {
  auto t = make_table({{1, 2}, {3, 4}}, {1, 2});
  auto out = complete_table(t, CompletionPolicy::Drop);
  CHECK(out.base.rows == t.base.rows);
  CHECK(out.decisions == t.decisions);
}

TEST_CASE("complete_table mean fills with the attribute mean") {
  const double miss = InformationSystem::missing_marker();
  auto t = make_table({{1.0}, {3.0}, {miss}}, {1, 2, 1});
  auto out = complete_table(t, CompletionPolicy::Mean);
  CHECK(out.base.rows[2][0] == doctest::Approx(2.0));
}

TEST_CASE("complete_table errors when everything is removed") {
  const double miss = InformationSystem::missing_marker();
  auto t = make_table({{miss}, {miss}}, {1, 2});
  CHECK_THROWS_AS(complete_table(t, CompletionPolicy::Drop), ValidationError);
}

TEST_CASE("candidate cuts appear only between class-mixed neighbours") {
  auto t = make_table({{0.1}, {0.3}, {0.5}}, {1, 2, 2});
  auto cuts = candidate_cuts(t);
  REQUIRE(cuts.cuts.size() == 1);
  CHECK(cuts.cuts[0] == std::vector<double>{0.2});
}

TEST_CASE("a single object yields no cuts") {
  auto t = make_table({{0.7, 1.2}}, {1});
  CHECK(candidate_cuts(t).total() == 0);
}

TEST_CASE("constant attributes yield empty cut lists") {
  auto t = make_table({{1.0}, {1.0}, {1.0}}, {1, 2, 1});
  CHECK(candidate_cuts(t).cuts[0].empty());
}

TEST_CASE("rsbr selects the single separating cut") {
  auto t = make_table({{0.1}, {0.2}, {0.8}, {0.9}}, {1, 1, 2, 2});
  auto r = rsbr_discretize(t, candidate_cuts(t));
  REQUIRE(r.selected.cuts[0].size() == 1);
  CHECK(r.selected.cuts[0][0] == doctest::Approx(0.5));
  CHECK(r.table.base.rows[0][0] == 0.0);
  CHECK(r.table.base.rows[1][0] == 0.0);
  CHECK(r.table.base.rows[2][0] == 1.0);
  CHECK(r.table.base.rows[3][0] == 1.0);
}

TEST_CASE("rsbr on a one-class table selects nothing") {
  auto t = make_table({{0.1}, {0.5}, {0.9}}, {1, 1, 1});
  auto r = rsbr_discretize(t, candidate_cuts(t));
  CHECK(r.selected.total() == 0);
}

TEST_CASE("rsbr records inconsistent pairs instead of failing") {
  auto t = make_table({{1.0}, {1.0}}, {1, 2});
  Diagnostics diag;
  auto r = rsbr_discretize(t, candidate_cuts(t), &diag);
  CHECK(diag.contains("inconsistent pair"));
  CHECK(r.selected.total() == 0);
}

TEST_CASE("rsbr preserves discernibility and stays within 2x of optimal") {
  Rng rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    const size_t objects = 3 + rng.next_below(10);  // <= 12
    auto t = random_table(rng, objects, 1 + rng.next_below(3), 4, 2 + static_cast<int>(rng.next_below(2)));
    auto cuts = candidate_cuts(t);
    if (cuts.total() > 10 || cuts.total() == 0) { --trial; continue; }

    auto r = rsbr_discretize(t, cuts);

    std::vector<oracles::FlatCut> flat;
    for (size_t a = 0; a < cuts.cuts.size(); ++a)
      for (double v : cuts.cuts[a]) flat.push_back({a, v});

    // Consistency: every separable pair stays separated by the selection.
    for (size_t i = 1; i < t.object_count(); ++i) {
      for (size_t j = 0; j < i; ++j) {
        if (t.decisions[i] == t.decisions[j]) continue;
        bool separable = false;
        for (const auto& c : flat)
          if (oracles::cut_separates(t, c, i, j)) { separable = true; break; }
        if (!separable) continue;
        bool selected_separates = false;
        for (size_t a = 0; a < r.selected.cuts.size() && !selected_separates; ++a)
          for (double v : r.selected.cuts[a])
            if (oracles::cut_separates(t, {a, v}, i, j)) { selected_separates = true; break; }
        REQUIRE(selected_separates);
      }
    }

    const size_t optimal = oracles::brute_force_min_cuts(t, flat);
    REQUIRE(r.selected.total() <= 2 * std::max<size_t>(optimal, 1));
    if (optimal == 0) REQUIRE(r.selected.total() == 0);
  }
}

TEST_CASE("greedy matches brute force on an already-consistent single-cut case") {
  auto t = make_table({{0.1, 5.0}, {0.2, 7.0}, {0.8, 5.0}, {0.9, 7.0}}, {1, 1, 2, 2});
  auto cuts = candidate_cuts(t);
  auto r = rsbr_discretize(t, cuts);
  std::vector<oracles::FlatCut> flat;
  for (size_t a = 0; a < cuts.cuts.size(); ++a)
    for (double v : cuts.cuts[a]) flat.push_back({a, v});
  CHECK(r.selected.total() == oracles::brute_force_min_cuts(t, flat));
}

TEST_CASE("split honours the requested fraction") {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 100; ++i) {
    rows.push_back({static_cast<double>(i)});
    labels.push_back(i < 50 ? 1 : 2);
  }
  auto t = make_table(std::move(rows), std::move(labels));
  auto s = split(t, 0.1, 7);
  CHECK(s.train.object_count() == 10);
  CHECK(s.test.object_count() == 90);
}

TEST_CASE("split is deterministic and a partition") {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 10; ++i) {
    rows.push_back({static_cast<double>(i)});
    labels.push_back(i % 2 + 1);
  }
  auto t = make_table(std::move(rows), std::move(labels));
  auto s1 = split(t, 0.5, 3);
  auto s2 = split(t, 0.5, 3);
  CHECK(s1.train_indices == s2.train_indices);
  CHECK(s1.test_indices == s2.test_indices);

  std::vector<size_t> all = s1.train_indices;
  all.insert(all.end(), s1.test_indices.begin(), s1.test_indices.end());
  std::sort(all.begin(), all.end());
  std::vector<size_t> expect(t.object_count());
  std::iota(expect.begin(), expect.end(), size_t{0});
  CHECK(all == expect);
}

TEST_CASE("split rejects classes too small to stratify") {
  auto t = make_table({{1.0}, {2.0}}, {1, 2});
  CHECK_THROWS_AS(split(t, 0.1, 1), ValidationError);
}

TEST_CASE("decision table CSV round-trips including missing cells") {
  const double miss = InformationSystem::missing_marker();
  auto t = make_table({{1.25, miss}, {2.5, 4.75}}, {1, 2});
  const std::string csv = decision_table_to_csv(t);
  auto back = parse_decision_table_csv(csv);
  CHECK(back.attribute_count() == 2);
  CHECK(InformationSystem::is_missing(back.base.rows[0][1]));
  CHECK(back.base.rows[1][0] == 2.5);
  CHECK(back.decisions == std::vector<int>{1, 2});
}

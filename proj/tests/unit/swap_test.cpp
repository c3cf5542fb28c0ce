#include <algorithm>
#include <set>

#include "doctest.h"

#include "fairswap/error.hpp"
#include "fairswap/swap.hpp"
#include "support/synthetic.hpp"

using namespace fairswap;

namespace {

TabularDataset mixed_dataset(std::uint64_t seed, std::size_t n = 60) {
  return testing::make_linear_dataset(
      n, {{FeatureKind::Categorical, 1.0}, {FeatureKind::Continuous, 0.5}, {FeatureKind::Categorical, -1.0},
          {FeatureKind::Continuous, 0.0}},
      seed);
}

// Cells that differ between two datasets with identical shape.
std::vector<std::pair<std::size_t, std::size_t>> changed_cells(const TabularDataset& a, const TabularDataset& b) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t j = 0; j < a.n_features(); ++j) {
    for (std::size_t i = 0; i < a.n_rows(); ++i) {
      if (a.value(i, j) != b.value(i, j)) out.emplace_back(i, j);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("select_swap_indices") {
  Rng rng(1);
  const auto all = select_swap_indices(10, 1.0, rng);
  CHECK(all == std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
  const auto half = select_swap_indices(10, 0.5, rng);
  CHECK(half.size() == 5);
  CHECK(std::is_sorted(half.begin(), half.end()));
  CHECK(std::set<std::size_t>(half.begin(), half.end()).size() == 5);
  Rng a(99), b(99);
  CHECK(select_swap_indices(1000, 0.3, a) == select_swap_indices(1000, 0.3, b));
  CHECK(select_swap_indices(3, 0.1, rng).empty());
  CHECK_THROWS_AS(select_swap_indices(10, 0.0, rng), Error);
  CHECK_THROWS_AS(select_swap_indices(10, 1.5, rng), Error);
}

TEST_CASE("distortion") {
  const auto ds = TabularDataset::from_columns({"a", "b", "x"}, {{0, 1, 0}, {1, 0, 0}, {10, 20, 30}}, {0, 1, 0});
  const auto& schema = ds.schema();
  CHECK(distortion(std::vector<double>{0, 1, 10}, std::vector<double>{0, 1, 10}, schema) == 0.0);
  CHECK(distortion(std::vector<double>{0, 1, 10}, std::vector<double>{1, 1, 10}, schema) == 1.0);
  CHECK(distortion(std::vector<double>{0, 1, 10}, std::vector<double>{1, 0, 10}, schema) == 2.0);
  CHECK(distortion(std::vector<double>{0, 1, 10}, std::vector<double>{0, 1, 15}, schema) == doctest::Approx(0.25));
  CHECK_THROWS_AS(distortion(std::vector<double>{0, 1}, std::vector<double>{0, 1}, schema), Error);
}

TEST_CASE("alternate_value") {
  Rng rng(4);
  const auto binary = partition_values(0, FeatureKind::Categorical, std::vector<double>{0, 1, 1, 0});
  CHECK(alternate_value(binary, 0.0, rng) == 1.0);
  CHECK(alternate_value(binary, 1.0, rng) == 0.0);
  const auto cont = partition_values(0, FeatureKind::Continuous, std::vector<double>{1, 2, 3, 7, 8, 9, 10});
  for (int t = 0; t < 50; ++t) {
    const double v = alternate_value(cont, 2.0, rng);
    CHECK(cont.category_of(v) == Category::C2);
    CHECK(std::count(cont.c2.begin(), cont.c2.end(), v) == 1);
  }
  CHECK_THROWS_AS(alternate_value(binary, 5.0, rng), Error);
  Rng a(8), b(8);
  for (int t = 0; t < 20; ++t) CHECK(alternate_value(cont, 9.0, a) == alternate_value(cont, 9.0, b));
}

TEST_CASE("single_swap examples") {
  const auto ds = TabularDataset::from_columns({"b", "x"}, {{0, 1, 0, 1}, {10, 20, 30, 40}}, {0, 1, 0, 1});
  Rng rng(2);
  SUBCASE("empty I leaves the data untouched") {
    const auto r = single_swap(ds, 0, std::vector<std::size_t>{}, 0.2, rng);
    CHECK(r.data == ds);
    CHECK(r.altered.empty());
  }
  SUBCASE("binary flip of row 0") {
    const auto r = single_swap(ds, 0, std::vector<std::size_t>{0}, 0.0, rng);
    const auto diff = changed_cells(ds, r.data);
    REQUIRE(diff.size() == 1);
    CHECK(diff[0] == std::pair<std::size_t, std::size_t>{0, 0});
    CHECK(r.data.value(0, 0) == 1.0);
    CHECK(r.distortions == std::vector<double>{1.0});
  }
  SUBCASE("continuous swap with zero budget changes nothing") {
    const auto r = single_swap(ds, 1, std::vector<std::size_t>{0, 1, 2, 3}, 0.0, rng);
    CHECK(r.altered.empty());
    CHECK(r.data == ds);
    CHECK(r.distortions.size() == 4);
  }
  SUBCASE("unbounded budget crosses every selected row") {
    const auto part = partition_feature(ds, 1);
    const std::vector<std::size_t> rows{1, 2};
    const auto r = single_swap(ds, part, rows, kUnboundedDistortion, rng);
    CHECK(r.altered == rows);
    for (std::size_t i : rows) CHECK(part.category_of(r.data.value(i, 1)) != part.category_of(ds.value(i, 1)));
  }
  CHECK_THROWS_AS(single_swap(ds, 0, std::vector<std::size_t>{7}, 0.2, rng), Error);
}

TEST_CASE("single_swap properties") {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const auto ds = mixed_dataset(seed);
    Rng rng(seed * 31);
    const std::size_t j = seed % ds.n_features();
    const auto part = partition_feature(ds, j);
    const double d_max = 0.1 * static_cast<double>(seed % 6);
    const auto rows = select_swap_indices(ds.n_rows(), 0.4, rng);
    Rng r1(seed), r2(seed);
    const auto a = single_swap(ds, part, rows, d_max, r1);
    const auto b = single_swap(ds, part, rows, d_max, r2);
    CHECK(a.data == b.data);
    CHECK(a.altered == b.altered);
    CHECK(a.distortions == b.distortions);

    const std::set<std::size_t> in_i(rows.begin(), rows.end());
    for (const auto& [i, col] : changed_cells(ds, a.data)) {
      CHECK(col == j);
      CHECK(in_i.count(i) == 1);
    }
    for (std::size_t i : a.altered) {
      CHECK(in_i.count(i) == 1);
      CHECK(part.category_of(a.data.value(i, j)) != part.category_of(ds.value(i, j)));
      const double d = distortion(ds.row(i), a.data.row(i), ds.schema());
      if (part.kind == FeatureKind::Continuous) CHECK(d <= d_max);
    }
    if (part.kind == FeatureKind::Categorical) CHECK(a.altered == rows);
    CHECK(std::equal(a.data.target().begin(), a.data.target().end(), ds.target().begin()));
  }
}

TEST_CASE("temporal_order by frequency") {
  // p(C1): a = 0.75, b = 0.25, c = 0.5, d = 0.5
  const auto ds = TabularDataset::from_columns(
      {"a", "b", "c", "d"}, {{0, 0, 0, 1}, {0, 1, 1, 1}, {0, 0, 1, 1}, {1, 0, 1, 0}}, {0, 1, 0, 1});
  const auto t = temporal_order(ds, {});
  CHECK(t.event_probability == std::vector<double>{0.75, 0.25, 0.5, 0.5});
  CHECK(t.order == std::vector<std::size_t>{0, 2, 3, 1});
  CHECK(t.position == std::vector<std::size_t>{0, 3, 1, 2});
  CHECK(t.violations.empty());
  CHECK(t.relation(0, 1) == OrderProvenance::StatisticallyInferred);

  SUBCASE("user prefix wins and violations are flagged") {
    const std::vector<std::string> user{"b", "a"};
    const auto u = temporal_order(ds, user);
    CHECK(u.order == std::vector<std::size_t>{1, 0, 2, 3});
    REQUIRE(u.violations.size() == 1);
    CHECK(u.violations[0].earlier == 1);
    CHECK(u.violations[0].later == 0);
    CHECK(u.relation(1, 0) == OrderProvenance::UserSpecified);
    CHECK(u.relation(1, 2) == OrderProvenance::StatisticallyInferred);
    CHECK_THROWS_WITH_AS(temporal_order(ds, user, true), doctest::Contains("violates"), Error);
  }
  SUBCASE("consistent prefix has no violations") {
    const std::vector<std::string> user{"a", "b"};
    CHECK(temporal_order(ds, user, true).violations.empty());
  }
  SUBCASE("bad names") {
    const std::vector<std::string> unknown{"zzz"};
    CHECK_THROWS_WITH_AS(temporal_order(ds, unknown), doctest::Contains("unknown feature"), Error);
    const std::vector<std::string> dup{"a", "a"};
    CHECK_THROWS_WITH_AS(temporal_order(ds, dup), doctest::Contains("twice"), Error);
  }
}

TEST_CASE("temporal_order is a permutation") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto ds = mixed_dataset(seed, 40);
    const auto t = temporal_order(ds, {});
    std::vector<std::size_t> sorted = t.order;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t j = 0; j < ds.n_features(); ++j) {
      CHECK(sorted[j] == j);
      CHECK(t.order[t.position[j]] == j);
    }
    for (std::size_t k = 1; k < t.order.size(); ++k) {
      CHECK(t.event_probability[t.order[k - 1]] >= t.event_probability[t.order[k]]);
    }
  }
}

TEST_CASE("mediator_pairs") {
  TemporalOrder t;
  t.order = {0, 1};
  CHECK(mediator_pairs(t).size() == 1);
  t.order = {4, 3, 2, 1, 0};
  CHECK(mediator_pairs(t).size() == 10);
  // race = 2, sex = 0, age = 1
  t.order = {2, 0, 1};
  const std::vector<std::pair<std::size_t, std::size_t>> expected{{2, 0}, {2, 1}, {0, 1}};
  CHECK(mediator_pairs(t) == expected);
  t.order = {0};
  CHECK(mediator_pairs(t).empty());
}

TEST_CASE("double swap scenarios") {
  const auto ds = TabularDataset::from_columns({"j", "m", "x"}, {{0, 1, 0, 1}, {1, 1, 0, 0}, {5, 6, 7, 8}},
                                               {0, 1, 1, 0});
  const auto pj = partition_feature(ds, 0);
  const auto pm = partition_feature(ds, 1);
  Rng rng(6);
  const std::vector<std::size_t> none;
  const std::vector<std::size_t> row0{0};

  const auto e1 = double_swap_scenario1(ds, pj, pm, none, 0.2, rng);
  CHECK(e1.first.data == ds);
  CHECK(e1.second.data == ds);
  const auto e2 = double_swap_scenario2(ds, pj, pm, none, 0.2, rng);
  CHECK(e2.second.data == ds);

  const auto s1 = double_swap_scenario1(ds, pj, pm, row0, 0.2, rng);
  CHECK(changed_cells(ds, s1.first.data) == std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}});
  CHECK(changed_cells(s1.first.data, s1.second.data) == std::vector<std::pair<std::size_t, std::size_t>>{{0, 0}});

  const auto s2 = double_swap_scenario2(ds, pj, pm, row0, 0.2, rng);
  CHECK(changed_cells(ds, s2.first.data) == std::vector<std::pair<std::size_t, std::size_t>>{{0, 0}});
  CHECK(changed_cells(s2.first.data, s2.second.data) == std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}});
}

TEST_CASE("double swap locality") {
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    const auto ds = mixed_dataset(seed);
    const auto pj = partition_feature(ds, 1);
    const auto pm = partition_feature(ds, 2);
    Rng rng(seed);
    const auto rows = select_swap_indices(ds.n_rows(), 0.5, rng);
    const std::set<std::size_t> in_i(rows.begin(), rows.end());
    for (const auto& out : {double_swap_scenario1(ds, pj, pm, rows, 0.3, rng),
                            double_swap_scenario2(ds, pj, pm, rows, 0.3, rng)}) {
      for (const auto& [i, col] : changed_cells(ds, out.second.data)) {
        CHECK((col == 1 || col == 2));
        CHECK(in_i.count(i) == 1);
      }
    }
  }
}

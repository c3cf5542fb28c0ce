#include <cmath>

#include "doctest.h"

#include "fairswap/attribution.hpp"
#include "fairswap/error.hpp"
#include "fairswap/impact.hpp"
#include "support/synthetic.hpp"

using namespace fairswap;

namespace {

LogisticModel unit_model(std::vector<double> w, double b = 0.0) {
  LogisticModel m;
  m.weights = std::move(w);
  m.intercept = b;
  m.means.assign(m.weights.size(), 0.0);
  m.scales.assign(m.weights.size(), 1.0);
  return m;
}

}  // namespace

TEST_CASE("shap_linear examples") {
  SUBCASE("row at the training mean has zero attributions") {
    auto m = unit_model({0.3, -2.0}, 0.7);
    m.means = {4.0, 9.0};
    m.scales = {2.0, 3.0};
    const auto ds = TabularDataset::from_columns({"a", "b"}, {{4.0}, {9.0}}, {1});
    const auto attr = shap_linear(m, ds);
    CHECK(attr.at(0, 0) == 0.0);
    CHECK(attr.at(0, 1) == 0.0);
    CHECK(attr.base_value == 0.7);
  }
  SUBCASE("w = (1, 0), z = (2, 5)") {
    const auto ds = TabularDataset::from_columns({"a", "b"}, {{2.0}, {5.0}}, {1});
    const auto attr = shap_linear(unit_model({1.0, 0.0}), ds);
    CHECK(attr.at(0, 0) == 2.0);
    CHECK(attr.at(0, 1) == 0.0);
  }
  CHECK_THROWS_AS(shap_linear(unit_model({1.0}), TabularDataset::from_columns({"a", "b"}, {{1}, {2}}, {0})),
                  Error);
}

TEST_CASE("attributions sum to log-odds minus the base value") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const auto ds = testing::make_linear_dataset(
        120, {{FeatureKind::Continuous, 1.0}, {FeatureKind::Categorical, -0.7}, {FeatureKind::Continuous, 0.2}},
        seed);
    const auto model = fit_logistic(ds, {});
    const auto attr = shap_linear(model, ds);
    const auto lo = predict_log_odds(model, ds);
    double mean_lo = 0;
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
      double s = attr.base_value;
      for (std::size_t j = 0; j < ds.n_features(); ++j) s += attr.at(i, j);
      CHECK(s == doctest::Approx(lo[i]).epsilon(1e-12));
      mean_lo += lo[i];
    }
    // on the training fold the reference point reproduces the mean log-odds
    CHECK(mean_lo / static_cast<double>(ds.n_rows()) == doctest::Approx(attr.base_value).epsilon(1e-9));
  }
}

TEST_CASE("global_importance") {
  AttributionMatrix zero{3, 2, std::vector<double>(6, 0.0), 0.0};
  CHECK(global_importance(zero) == std::vector<double>{0.0, 0.0});
  AttributionMatrix pm{2, 1, {1.0, -1.0}, 0.0};
  CHECK(global_importance(pm) == std::vector<double>{1.0});
  CHECK_THROWS_AS(global_importance(AttributionMatrix{}), Error);

  Rng rng(12);
  AttributionMatrix r{37, 5, {}, 0.0};
  for (std::size_t k = 0; k < 37 * 5; ++k) r.values.push_back(rng.normal());
  const auto phi = global_importance(r);
  for (std::size_t j = 0; j < 5; ++j) {
    double s = 0;
    for (std::size_t i = 0; i < 37; ++i) s += std::fabs(r.values[i * 5 + j]);
    CHECK(phi[j] == doctest::Approx(s / 37.0).epsilon(1e-14));
  }
}

TEST_CASE("zero weight gives zero importance") {
  const auto ds = testing::make_linear_dataset(50, {{FeatureKind::Continuous, 1}, {FeatureKind::Continuous, 1}}, 4);
  const auto phi = global_importance(shap_linear(unit_model({0.0, 0.5}), ds));
  CHECK(phi[0] == 0.0);
  CHECK(phi[1] > 0.0);
}

TEST_CASE("importance ranking does not depend on feature units") {
  const auto ds = testing::make_linear_dataset(
      300, {{FeatureKind::Continuous, 2.0}, {FeatureKind::Continuous, 0.5}, {FeatureKind::Categorical, 1.0}}, 21);
  std::vector<double> scaled(ds.column(0).begin(), ds.column(0).end());
  for (double& v : scaled) v *= 1000.0;
  const auto rescaled = ds.with_column(0, scaled);
  const auto a = global_importance(shap_linear(fit_logistic(ds, {}), ds));
  const auto b = global_importance(shap_linear(fit_logistic(rescaled, {}), rescaled));
  CHECK(rank_features(a).ranks == rank_features(b).ranks);
  for (std::size_t j = 0; j < 3; ++j) CHECK(a[j] == doctest::Approx(b[j]).epsilon(1e-6));
}

#pragma once

// Deterministic synthetic datasets for tests.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fairswap/dataset.hpp"
#include "fairswap/model.hpp"
#include "fairswap/random.hpp"

namespace fairswap::testing {

struct SyntheticFeature {
  FeatureKind kind = FeatureKind::Continuous;
  double weight = 0.0;  // effect on the log-odds per standard deviation
};

// Binary features are Bernoulli(0.5) on {0, 1}; continuous ones are uniform
// on [0, 100]. Labels are Bernoulli(sigmoid(sum w_j z_j)).
inline TabularDataset make_linear_dataset(std::size_t n, const std::vector<SyntheticFeature>& spec,
                                          std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> cols(spec.size(), std::vector<double>(n));
  std::vector<int> target(n);
  std::vector<std::string> names;
  std::vector<FeatureKind> kinds;
  for (std::size_t j = 0; j < spec.size(); ++j) {
    names.push_back("f" + std::to_string(j));
    kinds.push_back(spec[j].kind);
  }
  for (std::size_t i = 0; i < n; ++i) {
    double score = 0.0;
    for (std::size_t j = 0; j < spec.size(); ++j) {
      double z;
      if (spec[j].kind == FeatureKind::Categorical) {
        cols[j][i] = rng.uniform01() < 0.5 ? 0.0 : 1.0;
        z = (cols[j][i] - 0.5) / 0.5;
      } else {
        cols[j][i] = 100.0 * rng.uniform01();
        z = (cols[j][i] - 50.0) / 28.87;
      }
      score += spec[j].weight * z;
    }
    target[i] = rng.uniform01() < sigmoid(score) ? 1 : 0;
  }
  return TabularDataset::from_columns(names, cols, target, kinds);
}

}  // namespace fairswap::testing

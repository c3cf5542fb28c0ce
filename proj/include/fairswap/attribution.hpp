#pragma once

#include <cstddef>
#include <vector>

#include "fairswap/dataset.hpp"
#include "fairswap/model.hpp"

namespace fairswap {

// Per-row Shapley values of a logistic model on the log-odds scale.
struct AttributionMatrix {
  std::size_t n_rows = 0;
  std::size_t n_features = 0;
  std::vector<double> values;  // row-major
  // Log-odds at the reference point (the training mean). Each row's
  // attributions sum to its log-odds minus this value.
  double base_value = 0.0;

  double at(std::size_t i, std::size_t j) const { return values[i * n_features + j]; }
};

// Interventional linear SHAP against the training-fold mean:
// phi_j(x) = w_j * (z_j(x) - mean z_j) where mean z_j = 0 by standardization.
// On the training fold itself base_value equals the mean log-odds.
AttributionMatrix shap_linear(const LogisticModel& model, const TabularDataset& ds);

// Mean absolute attribution per feature.
std::vector<double> global_importance(const AttributionMatrix& attr);

}  // namespace fairswap

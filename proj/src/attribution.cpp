#include "fairswap/attribution.hpp"

#include <cmath>

#include "fairswap/error.hpp"

namespace fairswap {

AttributionMatrix shap_linear(const LogisticModel& model, const TabularDataset& ds) {
  if (ds.n_features() != model.n_features()) {
    throw Error("shap: dataset has " + std::to_string(ds.n_features()) +
                " features, model expects " + std::to_string(model.n_features()));
  }
  AttributionMatrix attr;
  attr.n_rows = ds.n_rows();
  attr.n_features = ds.n_features();
  attr.values.resize(attr.n_rows * attr.n_features);
  attr.base_value = model.intercept;
  for (std::size_t j = 0; j < attr.n_features; ++j) {
    const auto col = ds.column(j);
    for (std::size_t i = 0; i < attr.n_rows; ++i) {
      attr.values[i * attr.n_features + j] = model.weights[j] * model.standardize(j, col[i]);
    }
  }
  return attr;
}

std::vector<double> global_importance(const AttributionMatrix& attr) {
  if (attr.n_rows == 0 || attr.n_features == 0) throw Error("global_importance: empty attribution matrix");
  std::vector<double> phi(attr.n_features, 0.0);
  for (std::size_t i = 0; i < attr.n_rows; ++i) {
    for (std::size_t j = 0; j < attr.n_features; ++j) phi[j] += std::abs(attr.at(i, j));
  }
  for (double& v : phi) v /= static_cast<double>(attr.n_rows);
  return phi;
}

}  // namespace fairswap

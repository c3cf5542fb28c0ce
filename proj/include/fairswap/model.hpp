#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"

#include "fairswap/dataset.hpp"

namespace fairswap {

struct ModelConfig {
  double learning_rate = 0.1;
  std::size_t max_iterations = 2000;
  double l2 = 1e-4;
  // Stop once the gradient infinity-norm drops below this.
  double tolerance = 1e-6;
  // Recorded with the model. Full-batch descent from a zero start uses no
  // randomness, so the seed does not change the result.
  std::uint64_t seed = 0;
};

// Binary logistic regression on z-scored features.
struct LogisticModel {
  std::vector<double> weights;  // one per feature, standardized scale
  double intercept = 0.0;
  std::vector<double> means;    // training-fold means
  std::vector<double> scales;   // training-fold standard deviations (1 when constant)
  std::size_t iterations = 0;
  double learning_rate = 0.0;
  bool converged = false;
  // Objective value before the first step and after each step.
  std::vector<double> loss_history;

  std::size_t n_features() const { return weights.size(); }
  double standardize(std::size_t j, double x) const { return (x - means[j]) / scales[j]; }
  double log_odds(std::span<const double> row) const;
};

// Full-batch gradient descent on the L2-regularized weighted negative
// log-likelihood. `sample_weights`, when non-empty, scales each row's term.
LogisticModel fit_logistic(const TabularDataset& train, const ModelConfig& config,
                           std::span<const double> sample_weights = {});

double sigmoid(double score);

std::vector<double> predict_log_odds(const LogisticModel& model, const TabularDataset& ds);
std::vector<double> predict_proba(const LogisticModel& model, const TabularDataset& ds);

// Histogram of predicted probabilities.
struct PredictionDistribution {
  std::vector<double> masses;

  std::size_t bins() const { return masses.size(); }
  double bin_width() const { return 1.0 / static_cast<double>(masses.size()); }
};

// Bins [i/B, (i+1)/B) with the last bin closed at 1.
PredictionDistribution prediction_distribution(std::span<const double> probs, std::size_t bins);

// Two-point distribution of hard labels at threshold 0.5.
PredictionDistribution label_distribution(std::span<const double> probs);

nlohmann::json to_json(const LogisticModel& model);
LogisticModel model_from_json(const nlohmann::json& doc);

}  // namespace fairswap

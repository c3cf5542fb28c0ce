#include "fairswap/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fairswap/error.hpp"

namespace fairswap {

namespace {

// log(1 + exp(x)) without overflow
double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

struct Standardized {
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<double> z;  // row-major n x m

  double at(std::size_t i, std::size_t j) const { return z[i * m + j]; }
};

Standardized standardize(const TabularDataset& ds, const LogisticModel& model) {
  Standardized s;
  s.n = ds.n_rows();
  s.m = ds.n_features();
  s.z.resize(s.n * s.m);
  for (std::size_t j = 0; j < s.m; ++j) {
    const auto col = ds.column(j);
    for (std::size_t i = 0; i < s.n; ++i) s.z[i * s.m + j] = model.standardize(j, col[i]);
  }
  return s;
}

double objective(const Standardized& s, std::span<const int> y, std::span<const double> w,
                 double weight_total, const std::vector<double>& beta, double b, double l2,
                 std::vector<double>& scores) {
  double loss = 0.0;
  for (std::size_t i = 0; i < s.n; ++i) {
    double t = b;
    for (std::size_t j = 0; j < s.m; ++j) t += beta[j] * s.at(i, j);
    scores[i] = t;
    loss += w[i] * (softplus(t) - (y[i] ? t : 0.0));
  }
  double penalty = 0.0;
  for (double v : beta) penalty += v * v;
  return loss / weight_total + 0.5 * l2 * penalty;
}

}  // namespace

double sigmoid(double score) {
  if (score >= 0.0) return 1.0 / (1.0 + std::exp(-score));
  const double e = std::exp(score);
  return e / (1.0 + e);
}

double LogisticModel::log_odds(std::span<const double> row) const {
  if (row.size() != weights.size()) throw Error("model: row has wrong feature count");
  double t = intercept;
  for (std::size_t j = 0; j < weights.size(); ++j) t += weights[j] * standardize(j, row[j]);
  return t;
}

LogisticModel fit_logistic(const TabularDataset& train, const ModelConfig& config,
                           std::span<const double> sample_weights) {
  const std::size_t n = train.n_rows();
  const std::size_t m = train.n_features();
  if (n == 0) throw Error("fit: empty training set");
  if (!(config.learning_rate > 0.0) || config.l2 < 0.0) throw Error("fit: invalid configuration");
  const auto y = train.target();
  const auto positives = std::count(y.begin(), y.end(), 1);
  if (positives == 0 || positives == static_cast<std::ptrdiff_t>(n)) {
    throw Error("fit: training target contains a single class");
  }

  std::vector<double> w(n, 1.0);
  if (!sample_weights.empty()) {
    if (sample_weights.size() != n) throw Error("fit: sample weight count does not match rows");
    w.assign(sample_weights.begin(), sample_weights.end());
    if (std::any_of(w.begin(), w.end(), [](double v) { return !(v >= 0.0) || !std::isfinite(v); })) {
      throw Error("fit: sample weights must be finite and non-negative");
    }
  }
  const double weight_total = std::accumulate(w.begin(), w.end(), 0.0);
  if (!(weight_total > 0.0)) throw Error("fit: sample weights sum to zero");

  LogisticModel model;
  model.learning_rate = config.learning_rate;
  model.weights.assign(m, 0.0);
  model.means.resize(m);
  model.scales.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    const auto col = train.column(j);
    double mean = 0.0;
    for (double v : col) {
      if (!std::isfinite(v)) throw Error("fit: feature '" + train.name(j) + "' has non-finite values");
      mean += v;
    }
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : col) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    model.means[j] = mean;
    model.scales[j] = sd > 0.0 ? sd : 1.0;
  }

  const Standardized s = standardize(train, model);
  std::vector<double> scores(n);
  std::vector<double> grad(m);
  std::vector<double>& beta = model.weights;
  double& b = model.intercept;
  double lr = config.learning_rate;
  double loss = objective(s, y, w, weight_total, beta, b, config.l2, scores);
  model.loss_history.push_back(loss);

  for (std::size_t iter = 0; iter < config.max_iterations; ++iter) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = w[i] * (sigmoid(scores[i]) - y[i]);
      grad_b += r;
      for (std::size_t j = 0; j < m; ++j) grad[j] += r * s.at(i, j);
    }
    double gmax = std::abs(grad_b / weight_total);
    grad_b /= weight_total;
    for (std::size_t j = 0; j < m; ++j) {
      grad[j] = grad[j] / weight_total + config.l2 * beta[j];
      gmax = std::max(gmax, std::abs(grad[j]));
    }
    if (gmax < config.tolerance) {
      model.converged = true;
      break;
    }

    // Backtrack if a step would raise the objective; with z-scored inputs and
    // the default rate this practically never triggers.
    std::vector<double> next_beta(m);
    double next_b = 0.0;
    double next_loss = 0.0;
    for (int attempt = 0;; ++attempt) {
      for (std::size_t j = 0; j < m; ++j) next_beta[j] = beta[j] - lr * grad[j];
      next_b = b - lr * grad_b;
      next_loss = objective(s, y, w, weight_total, next_beta, next_b, config.l2, scores);
      if (next_loss <= loss || attempt >= 50) break;
      lr *= 0.5;
    }
    if (next_loss > loss) break;  // no descent possible at machine precision
    beta = next_beta;
    b = next_b;
    loss = next_loss;
    model.loss_history.push_back(loss);
    model.iterations = iter + 1;
  }
  return model;
}

std::vector<double> predict_log_odds(const LogisticModel& model, const TabularDataset& ds) {
  if (ds.n_features() != model.n_features()) {
    throw Error("predict: dataset has " + std::to_string(ds.n_features()) +
                " features, model expects " + std::to_string(model.n_features()));
  }
  std::vector<double> out(ds.n_rows(), model.intercept);
  for (std::size_t j = 0; j < model.n_features(); ++j) {
    const auto col = ds.column(j);
    const double w = model.weights[j];
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += w * model.standardize(j, col[i]);
  }
  return out;
}

std::vector<double> predict_proba(const LogisticModel& model, const TabularDataset& ds) {
  auto out = predict_log_odds(model, ds);
  for (double& v : out) v = sigmoid(v);
  return out;
}

PredictionDistribution prediction_distribution(std::span<const double> probs, std::size_t bins) {
  if (probs.empty()) throw Error("prediction_distribution: empty prediction vector");
  if (bins < 2) throw Error("prediction_distribution: need at least two bins");
  std::vector<std::size_t> counts(bins, 0);
  for (double p : probs) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error("prediction_distribution: probability outside [0, 1]");
    const auto bin = static_cast<std::size_t>(p * static_cast<double>(bins));
    ++counts[std::min(bin, bins - 1)];
  }
  PredictionDistribution d;
  d.masses.resize(bins);
  const double total = static_cast<double>(probs.size());
  for (std::size_t k = 0; k < bins; ++k) d.masses[k] = static_cast<double>(counts[k]) / total;
  return d;
}

PredictionDistribution label_distribution(std::span<const double> probs) {
  if (probs.empty()) throw Error("label_distribution: empty prediction vector");
  std::size_t positives = 0;
  for (double p : probs) positives += p >= 0.5 ? 1 : 0;
  const double total = static_cast<double>(probs.size());
  return PredictionDistribution{{static_cast<double>(probs.size() - positives) / total,
                                 static_cast<double>(positives) / total}};
}

nlohmann::json to_json(const LogisticModel& model) {
  return nlohmann::json{
      {"weights", model.weights},
      {"intercept", model.intercept},
      {"means", model.means},
      {"scales", model.scales},
      {"iterations", model.iterations},
      {"learning_rate", model.learning_rate},
      {"converged", model.converged},
  };
}

LogisticModel model_from_json(const nlohmann::json& doc) {
  LogisticModel model;
  try {
    doc.at("weights").get_to(model.weights);
    doc.at("intercept").get_to(model.intercept);
    doc.at("means").get_to(model.means);
    doc.at("scales").get_to(model.scales);
    model.iterations = doc.value("iterations", std::size_t{0});
    model.learning_rate = doc.value("learning_rate", 0.0);
    model.converged = doc.value("converged", false);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("model json: ") + e.what());
  }
  if (model.means.size() != model.weights.size() || model.scales.size() != model.weights.size()) {
    throw Error("model json: inconsistent vector lengths");
  }
  return model;
}

}  // namespace fairswap

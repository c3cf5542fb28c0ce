#include "fairswap/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "fairswap/error.hpp"

namespace fairswap {

namespace {

void check_bins(const PredictionDistribution& p, const PredictionDistribution& q) {
  if (p.bins() != q.bins()) {
    throw Error("divergence: bin count mismatch (" + std::to_string(p.bins()) + " vs " +
                std::to_string(q.bins()) + ")");
  }
  if (p.bins() == 0) throw Error("divergence: empty distribution");
}

// p * ln(p / q) with 0 * log(0 / x) = 0
double kl_term(double p, double q) {
  if (p <= 0.0) return 0.0;
  if (q <= 0.0) return std::numeric_limits<double>::infinity();
  return p * std::log(p / q);
}

}  // namespace

std::string_view to_string(DivergenceKind kind) {
  switch (kind) {
    case DivergenceKind::Hellinger: return "hellinger";
    case DivergenceKind::TotalVariation: return "total_variation";
    case DivergenceKind::Wasserstein: return "wasserstein";
    case DivergenceKind::JensenShannon: return "jensen_shannon";
  }
  return "unknown";
}

std::optional<DivergenceKind> parse_divergence(std::string_view name) {
  for (DivergenceKind k : kAllDivergences) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

double hellinger(const PredictionDistribution& p, const PredictionDistribution& q) {
  check_bins(p, q);
  double sum = 0.0;
  for (std::size_t y = 0; y < p.bins(); ++y) {
    const double d = std::sqrt(p.masses[y]) - std::sqrt(q.masses[y]);
    sum += d * d;
  }
  return std::min(1.0, std::sqrt(sum) / std::numbers::sqrt2);
}

double total_variation(const PredictionDistribution& p, const PredictionDistribution& q) {
  check_bins(p, q);
  double sum = 0.0;
  for (std::size_t y = 0; y < p.bins(); ++y) sum += std::abs(p.masses[y] - q.masses[y]);
  return std::min(1.0, 0.5 * sum);
}

double kl(const PredictionDistribution& p, const PredictionDistribution& q) {
  check_bins(p, q);
  double sum = 0.0;
  for (std::size_t y = 0; y < p.bins(); ++y) sum += kl_term(p.masses[y], q.masses[y]);
  return std::max(0.0, sum);
}

double jensen_shannon(const PredictionDistribution& p, const PredictionDistribution& q) {
  check_bins(p, q);
  double sum_p = 0.0;
  double sum_q = 0.0;
  for (std::size_t y = 0; y < p.bins(); ++y) {
    const double m = 0.5 * (p.masses[y] + q.masses[y]);
    sum_p += kl_term(p.masses[y], m);
    sum_q += kl_term(q.masses[y], m);
  }
  return std::clamp(0.5 * sum_p + 0.5 * sum_q, 0.0, std::numbers::ln2);
}

double wasserstein(const PredictionDistribution& p, const PredictionDistribution& q) {
  check_bins(p, q);
  double cdf_p = 0.0;
  double cdf_q = 0.0;
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < p.bins(); ++k) {
    cdf_p += p.masses[k];
    cdf_q += q.masses[k];
    sum += std::abs(cdf_p - cdf_q);
  }
  return sum / static_cast<double>(p.bins());
}

double divergence(DivergenceKind kind, const PredictionDistribution& p,
                  const PredictionDistribution& q) {
  switch (kind) {
    case DivergenceKind::Hellinger: return hellinger(p, q);
    case DivergenceKind::TotalVariation: return total_variation(p, q);
    case DivergenceKind::Wasserstein: return wasserstein(p, q);
    case DivergenceKind::JensenShannon: return jensen_shannon(p, q);
  }
  throw Error("divergence: unknown kind");
}

DivergenceScores all_divergences(const PredictionDistribution& p, const PredictionDistribution& q) {
  DivergenceScores s;
  for (DivergenceKind k : kAllDivergences) s[k] = divergence(k, p, q);
  return s;
}

}  // namespace fairswap

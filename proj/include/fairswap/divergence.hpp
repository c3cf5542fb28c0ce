#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "fairswap/model.hpp"

namespace fairswap {

enum class DivergenceKind { Hellinger, TotalVariation, Wasserstein, JensenShannon };

inline constexpr std::array<DivergenceKind, 4> kAllDivergences = {
    DivergenceKind::Hellinger, DivergenceKind::TotalVariation, DivergenceKind::Wasserstein,
    DivergenceKind::JensenShannon};

std::string_view to_string(DivergenceKind kind);
std::optional<DivergenceKind> parse_divergence(std::string_view name);

// All measures throw when the bin counts differ.
double hellinger(const PredictionDistribution& p, const PredictionDistribution& q);
double total_variation(const PredictionDistribution& p, const PredictionDistribution& q);
// Natural log; bounded by ln 2.
double jensen_shannon(const PredictionDistribution& p, const PredictionDistribution& q);
// Earth mover's distance with bin centres as support points.
double wasserstein(const PredictionDistribution& p, const PredictionDistribution& q);
// Returns +infinity when q has zero mass where p does not.
double kl(const PredictionDistribution& p, const PredictionDistribution& q);

double divergence(DivergenceKind kind, const PredictionDistribution& p,
                  const PredictionDistribution& q);

// One score per DivergenceKind, indexed in kAllDivergences order.
struct DivergenceScores {
  std::array<double, 4> values{};

  double& operator[](DivergenceKind k) { return values[static_cast<std::size_t>(k)]; }
  double operator[](DivergenceKind k) const { return values[static_cast<std::size_t>(k)]; }

  DivergenceScores& operator+=(const DivergenceScores& o) {
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
    return *this;
  }
  bool operator==(const DivergenceScores&) const = default;
};

DivergenceScores all_divergences(const PredictionDistribution& p, const PredictionDistribution& q);

}  // namespace fairswap
